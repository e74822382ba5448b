import asyncio
import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from datetime import datetime, timezone
from math import comb
from typing import Any, Callable, Dict, List, Optional, Tuple

from pykoszul.combinatorics import n_chi, n_chi_via_complexes, y_sequence
from pykoszul.complexes import cohomology
from pykoszul.config import SuiteConfig
from pykoszul.const import ExitCode, Suite
from pykoszul.cup import (
    CohClass,
    cup_equals_delta_check,
    cup_product,
    leibniz_check,
    pairing_report,
)
from pykoszul.dolbeault import (
    FormResolution,
    GrassmannModel,
    dolbeault_resolution_check,
    frolicher_check,
    omega_complexes,
    quad_matrix_check,
    sol,
)
from pykoszul.exc import UsageError
from pykoszul.generate import build_instances, load_instances
from pykoszul.helper import (
    InstanceRecord,
    ReportData,
    decode_module,
    instance_digest,
    mat_from_json,
)
from pykoszul.herr import (
    HerrInstance,
    base_change_descent,
    euler_factorization_check,
    fx_dims_check,
    iterated_rhom_check,
    spectral_comparison,
)
from pykoszul.koszul import (
    OperatorModule,
    decompose,
    duality_check,
    koszul_chain,
    koszul_cochain,
    rhom_vs_tensor_check,
)

logger = logging.getLogger(__name__)

Outcome = Tuple[bool, Dict[str, List[int]], Dict[str, Any]]


def _operator_module(payload: Dict[str, Any]):
    m, flags = decode_module(payload["module"])
    if not isinstance(m, OperatorModule):
        raise ValueError("Expected an operator module")
    return m, flags


def check_combinatorics(payload: Dict[str, Any]) -> Outcome:
    n, d = payload["n"], payload["d"]
    occurrences = Counter(y_sequence(n).entries)
    counts = [occurrences[k] for k in range(n + 1)]
    closed = n_chi(d)
    via = n_chi_via_complexes(d)
    binomials = [comb(n, k) for k in range(n + 1)]
    passed = counts == binomials and closed == via == (1 if d == 1 else 0)
    dims = {"counts": counts, "n_chi": [closed]}
    return passed, dims, {"n_chi_via_complexes": via}


def check_koszul_duality(payload: Dict[str, Any]) -> Outcome:
    m, _ = _operator_module(payload)
    subset = payload["subset"]
    l = len(subset)
    iso = duality_check(m, subset)
    rhom = rhom_vs_tensor_check(m, subset)
    cochain = cohomology(koszul_cochain(m, subset)).dims_list(0, l)
    chain = cohomology(koszul_chain(m, subset)).dims_list(-l, 0)
    passed = iso.is_iso() and rhom and cochain == chain
    details = {"iso": iso.is_iso(), "rhom_vs_tensor": rhom}
    return passed, {"cochain": cochain, "chain": chain}, details


def check_decompose(payload: Dict[str, Any]) -> Outcome:
    m, _ = _operator_module(payload)
    table = decompose(m, payload["k"]).dim_table
    passed = table["lhs"] == table["rhs"] == table["predicted"]
    dims = {key: table[key] for key in ("lhs", "rhs", "base", "predicted")}
    return passed, dims, {"multiplicities": table["multiplicities"]}


def check_fx_dims(payload: Dict[str, Any]) -> Outcome:
    m, flags = _operator_module(payload)
    record = fx_dims_check(HerrInstance(m, flags))
    dims = {key: record[key] for key in ("analytic", "continuous", "predicted")}
    details = {key: record[key] for key in ("h1_identity", "top_identity")}
    return record["passed"], dims, details


def check_euler(payload: Dict[str, Any]) -> Outcome:
    m, flags = decode_module(payload["module"])
    record = euler_factorization_check(HerrInstance(m, flags))
    dims = {"chi": [record["chi_analytic"], record["chi_continuous"]]}
    return record["passed"], dims, {"n_chi": record["n_chi"], "note": record["note"]}


def check_iterated_rhom(payload: Dict[str, Any]) -> Outcome:
    m, _ = _operator_module(payload)
    passed = iterated_rhom_check(m, (payload["first"], payload["second"]))
    h = cohomology(koszul_cochain(m, range(m.op_count))).dims_list(0, m.op_count)
    return passed, {"h": h}, {}


def check_base_change(payload: Dict[str, Any]) -> Outcome:
    m, _ = _operator_module(payload)
    record = base_change_descent(m, payload["n"])
    dims = {key: record[key] for key in ("dims", "extended_dims", "fixed_dims")}
    return record["passed"], dims, {"field": record["field"]}


def check_spectral_collapse(payload: Dict[str, Any]) -> Outcome:
    m, flags = _operator_module(payload)
    k = payload["k"]
    record = spectral_comparison(HerrInstance(m, flags), k)
    total = record["total"]
    lhs = decompose(m, k).dim_table["lhs"]
    antidiagonals = [0] * len(total)
    for key, v in record["columns"]["e_inf"].items():
        p, q = (int(s) for s in key.split(","))
        if 0 <= p + q < len(total):
            antidiagonals[p + q] += v
    passed = record["passed"] and antidiagonals == total and total == lhs
    details = {name: record[name] for name in ("columns", "rows")}
    details["decompose_lhs"] = lhs
    dims = {"total": total, "predicted": record["predicted"], "e_inf": antidiagonals}
    return passed, dims, details


def check_cup_delta(payload: Dict[str, Any]) -> Outcome:
    m, _ = _operator_module(payload)
    field = m.field
    l = m.op_count
    host = koszul_cochain(m, range(l))
    triv = koszul_cochain(OperatorModule.trivial(field, l, m.getLabels()), range(l))
    xi = CohClass(host, 1, mat_from_json(field, host.getDim(1), 1, payload["xi"]))
    q = payload["v_degree"]
    v = CohClass(triv, q, mat_from_json(field, triv.getDim(q), 1, payload["v"]))
    equal = cup_equals_delta_check(m, xi, v)
    cup = cup_product(m, xi, v)

    lb = payload["leibniz"]
    a, b = lb["left_degree"], lb["right_degree"]
    left, right = (host, triv) if lb["module_first"] else (triv, host)
    leibniz = leibniz_check(
        m,
        range(l),
        a,
        mat_from_json(field, left.getDim(a), 1, lb["left"]),
        b,
        mat_from_json(field, right.getDim(b), 1, lb["right"]),
        lb["module_first"],
    )
    dims = {
        "h": cohomology(host).dims_list(0, l),
        "cup_nonzero": [0 if cup.is_zero() else 1],
    }
    return equal and leibniz, dims, {"cup_equals_delta": equal, "leibniz": leibniz}


def check_pairing(payload: Dict[str, Any]) -> Outcome:
    m, flags = _operator_module(payload)
    if flags is None:
        raise ValueError("The pairing suite needs analytic flags")
    record = pairing_report(m, flags)
    dims = {
        "h": [
            record["h1_an"],
            record["h2_an"],
            record["h1_cts_trivial"],
            record["h2_cts"],
        ]
    }
    details = {key: record[key] for key in ("classes", "pairing_rank", "note")}
    return record["passed"], dims, details


def check_dolbeault(payload: Dict[str, Any]) -> Outcome:
    model, _ = decode_module(payload["module"])
    if not isinstance(model, GrassmannModel):
        raise ValueError("The dolbeault suite needs a Grassmann model")
    from_index = model.nabla_index + 1
    holds = dolbeault_resolution_check(model)
    res = FormResolution(model, from_index).cplx
    dims = {
        "resolution": cohomology(res).dims_list(0, res.hi),
        "sol": [sol(model, from_index).ncols],
    }
    lemma = model.dbarLemmaHolds()
    return holds and lemma, dims, {"dbar_lemma": lemma}


def check_frolicher(payload: Dict[str, Any]) -> Outcome:
    model, _ = decode_module(payload["module"])
    record = frolicher_check(model)  # type: ignore
    c_sigma = omega_complexes(model).C_sigma  # type: ignore
    dims = {
        "c_sigma": cohomology(c_sigma).dims_list(0, c_sigma.hi),
        "nabla_total": record["nabla"]["total"],
        "phi_total": record["phi"]["total"],
    }
    return record["passed"] and record["resolution_holds"], dims, record


def check_quad_matrix(payload: Dict[str, Any]) -> Outcome:
    model, _ = decode_module(payload["module"])
    passed = quad_matrix_check(model)  # type: ignore
    c = omega_complexes(model).C_sigma_phi  # type: ignore
    return passed, {"c_sigma_phi": cohomology(c).dims_list(0, c.hi)}, {}


CHECKS: Dict[Suite, Callable[[Dict[str, Any]], Outcome]] = {
    Suite.combinatorics: check_combinatorics,
    Suite.koszul_duality: check_koszul_duality,
    Suite.decompose: check_decompose,
    Suite.fx_dims: check_fx_dims,
    Suite.euler: check_euler,
    Suite.iterated_rhom: check_iterated_rhom,
    Suite.base_change: check_base_change,
    Suite.spectral_collapse: check_spectral_collapse,
    Suite.cup_delta: check_cup_delta,
    Suite.pairing: check_pairing,
    Suite.dolbeault: check_dolbeault,
    Suite.frolicher: check_frolicher,
    Suite.quad_matrix: check_quad_matrix,
}


def run_instance(instance: Dict[str, Any]) -> InstanceRecord:
    """Run one instance; errors inside the check count as a failure."""
    suite = Suite.getByName(instance["suite"])
    payload = instance["payload"]
    expected_fail = bool(payload.get("expected_fail", False))
    try:
        passed, dims, details = CHECKS[suite](payload)
    except (
        KeyError,
        IndexError,
        TypeError,
        ValueError,
        ArithmeticError,
        RuntimeError,
        NotImplementedError,
    ) as err:
        logger.debug(
            f"run_instance: {suite.cliName()} #{instance['index']} raised {err!r}"
        )
        passed, dims, details = False, {}, {"error": f"{type(err).__name__}: {err}"}

    expected = payload.get("expected")
    if expected is not None:
        mismatched = {k: v for k, v in expected.items() if dims.get(k) != v}
        if mismatched:
            passed = False
            details = dict(details, expected=expected)

    ok = passed != expected_fail
    tag = f"{suite.cliName()} #{instance['index']}"
    if expected_fail:
        if ok:
            logger.warning(f"{tag}: expected failure reproduced")
        else:
            logger.warning(f"{tag}: expected failure did not fail")
    elif not ok:
        logger.info(f"{tag}: failed")
    return {
        "index": instance["index"],
        "digest": instance_digest(instance),
        "passed": passed,
        "expected_fail": expected_fail,
        "dims": dims,
        "details": details,
        "instance": None if ok and not expected_fail else instance,
    }


def summarize(records: List[InstanceRecord]) -> Dict[str, int]:
    return {
        "total": len(records),
        "passed": sum(1 for r in records if r["passed"] and not r["expected_fail"]),
        "failed": sum(1 for r in records if r["passed"] == r["expected_fail"]),
        "expected_fail": sum(
            1 for r in records if r["expected_fail"] and not r["passed"]
        ),
    }


def exit_code(report: ReportData) -> ExitCode:
    return ExitCode.ok if report["summary"]["failed"] == 0 else ExitCode.failed


def _instances_for(config: SuiteConfig) -> List[Dict[str, Any]]:
    if config.instances is None:
        return build_instances(config)
    if not config.instances.is_dir():
        raise UsageError(f"Instance directory not found: {config.instances}")
    instances = load_instances(config.instances)
    for inst in instances:
        if inst.get("suite") != config.suite.cliName():
            raise UsageError(
                f"Instance {inst.get('index')} belongs to suite {inst.get('suite')!r}"
            )
    return instances


async def run_suite_async(config: SuiteConfig, timestamp: bool = True) -> ReportData:
    """Run all instances of a suite on a thread pool of `config.jobs` workers.

    Records are ordered by instance index, whatever the completion order.
    """
    instances = _instances_for(config)
    logger.info(f"run_suite: {config.suite.cliName()} with {len(instances)} instances")
    loop = asyncio.get_event_loop()
    with ThreadPoolExecutor(config.jobs, "pykoszul") as executor:
        records = await asyncio.gather(
            *[loop.run_in_executor(executor, run_instance, inst) for inst in instances]
        )
    records = sorted(records, key=lambda r: r["index"])
    report: ReportData = {
        "suite": config.suite.cliName(),
        "config": config.to_json(),
        "records": records,
        "summary": summarize(records),
    }
    if timestamp:
        report["generated_at"] = datetime.now(timezone.utc).isoformat()
    logger.info(f"run_suite: {report['summary']}")
    return report


def run_suite(config: SuiteConfig, timestamp: bool = True) -> ReportData:
    return asyncio.run(run_suite_async(config, timestamp))


def known_answer(suite: Suite, config: Optional[SuiteConfig] = None) -> InstanceRecord:
    """Run only instance 0 of a suite."""
    config = config if config is not None else SuiteConfig(suite=suite, count=0)
    return run_instance(build_instances(config)[0])
