import json
import logging
import random
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from pykoszul.complexes import Cplx, cohomology
from pykoszul.config import SuiteConfig
from pykoszul.const import Suite
from pykoszul.dolbeault import (
    GrassmannModel,
    TwoIntervalModule,
    grassmann_model,
    truncated_polynomial_model,
)
from pykoszul.exc import UsageError
from pykoszul.field import FieldSpec, gf
from pykoszul.helper import canonical_json, encode_module, mat_to_json
from pykoszul.koszul import AnalyticFlags, OperatorModule, koszul_cochain
from pykoszul.linalg import Mat

logger = logging.getLogger(__name__)

Payload = Dict[str, Any]

# (p, n) pairs for the base-change suite
BASE_CHANGE_PAIRS = [(2, 2), (3, 2), (2, 3)]


def instance_rng(seed: int, suite: Suite, index: int) -> random.Random:
    """Per-instance generator; independent of run order and worker count."""
    return random.Random(f"{seed}:{suite.cliName()}:{index}")


def random_matrix(
    rng: random.Random, field: FieldSpec, n: int, nilpotent: bool = False
) -> Mat:
    rows = [
        [
            field.random_value(rng) if not nilpotent or j > i else field.zero()
            for j in range(n)
        ]
        for i in range(n)
    ]
    return Mat(field, n, n, rows)


def polynomial_in(a: Mat, coeffs: Sequence[Any]) -> Mat:
    """Σ_j coeffs[j] a^j."""
    field = a.field
    acc = Mat.zeros(field, a.nrows, a.ncols)
    power = Mat.identity(field, a.nrows)
    for c in coeffs:
        acc = acc + power.map_raw(lambda x, c=c: field.mul(c, x))
        power = power @ a
    return acc


def random_commuting_family(
    rng: random.Random, field: FieldSpec, n: int, count: int
) -> List[Mat]:
    """`count` polynomials in one random matrix, nilpotent half the time."""
    a = random_matrix(rng, field, n, nilpotent=rng.random() < 0.5)
    return [
        polynomial_in(a, [field.random_value(rng) for _ in range(n)])
        for _ in range(count)
    ]


def random_module(
    rng: random.Random,
    field: FieldSpec,
    d: int,
    dim_max: int,
    analytic_from: Optional[int] = None,
) -> Tuple[OperatorModule, Optional[AnalyticFlags]]:
    """Operators x_0..x_d; those from `analytic_from` on are zero."""
    n = rng.randint(1, dim_max)
    ops = random_commuting_family(rng, field, n, d + 1)
    flags = None
    if analytic_from is not None:
        ops = [
            op if i < analytic_from else Mat.zeros(field, n, n)
            for i, op in enumerate(ops)
        ]
        flags = AnalyticFlags(d, analytic_from)
    m = OperatorModule(field, n, ops)
    if flags is not None:
        flags.check(m)
    return m, flags


def random_two_interval(
    rng: random.Random, field: FieldSpec, d: int, dim_max: int
) -> TwoIntervalModule:
    """M_I with analytic Lie operators, M_J = M_I ⊕ (zero block), dim M_J > dim M_I."""
    n = rng.randint(1, dim_max)
    extra = rng.randint(1, 2)
    a = random_matrix(rng, field, n, nilpotent=rng.random() < 0.5)
    ops_I = [polynomial_in(a, [field.random_value(rng) for _ in range(n)])]
    ops_I += [Mat.zeros(field, n, n) for _ in range(d - 1)]
    pad = Mat.zeros(field, extra, extra)
    ops_J = [Mat.block_diag(field, [op, pad]) for op in ops_I]
    g = polynomial_in(a, [field.random_value(rng) for _ in range(n)])
    phi = Mat.vstack(field, n, [g, Mat.zeros(field, extra, n)])
    res = Mat.vstack(field, n, [Mat.identity(field, n), Mat.zeros(field, extra, n)])
    labels = [f"nabla{i}" for i in range(1, d + 1)]
    return TwoIntervalModule(
        OperatorModule(field, n, ops_I, labels),
        OperatorModule(field, n + extra, ops_J, labels),
        phi,
        res,
    )


def random_grassmann(
    rng: random.Random,
    field: FieldSpec,
    d: int,
    w_dim: int,
    with_frobenius: bool = True,
) -> GrassmannModel:
    nabla, frob = random_commuting_family(rng, field, w_dim, 2)
    return grassmann_model(
        d,
        w_dim,
        field,
        nabla=nabla,
        frobenius=frob if with_frobenius else None,
        with_frobenius=with_frobenius,
    )


def random_grassmann_pair(
    rng: random.Random, field: FieldSpec, d: int, w_dim: int
) -> TwoIntervalModule:
    """Two copies of a Grassmann model joined by a Frobenius acting on W."""
    nabla, frob = random_commuting_family(rng, field, w_dim, 2)
    side = grassmann_model(d, w_dim, field, nabla=nabla, with_frobenius=False)
    phi = Mat.kron(Mat.identity(field, len(side.getBox())), frob)
    return TwoIntervalModule(side, side, phi)


def random_vector(rng: random.Random, field: FieldSpec, n: int) -> Mat:
    return Mat.column_vector(field, [field.random_value(rng) for _ in range(n)])


def random_cocycle(rng: random.Random, c: Cplx, q: int) -> Mat:
    """A random cohomology class plus a random coboundary."""
    field = c.field
    reps = cohomology(c).representatives(q)
    vec = reps @ random_vector(rng, field, reps.ncols)
    return vec + c.getDiff(q - 1) @ random_vector(rng, field, c.getDim(q - 1))


def _vec(m: Mat) -> List[str]:
    return mat_to_json(m)


def _combinatorics(config: SuiteConfig, rng: random.Random, index: int) -> Payload:
    if index == 0:
        return {"n": 4, "d": 1, "expected": {"counts": [1, 4, 6, 4, 1], "n_chi": [1]}}
    n = index - 1
    return {"n": n, "d": max(1, min(n, 10))}


def _koszul_duality(config: SuiteConfig, rng: random.Random, index: int) -> Payload:
    field = config.field
    if index == 0:
        m = OperatorModule.trivial(field, 4)
        return {
            "module": encode_module(m),
            "subset": [0, 1, 2, 3],
            "expected": {"cochain": [1, 4, 6, 4, 1], "chain": [1, 4, 6, 4, 1]},
        }
    m, _ = random_module(rng, field, config.d, config.dim_max)
    subset = sorted(rng.sample(range(m.op_count), rng.randint(1, m.op_count)))
    return {"module": encode_module(m), "subset": subset}


def _decompose(config: SuiteConfig, rng: random.Random, index: int) -> Payload:
    field = config.field
    if index == 0:
        m = OperatorModule.trivial(field, 3)
        return {
            "module": encode_module(m, AnalyticFlags(2, 2)),
            "k": 2,
            "expected": {"lhs": [1, 3, 3, 1]},
        }
    d = config.d
    k = rng.randint(1, d + 1)
    m, flags = random_module(rng, field, d, config.dim_max, k)
    return {"module": encode_module(m, flags), "k": k}


def _analytic(
    config: SuiteConfig, rng: random.Random, index: int, known_d: int, expected: Dict
) -> Payload:
    field = config.field
    if index == 0:
        m = OperatorModule.trivial(field, known_d + 1)
        flags = AnalyticFlags(known_d, 2)
        return {"module": encode_module(m, flags), "expected": expected}
    m, flags = random_module(rng, field, config.d, config.dim_max, 2)
    return {"module": encode_module(m, flags)}


def _fx_dims(config: SuiteConfig, rng: random.Random, index: int) -> Payload:
    expected = {"analytic": [1, 2, 1], "continuous": [1, 4, 6, 4, 1]}
    return _analytic(config, rng, index, 3, expected)


def _euler(config: SuiteConfig, rng: random.Random, index: int) -> Payload:
    if index % 2 == 0:
        return _analytic(config, rng, index, 1, {"chi": [0, 0]})
    d = config.d
    t = random_two_interval(rng, config.field, d, config.dim_max)
    return {"module": encode_module(t, AnalyticFlags(d, 2))}


def _iterated_rhom(config: SuiteConfig, rng: random.Random, index: int) -> Payload:
    field = config.field
    if index == 0:
        m = OperatorModule.trivial(field, 4)
        return {
            "module": encode_module(m),
            "first": [0, 1],
            "second": [2, 3],
            "expected": {"h": [1, 4, 6, 4, 1]},
        }
    m, _ = random_module(rng, field, config.d, config.dim_max)
    everything = list(range(m.op_count))
    rng.shuffle(everything)
    cut = rng.randint(0, len(everything))
    return {
        "module": encode_module(m),
        "first": sorted(everything[:cut]),
        "second": sorted(everything[cut:]),
    }


def _base_change(config: SuiteConfig, rng: random.Random, index: int) -> Payload:
    if index == 0:
        m = OperatorModule.trivial(gf(2), 2)
        dims = [1, 2, 1]
        return {
            "module": encode_module(m),
            "n": 2,
            "expected": {"dims": dims, "extended_dims": dims, "fixed_dims": dims},
        }
    p, n = BASE_CHANGE_PAIRS[(index - 1) % len(BASE_CHANGE_PAIRS)]
    m, _ = random_module(rng, gf(p), min(config.d, 3), config.dim_max)
    return {"module": encode_module(m), "n": n}


def _spectral_collapse(config: SuiteConfig, rng: random.Random, index: int) -> Payload:
    field = config.field
    if index == 0:
        m = OperatorModule.trivial(field, 3)
        return {
            "module": encode_module(m, AnalyticFlags(2, 2)),
            "k": 2,
            "expected": {"total": [1, 3, 3, 1]},
        }
    d = config.d
    k = rng.randint(1, d + 1)
    m, flags = random_module(rng, field, d, config.dim_max, k)
    return {"module": encode_module(m, flags), "k": k}


def _cup_delta(config: SuiteConfig, rng: random.Random, index: int) -> Payload:
    field = config.field
    if index == 0:
        m = OperatorModule.trivial(field, 2)
        one, zero = field.format(field.one()), field.format(field.zero())
        return {
            "module": encode_module(m),
            "xi": [one, zero],
            "v_degree": 1,
            "v": [zero, one],
            "leibniz": {
                "left_degree": 0,
                "left": [one],
                "right_degree": 1,
                "right": [one, one],
                "module_first": True,
            },
            "expected": {"h": [1, 2, 1], "cup_nonzero": [1]},
        }
    m, _ = random_module(rng, field, config.d, config.dim_max)
    l = m.op_count
    host = koszul_cochain(m, range(l))
    triv = koszul_cochain(OperatorModule.trivial(field, l), range(l))
    q = rng.randint(0, l)
    a = rng.randint(0, l)
    b = rng.randint(0, l - a)
    module_first = rng.random() < 0.5
    first, second = (host, triv) if module_first else (triv, host)
    return {
        "module": encode_module(m),
        "xi": _vec(random_cocycle(rng, host, 1)),
        "v_degree": q,
        "v": _vec(random_vector(rng, field, triv.getDim(q))),
        "leibniz": {
            "left_degree": a,
            "left": _vec(random_vector(rng, field, first.getDim(a))),
            "right_degree": b,
            "right": _vec(random_vector(rng, field, second.getDim(b))),
            "module_first": module_first,
        },
    }


def _pairing(config: SuiteConfig, rng: random.Random, index: int) -> Payload:
    return _analytic(config, rng, index, 2, {"h": [2, 1, 3, 3]})


def _dolbeault_shape(config: SuiteConfig, rng: random.Random) -> Tuple[int, int]:
    d = rng.randint(2, max(2, min(config.d, 5)))
    w = rng.randint(1, min(config.dim_max, 3))
    return d, w


def _dolbeault(config: SuiteConfig, rng: random.Random, index: int) -> Payload:
    field = config.field
    if index == 0:
        return {
            "module": encode_module(grassmann_zero(field, 4, 2)),
            "expected": {"resolution": [2, 0, 0, 0]},
        }
    if index == config.count + 1:
        # ∂_2 y^3 = 3y^2 = 0 over GF(3)
        model = truncated_polynomial_model(2, 3, 1, gf(3))
        return {"module": encode_module(model), "expected_fail": True}
    d, w = _dolbeault_shape(config, rng)
    return {"module": encode_module(random_grassmann(rng, field, d, w))}


def _form_model(
    config: SuiteConfig, rng: random.Random, index: int, expected: Dict
) -> Payload:
    field = config.field
    if index == 0:
        module = encode_module(grassmann_zero(field, 3, 1))
        return {"module": module, "expected": expected}
    d, w = _dolbeault_shape(config, rng)
    if index % 3 == 0:
        return {"module": encode_module(random_grassmann_pair(rng, field, d, w))}
    return {"module": encode_module(random_grassmann(rng, field, d, w))}


def _frolicher(config: SuiteConfig, rng: random.Random, index: int) -> Payload:
    return _form_model(config, rng, index, {"c_sigma": [1, 1, 0, 0]})


def _quad_matrix(config: SuiteConfig, rng: random.Random, index: int) -> Payload:
    return _form_model(config, rng, index, {"c_sigma_phi": [1, 2, 1, 0, 0]})


def grassmann_zero(field: FieldSpec, d: int, w_dim: int) -> GrassmannModel:
    """Grassmann model with ∇_1 = 0 and f - 1 = 0."""
    return grassmann_model(d, w_dim, field)


PAYLOADS: Dict[Suite, Callable[[SuiteConfig, random.Random, int], Payload]] = {
    Suite.combinatorics: _combinatorics,
    Suite.koszul_duality: _koszul_duality,
    Suite.decompose: _decompose,
    Suite.fx_dims: _fx_dims,
    Suite.euler: _euler,
    Suite.iterated_rhom: _iterated_rhom,
    Suite.base_change: _base_change,
    Suite.spectral_collapse: _spectral_collapse,
    Suite.cup_delta: _cup_delta,
    Suite.pairing: _pairing,
    Suite.dolbeault: _dolbeault,
    Suite.frolicher: _frolicher,
    Suite.quad_matrix: _quad_matrix,
}


def instance_count(config: SuiteConfig) -> int:
    """Instance 0 is the known-answer instance; generated ones follow."""
    if config.suite is Suite.combinatorics:
        return config.n_max + 2
    extra = 0
    if config.suite is Suite.dolbeault and config.include_counterexample:
        extra = 1
    return config.count + 1 + extra


def make_instance(config: SuiteConfig, index: int) -> Payload:
    suite = config.suite
    payload = PAYLOADS[suite](config, instance_rng(config.seed, suite, index), index)
    return {"suite": suite.cliName(), "index": index, "payload": payload}


def build_instances(config: SuiteConfig) -> List[Payload]:
    instances = [make_instance(config, i) for i in range(instance_count(config))]
    logger.debug(
        f"build_instances: {len(instances)} instances for {config.suite.cliName()}"
    )
    return instances


def gen_random(config: SuiteConfig) -> List[Path]:
    """Write instance-NNNN.json files for the configured suite.

    Files go to `config.out` (a directory, "instances" by default).
    """
    out = config.out if config.out is not None else Path("instances")
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for instance in build_instances(config):
        path = out / f"instance-{instance['index']:04d}.json"
        path.write_bytes(canonical_json(instance) + b"\n")
        paths.append(path)
    logger.info(f"gen_random: wrote {len(paths)} files to {out}")
    return paths


def load_instances(directory: Path) -> List[Payload]:
    """Read instance-*.json files back, ordered by index.

    Raises:
        UsageError: If a file is not valid JSON or lacks suite, index or payload.
    """
    instances = []
    for path in sorted(directory.glob("instance-*.json")):
        try:
            with open(path, "r", encoding="utf-8") as fh:
                inst = json.load(fh)
        except ValueError as err:
            raise UsageError(f"Broken instance file {path.name}: {err}")
        if (
            not isinstance(inst, dict)
            or not isinstance(inst.get("suite"), str)
            or not isinstance(inst.get("index"), int)
            or not isinstance(inst.get("payload"), dict)
        ):
            raise UsageError(
                f"Malformed instance file {path.name}: "
                "expected suite, index and payload"
            )
        instances.append(inst)
    return sorted(instances, key=lambda inst: inst["index"])
