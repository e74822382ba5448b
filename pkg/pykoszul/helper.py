import json
import logging
from typing import Any, Dict, List, Optional, Sequence, Tuple, TypedDict, Union

from cryptography.hazmat.primitives import hashes

from pykoszul.const import FieldKind
from pykoszul.dolbeault import (
    GrassmannModel,
    TwoIntervalModule,
    truncated_polynomial_model,
)
from pykoszul.field import FieldSpec, FieldSpecFactory, rationals
from pykoszul.koszul import AnalyticFlags, OperatorModule
from pykoszul.linalg import Mat
from pykoszul.spectral import DoubleCplx

logger = logging.getLogger(__name__)


class FieldData(TypedDict):
    kind: str
    p: int
    n: int
    modulus: List[int]


class _ModuleDataBase(TypedDict):
    field: FieldData
    dim: int
    labels: List[str]
    operators: List[List[str]]


class ModuleData(_ModuleDataBase, total=False):
    type: str
    analytic_from: int


class GrassmannData(TypedDict):
    type: str
    field: FieldData
    d: int
    degree: int
    w_dim: int
    nabla: List[str]
    frobenius: Optional[List[str]]


class _TwoIntervalDataBase(TypedDict):
    type: str
    field: FieldData
    m_I: Dict[str, Any]
    m_J: Dict[str, Any]
    phi: List[str]
    res: List[str]


class TwoIntervalData(_TwoIntervalDataBase, total=False):
    analytic_from: int


class DoubleCplxData(TypedDict):
    field: FieldData
    dims: List[Tuple[int, int, int]]
    dh: List[Tuple[int, int, List[str]]]
    dv: List[Tuple[int, int, List[str]]]


class InstanceRecord(TypedDict):
    index: int
    digest: str
    passed: bool
    expected_fail: bool
    dims: Dict[str, List[int]]
    details: Dict[str, Any]
    instance: Optional[Dict[str, Any]]


class ReportData(TypedDict, total=False):
    suite: str
    config: Dict[str, Any]
    records: List[InstanceRecord]
    summary: Dict[str, int]
    generated_at: str


AnyModule = Union[OperatorModule, GrassmannModel, TwoIntervalModule]


def field_to_json(fs: FieldSpec) -> FieldData:
    return {"kind": fs.kind.name, "p": fs.p, "n": fs.n, "modulus": list(fs.modulus)}


def field_from_json(data: FieldData) -> FieldSpec:
    try:
        kind = FieldKind[data["kind"]]
    except KeyError:
        raise ValueError(f"Unknown field kind: {data.get('kind')}")
    if kind is FieldKind.rationals:
        return rationals()
    modulus = tuple(data["modulus"])
    return FieldSpecFactory.get_instance(kind, data["p"], data["n"], modulus)


def mat_to_json(m: Mat) -> List[str]:
    """Row-major entries as exact strings."""
    f = m.field
    return [f.format(x) for r in m.raw_rows() for x in r]


def mat_from_json(field: FieldSpec, nrows: int, ncols: int, data: Sequence[str]) -> Mat:
    if len(data) != nrows * ncols:
        raise ValueError(f"Expected {nrows * ncols} entries, got {len(data)}")
    rows = [
        [field.parse(data[i * ncols + j]) for j in range(ncols)] for i in range(nrows)
    ]
    return Mat(field, nrows, ncols, rows)


def module_to_json(
    m: OperatorModule, flags: Optional[AnalyticFlags] = None
) -> ModuleData:
    data: ModuleData = {
        "type": "operator",
        "field": field_to_json(m.field),
        "dim": m.dim,
        "labels": list(m.getLabels()),
        "operators": [mat_to_json(op) for op in m.getOps()],
    }
    if flags is not None:
        data["analytic_from"] = flags.analytic_from
    return data


def module_from_json(
    data: ModuleData,
) -> Tuple[OperatorModule, Optional[AnalyticFlags]]:
    field = field_from_json(data["field"])
    dim = data["dim"]
    ops = [mat_from_json(field, dim, dim, op) for op in data["operators"]]
    m = OperatorModule(field, dim, ops, data.get("labels"))
    flags = None
    if "analytic_from" in data:
        flags = AnalyticFlags(m.op_count - 1, data["analytic_from"])
        flags.check(m)
    return m, flags


def grassmann_to_json(g: GrassmannModel) -> GrassmannData:
    return {
        "type": "grassmann",
        "field": field_to_json(g.field),
        "d": g.d,
        "degree": g.degree,
        "w_dim": g.w_dim,
        "nabla": mat_to_json(g.nabla),
        "frobenius": None if g.frobenius is None else mat_to_json(g.frobenius),
    }


def grassmann_from_json(data: GrassmannData) -> GrassmannModel:
    field = field_from_json(data["field"])
    w = data["w_dim"]
    frob = data.get("frobenius")
    return truncated_polynomial_model(
        data["d"],
        data["degree"],
        w,
        field,
        nabla=mat_from_json(field, w, w, data["nabla"]),
        frobenius=None if frob is None else mat_from_json(field, w, w, frob),
        with_frobenius=frob is not None,
    )


def two_interval_to_json(
    t: TwoIntervalModule, flags: Optional[AnalyticFlags] = None
) -> TwoIntervalData:
    data: TwoIntervalData = {
        "type": "two_interval",
        "field": field_to_json(t.field),
        "m_I": encode_module(t.m_I),
        "m_J": encode_module(t.m_J),
        "phi": mat_to_json(t.phi),
        "res": mat_to_json(t.res),
    }
    if flags is not None:
        data["analytic_from"] = flags.analytic_from
    return data


def two_interval_from_json(
    data: TwoIntervalData,
) -> Tuple[TwoIntervalModule, Optional[AnalyticFlags]]:
    m_I, _ = decode_module(data["m_I"])
    m_J, _ = decode_module(data["m_J"])
    if not isinstance(m_I, OperatorModule) or not isinstance(m_J, OperatorModule):
        raise ValueError("Interval sides should be operator modules")
    field = m_I.field
    t = TwoIntervalModule(
        m_I,
        m_J,
        mat_from_json(field, m_J.dim, m_I.dim, data["phi"]),
        mat_from_json(field, m_J.dim, m_I.dim, data["res"]),
    )
    flags = None
    if "analytic_from" in data:
        flags = AnalyticFlags(t.op_count, data["analytic_from"])
    return t, flags


def encode_module(
    m: AnyModule, flags: Optional[AnalyticFlags] = None
) -> Dict[str, Any]:
    if isinstance(m, GrassmannModel):
        return dict(grassmann_to_json(m))
    if isinstance(m, TwoIntervalModule):
        return dict(two_interval_to_json(m, flags))
    if isinstance(m, OperatorModule):
        return dict(module_to_json(m, flags))
    raise TypeError("Invalid module")


def decode_module(data: Dict[str, Any]) -> Tuple[AnyModule, Optional[AnalyticFlags]]:
    kind = data.get("type", "operator")
    if kind == "grassmann":
        return grassmann_from_json(data), None  # type: ignore
    if kind == "two_interval":
        return two_interval_from_json(data)  # type: ignore
    if kind == "operator":
        return module_from_json(data)  # type: ignore
    raise ValueError(f"Unknown module type: {kind}")


def double_to_json(dc: DoubleCplx) -> DoubleCplxData:
    dims = dc.getDims()
    return {
        "field": field_to_json(dc.field),
        "dims": [(p, q, n) for (p, q), n in sorted(dims.items())],
        "dh": [(p, q, mat_to_json(dc.getDh(p, q))) for p, q in sorted(dims)],
        "dv": [(p, q, mat_to_json(dc.getDv(p, q))) for p, q in sorted(dims)],
    }


def double_from_json(data: DoubleCplxData) -> DoubleCplx:
    field = field_from_json(data["field"])
    dims = {(p, q): n for p, q, n in data["dims"]}

    def get(p: int, q: int) -> int:
        return dims.get((p, q), 0)

    dh = {
        (p, q): mat_from_json(field, get(p + 1, q), get(p, q), m)
        for p, q, m in data["dh"]
    }
    dv = {
        (p, q): mat_from_json(field, get(p, q + 1), get(p, q), m)
        for p, q, m in data["dv"]
    }
    return DoubleCplx(field, dims, dh, dv)


def canonical_json(data: Any) -> bytes:
    """Stable encoding: sorted keys, no whitespace."""
    return json.dumps(data, sort_keys=True, separators=(",", ":")).encode("utf-8")


def instance_digest(data: Any) -> str:
    """SHA-256 of the canonical JSON of an instance, as hex."""
    digest = hashes.Hash(hashes.SHA256())
    digest.update(canonical_json(data))
    return digest.finalize().hex()
