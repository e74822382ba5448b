import itertools
import logging
from functools import lru_cache
from math import comb
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

from pykoszul.complexes import (
    ChainMap,
    Cplx,
    cohomology,
    cone,
    direct_sum,
    direct_sum_maps,
    fibre,
    shift,
    shift_map,
    sign,
)
from pykoszul.exc import PreconditionError
from pykoszul.field import FieldSpec
from pykoszul.linalg import Mat

logger = logging.getLogger(__name__)

Subset = Tuple[int, ...]


class OperatorModule:
    def __init__(
        self,
        field: FieldSpec,
        dim: int,
        ops: Sequence[Mat],
        labels: Optional[Sequence[str]] = None,
    ) -> None:
        """A finite-dimensional module with a family of commuting operators.

        Operator `i` plays the role of x_i; in Herr-type instances x_0 is f-1
        and x_1, ..., x_d are the Lie-algebra operators.

        Args:
            field (FieldSpec): The base field.
            dim (int): Dimension of the module.
            ops (Sequence[Mat]): Square matrices of size `dim`.
            labels (Optional[Sequence[str]]): One unique label per operator,
                "x0", "x1", ... by default.

        Raises:
            PreconditionError: If two operators do not commute.
        """
        if not isinstance(field, FieldSpec):
            raise TypeError("Invalid FieldSpec")
        if not isinstance(dim, int) or dim < 0:
            raise ValueError("Module dimension should be a non-negative integer")
        if not ops:
            raise ValueError("At least one operator is needed")
        for i, op in enumerate(ops):
            if not isinstance(op, Mat):
                raise TypeError("Invalid operator")
            if op.field is not field:
                raise PreconditionError(f"Operator {i} is over {op.field}, not {field}")
            if op.shape != (dim, dim):
                raise ValueError(
                    f"Operator {i} has shape {op.shape}, expected {(dim, dim)}"
                )
        if labels is None:
            labels = [f"x{i}" for i in range(len(ops))]
        if len(labels) != len(ops) or len(set(labels)) != len(labels):
            raise ValueError("Labels should be unique, one per operator")
        for i, j in itertools.combinations(range(len(ops)), 2):
            if not ops[i].commutes_with(ops[j]):
                raise PreconditionError(
                    f"Operators {labels[i]} and {labels[j]} do not commute"
                )

        self._field = field
        self._dim = dim
        self._ops = tuple(ops)
        self._labels = tuple(labels)

    @classmethod
    def trivial(
        cls, field: FieldSpec, count: int, labels: Optional[Sequence[str]] = None
    ) -> "OperatorModule":
        """The 1-dimensional module on which every operator acts as zero."""
        return cls(field, 1, [Mat.zeros(field, 1, 1)] * count, labels)

    @property
    def field(self) -> FieldSpec:
        return self._field

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def op_count(self) -> int:
        return len(self._ops)

    def getOps(self) -> Tuple[Mat, ...]:
        return self._ops

    def getOp(self, i: int) -> Mat:
        return self._ops[i]

    def getLabels(self) -> Tuple[str, ...]:
        return self._labels

    def same_shape(self, other: "OperatorModule") -> bool:
        return other.field is self._field and other.getLabels() == self._labels

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, OperatorModule):
            return NotImplemented
        return (
            other.field is self._field
            and other.dim == self._dim
            and other.getLabels() == self._labels
            and other.getOps() == self._ops
        )

    __hash__ = None  # type: ignore

    def __str__(self) -> str:
        return (
            f"OperatorModule(field={self._field}, dim={self._dim}, "
            f"labels={list(self._labels)})"
        )

    __repr__ = __str__


class AnalyticFlags:
    def __init__(self, d: int, analytic_from: int) -> None:
        """Marks operators x_k, ..., x_d as required to vanish.

        Args:
            d (int): Number of embeddings; the module has operators x_0, ..., x_d.
            analytic_from (int): Index k from which operators are zero.
        """
        if not isinstance(d, int) or d < 1:
            raise ValueError("d should be a positive integer")
        if not isinstance(analytic_from, int) or not 1 <= analytic_from <= d + 1:
            raise ValueError(f"analytic_from should be in 1..{d + 1}")
        self._d = d
        self._analytic_from = analytic_from

    @property
    def d(self) -> int:
        return self._d

    @property
    def analytic_from(self) -> int:
        return self._analytic_from

    def check(self, m: OperatorModule) -> None:
        """Raise PreconditionError unless `m` satisfies the flags."""
        if m.op_count != self._d + 1:
            raise PreconditionError(
                f"Expected {self._d + 1} operators for d={self._d}, got {m.op_count}"
            )
        check_killed(m, self._analytic_from)

    def __str__(self) -> str:
        return f"AnalyticFlags(d={self._d}, analytic_from={self._analytic_from})"


def check_killed(m: OperatorModule, k: int) -> None:
    for i in range(k, m.op_count):
        if not m.getOp(i).is_zero():
            raise PreconditionError(
                f"Operator {m.getLabels()[i]} (index {i}) should be zero"
            )


def colex_subsets(indices: Iterable[int], q: int) -> List[Subset]:
    """q-subsets of `indices` (as sorted tuples) in colexicographic order."""
    if q < 0:
        return []
    return sorted(
        itertools.combinations(sorted(indices), q), key=lambda s: tuple(reversed(s))
    )


def normalize_subset(m: OperatorModule, subset: Iterable[int]) -> Subset:
    idx = tuple(sorted(set(subset)))
    for i in idx:
        if not isinstance(i, int) or not 0 <= i < m.op_count:
            raise ValueError(
                f"Operator index {i} out of range for {m.op_count} operators"
            )
    return idx


class KoszulCplx(Cplx):
    def __init__(
        self,
        module: OperatorModule,
        subset: Subset,
        labels: Dict[int, List[Subset]],
        lo: int,
        dims: Sequence[int],
        diffs: Sequence[Mat],
    ) -> None:
        """A Koszul-type complex remembering its module and its block labels.

        The term in degree q is a direct sum of copies of the module, one per
        subset in `labels[q]`, in that order.
        """
        super().__init__(module.field, lo, dims, diffs)
        self._module = module
        self._subset = subset
        self._labels = labels

    @classmethod
    def from_cplx(
        cls,
        c: Cplx,
        module: OperatorModule,
        subset: Subset,
        labels: Dict[int, List[Subset]],
    ) -> "KoszulCplx":
        return cls(
            module,
            subset,
            labels,
            c.lo,
            [c.getDim(q) for q in c.degrees()],
            [c.getDiff(q) for q in range(c.lo, c.hi)],
        )

    @property
    def module(self) -> OperatorModule:
        return self._module

    @property
    def subset(self) -> Subset:
        return self._subset

    def labels(self, q: int) -> List[Subset]:
        return self._labels.get(q, [])

    def position(self, q: int, s: Subset) -> int:
        return self.labels(q).index(s)

    def block(self, q: int, s: Subset, v: Mat) -> Mat:
        """The component of a degree-q cochain (column) at subset `s`."""
        n = self._module.dim
        start = self.position(q, s) * n
        return v.select(rows=range(start, start + n))


def koszul_cochain(m: OperatorModule, subset: Iterable[int]) -> KoszulCplx:
    """K^•(x_S, M) with (dm)_S = Σ_{i∈S} (-1)^{#{j∈S : j<i}} x_i m_{S∖i}."""
    idx = normalize_subset(m, subset)
    l = len(idx)
    n = m.dim
    field = m.field
    labels = {q: colex_subsets(idx, q) for q in range(l + 1)}
    diffs = []
    for q in range(l):
        col_pos = {t: j for j, t in enumerate(labels[q])}
        blocks = {}
        for bi, s in enumerate(labels[q + 1]):
            for k, i in enumerate(s):
                blocks[(bi, col_pos[s[:k] + s[k + 1 :]])] = m.getOp(i).signed(sign(k))
        rows = [n] * len(labels[q + 1])
        diffs.append(Mat.from_blocks(field, rows, [n] * len(labels[q]), blocks))
    dims = [n * len(labels[q]) for q in range(l + 1)]
    logger.debug(f"koszul_cochain: subset {idx}, dims {dims}")
    return KoszulCplx(m, idx, labels, 0, dims, diffs)


def blockwise_action(c: Cplx, op: Mat) -> ChainMap:
    """Let `op` act diagonally on every module block of a Koszul-built complex."""
    n = op.nrows
    maps = {}
    for q in c.degrees():
        dim = c.getDim(q)
        if n == 0 or dim % n:
            if dim:
                raise ValueError(
                    f"Degree {q} of dimension {dim} is not a sum of {n}-dim blocks"
                )
            maps[q] = Mat.zeros(c.field, 0, 0)
            continue
        maps[q] = op.kron_identity(dim // n)
    return ChainMap(c, c, maps)


def koszul_chain(m: OperatorModule, subset: Iterable[int]) -> KoszulCplx:
    """K_•(x_S, M) built by iterated cones, in cohomological degrees -l..0.

    K_•(x_i, M) = cone(x_i : M -> M); each further operator takes the cone
    of its action on the complex built so far. Chain degree j sits in
    cohomological degree -j, indexed by j-subsets.
    """
    idx = normalize_subset(m, subset)
    c: Cplx = Cplx.concentrated(m.field, m.dim)
    labels: Dict[int, List[Subset]] = {0: [()]}
    for i in idx:
        c = cone(blockwise_action(c, m.getOp(i)))
        labels = {
            q: [t + (i,) for t in labels.get(q + 1, [])] + labels.get(q, [])
            for q in c.degrees()
        }
    return KoszulCplx.from_cplx(c, m, idx, labels)


def _unit_sign(field: FieldSpec, v) -> int:
    if v == field.one():
        return 1
    if v == field.neg(field.one()):
        return -1
    raise RuntimeError(f"Expected a unit sign, got {field.format(v)}")


def _template(field: FieldSpec, idx: Subset) -> OperatorModule:
    count = (max(idx) + 1) if idx else 1
    return OperatorModule(field, 1, [Mat.identity(field, 1)] * count)


def _complement(idx: Subset, s: Subset) -> Subset:
    return tuple(i for i in idx if i not in s)


def _duality_maps(
    co: KoszulCplx, ch: KoszulCplx, signs: Dict[Subset, int], l: int
) -> Dict[int, Mat]:
    field = co.field
    n = co.module.dim
    ident = Mat.identity(field, n)
    maps = {}
    for q in range(l + 1):
        co_lab = co.labels(q)
        ch_lab = ch.labels(q - l)
        pos = {s: j for j, s in enumerate(ch_lab)}
        blocks = {
            (pos[_complement(co.subset, s)], j): ident.signed(signs[s])
            for j, s in enumerate(co_lab)
        }
        maps[q] = Mat.from_blocks(field, [n] * len(ch_lab), [n] * len(co_lab), blocks)
    return maps


@lru_cache(maxsize=64)
def _duality_signs(field: FieldSpec, idx: Subset) -> Dict[Subset, int]:
    # read the signs off the 1-dimensional module with all operators equal to 1
    l = len(idx)
    t = _template(field, idx)
    co = koszul_cochain(t, idx)
    ch = koszul_chain(t, idx)
    ch_shifted = shift(ch, -l)
    signs: Dict[Subset, int] = {(): 1}
    for q in range(1, l + 1):
        d_co = co.getDiff(q - 1)
        d_ch = ch_shifted.getDiff(q - 1)
        for s in co.labels(q):
            rest = s[1:]
            c1 = d_co.raw(co.position(q, s), co.position(q - 1, rest))
            c2 = d_ch.raw(
                ch.position(q - l, _complement(idx, s)),
                ch.position(q - 1 - l, _complement(idx, rest)),
            )
            signs[s] = signs[rest] * _unit_sign(field, c1) * _unit_sign(field, c2)
    ChainMap(co, ch_shifted, _duality_maps(co, ch, signs, l))
    return signs


def duality_check(m: OperatorModule, subset: Iterable[int]) -> ChainMap:
    """Explicit isomorphism K^•(x_S, M) ≅ K_•(x_S, M)[-l].

    The block at S goes to the block at the complement of S with a sign.

    Raises:
        ChainMapError: If the identification fails to commute with d.
    """
    idx = normalize_subset(m, subset)
    l = len(idx)
    co = koszul_cochain(m, idx)
    ch = koszul_chain(m, idx)
    maps = _duality_maps(co, ch, _duality_signs(m.field, idx), l)
    iso = ChainMap(co, shift(ch, -l), maps)
    if not iso.is_iso():
        raise RuntimeError("Duality map is not an isomorphism")
    return iso


def hom_koszul(m: OperatorModule, subset: Iterable[int]) -> Cplx:
    """Hom_R(K_•(x_S, R), M), built by dualizing the chain template."""
    idx = normalize_subset(m, subset)
    l = len(idx)
    field = m.field
    n = m.dim
    ch = koszul_chain(_template(field, idx), idx)
    diffs = []
    for p in range(l):
        src = ch.labels(-p)
        tgt = ch.labels(-p - 1)
        d = ch.getDiff(-p - 1)
        blocks = {}
        for bi, s in enumerate(tgt):
            for bj, t in enumerate(src):
                v = d.raw(bj, bi)
                if field.is_zero(v):
                    continue
                (i,) = set(s) - set(t)
                blocks[(bi, bj)] = m.getOp(i).signed(_unit_sign(field, v))
        diffs.append(Mat.from_blocks(field, [n] * len(tgt), [n] * len(src), blocks))
    return Cplx(field, 0, [n * comb(l, p) for p in range(l + 1)], diffs)


def rhom_vs_tensor_check(m: OperatorModule, subset: Iterable[int]) -> bool:
    """Compare RHom(R/(x_S), M) with (R/(x_S) ⊗ M)[-l] by cohomology dims."""
    idx = normalize_subset(m, subset)
    l = len(idx)
    hom_side = cohomology(hom_koszul(m, idx))
    tensor_side = cohomology(shift(koszul_chain(m, idx), -l))
    ok = all(hom_side.dim(q) == tensor_side.dim(q) for q in range(-l - 1, l + 2))
    logger.debug(
        f"rhom_vs_tensor_check: {hom_side.getDims()} vs {tensor_side.getDims()}"
    )
    return ok


def zero_cone_split(c: Cplx) -> ChainMap:
    """Block identity cone(0: C -> C)[-1] -> C ⊕ C[-1]."""
    src = shift(cone(ChainMap.zero(c, c)), -1)
    tgt = direct_sum([c, shift(c, -1)])
    maps = {q: Mat.identity(c.field, src.getDim(q)) for q in src.degrees()}
    return ChainMap(src, tgt, maps)


def fibre_identification(m: OperatorModule, subset: Iterable[int], j: int) -> ChainMap:
    """Signed permutation fibre(x_j on K^•(S∖j, M)) -> K^•(S, M).

    The fibre's first summand is the sub-sum over subsets avoiding j; the
    block of the second summand at T goes to T ∪ {j} with sign
    (-1)^{#{t ∈ T : t < j}}.
    """
    idx = normalize_subset(m, subset)
    if j not in idx:
        raise ValueError(f"Index {j} is not in {idx}")
    base = tuple(i for i in idx if i != j)
    kb = koszul_cochain(m, base)
    k = koszul_cochain(m, idx)
    fib = fibre(blockwise_action(kb, m.getOp(j)))
    n = m.dim
    ident = Mat.identity(m.field, n)
    maps = {}
    for q in range(len(idx) + 1):
        a_lab = kb.labels(q)
        b_lab = kb.labels(q - 1)
        pos = {s: t for t, s in enumerate(k.labels(q))}
        blocks = {(pos[s], a): ident for a, s in enumerate(a_lab)}
        for b, t in enumerate(b_lab):
            s = tuple(sorted(t + (j,)))
            before = sum(1 for x in t if x < j)
            blocks[(pos[s], len(a_lab) + b)] = ident.signed(sign(before))
        rows = [n] * len(k.labels(q))
        cols = [n] * (len(a_lab) + len(b_lab))
        maps[q] = Mat.from_blocks(m.field, rows, cols, blocks)
    return ChainMap(fib, k, maps)


def shift_sequence(l: int) -> List[int]:
    """Shifts of the summands of C ⊕ C[-1] iterated l times, in block order."""
    seq = [0]
    for _ in range(l):
        seq = seq + [s + 1 for s in seq]
    return seq


class Decomposition(NamedTuple):
    lhs: KoszulCplx
    rhs: Cplx
    iso: ChainMap
    dim_table: Dict[str, List[int]]


def decompose(m: OperatorModule, k: int) -> Decomposition:
    """Split K^•(x_0..x_d, M) when x_k, ..., x_d act as zero.

    With C = K^•(x_0..x_{k-1}, M) and l = d-k+1 the result is an explicit
    isomorphism onto the direct sum of binomial(l, n) copies of C[-n].

    Raises:
        PreconditionError: If an operator with index >= k is nonzero.
    """
    d = m.op_count - 1
    if not isinstance(k, int) or not 1 <= k <= d + 1:
        raise ValueError(f"k should be in 1..{d + 1}")
    check_killed(m, k)
    l = d - k + 1
    field = m.field
    base = koszul_cochain(m, range(k))
    lhs = koszul_cochain(m, range(d + 1))

    psi = ChainMap.identity(base)
    for j in range(k, d + 1):
        iota = fibre_identification(m, range(j + 1), j)
        psi = direct_sum_maps([psi, shift_map(psi, -1)]).compose(iota.inverse())

    seq = shift_sequence(l)
    order = sorted(range(len(seq)), key=lambda t: seq[t])
    flat = direct_sum([shift(base, -s) for s in seq], field)
    rhs = direct_sum([shift(base, -seq[t]) for t in order], field)
    perm_maps = {}
    for q in range(rhs.lo, rhs.hi + 1):
        sizes = [base.getDim(q - s) for s in seq]
        blocks = {
            (pos, t): Mat.identity(field, sizes[t]) for pos, t in enumerate(order)
        }
        perm_maps[q] = Mat.from_blocks(field, [sizes[t] for t in order], sizes, blocks)
    perm = ChainMap(flat, rhs, perm_maps)
    iso = perm.compose(psi)
    if iso.source != lhs or not iso.is_iso():
        raise RuntimeError(
            "Decomposition map is not an isomorphism onto the expected sum"
        )

    lo, hi = 0, d + 1
    h_lhs = cohomology(lhs).dims_list(lo, hi)
    h_rhs = cohomology(rhs).dims_list(lo, hi)
    h_base = cohomology(base).dims_list(lo, hi)
    predicted = [
        sum(
            comb(l, j) * (h_base[i - j] if 0 <= i - j <= hi else 0)
            for j in range(l + 1)
        )
        for i in range(lo, hi + 1)
    ]
    dim_table = {
        "degrees": list(range(lo, hi + 1)),
        "lhs": h_lhs,
        "rhs": h_rhs,
        "base": h_base,
        "predicted": predicted,
        "multiplicities": [comb(l, n) for n in range(l + 1)],
        "killed": [l],
    }
    logger.debug(f"decompose: d={d}, k={k}, table={dim_table}")
    return Decomposition(lhs, rhs, iso, dim_table)
