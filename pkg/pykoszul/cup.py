import itertools
import logging
from typing import Any, Dict, Iterable, List, Optional, Union

from pykoszul.complexes import ChainMap, cohomology, induced_map, sign
from pykoszul.const import CUP_DELTA_SIGN
from pykoszul.exc import CocycleError, PreconditionError
from pykoszul.field import FieldSpec
from pykoszul.koszul import (
    AnalyticFlags,
    KoszulCplx,
    OperatorModule,
    koszul_cochain,
)
from pykoszul.linalg import Mat, rank_profile

logger = logging.getLogger(__name__)


class CohClass:
    def __init__(self, host: KoszulCplx, degree: int, rep: Mat) -> None:
        """A cohomology class of a Koszul cochain complex, given by a cocycle.

        Raises:
            PreconditionError: If `rep` is not a cocycle.
        """
        if not isinstance(host, KoszulCplx):
            raise TypeError("Invalid KoszulCplx")
        if rep.shape != (host.getDim(degree), 1):
            raise ValueError(
                f"Representative should be a column of length {host.getDim(degree)}"
            )
        if not (host.getDiff(degree) @ rep).is_zero():
            raise PreconditionError(
                f"Representative is not a cocycle in degree {degree}"
            )
        self._host = host
        self._degree = degree
        self._rep = rep

    @property
    def host(self) -> KoszulCplx:
        return self._host

    @property
    def degree(self) -> int:
        return self._degree

    @property
    def rep(self) -> Mat:
        return self._rep

    def coordinates(self) -> Mat:
        """Coordinates in the representative basis of H^degree(host)."""
        return cohomology(self._host).coordinates(self._degree, self._rep)

    def is_zero(self) -> bool:
        return self.coordinates().is_zero()

    def __str__(self) -> str:
        return f"CohClass(degree={self._degree}, coordinates={self.coordinates()})"


def _is_trivial(m: OperatorModule) -> bool:
    return m.dim == 1 and all(op.is_zero() for op in m.getOps())


def shuffle_sign(first: tuple, second: tuple) -> int:
    """(-1)^{#{(a, b) : a ∈ first, b ∈ second, a > b}}."""
    inversions = sum(1 for a in first for b in second if a > b)
    return 1 if inversions % 2 == 0 else -1


def _product_vector(
    host: KoszulCplx,
    left: KoszulCplx,
    left_degree: int,
    left_vec: Mat,
    right: KoszulCplx,
    right_degree: int,
    right_vec: Mat,
) -> Mat:
    field = host.field
    total = left_degree + right_degree
    parts = []
    for s in host.labels(total):
        acc = Mat.zeros(field, host.module.dim, 1)
        for first in itertools.combinations(s, left_degree):
            second = tuple(i for i in s if i not in first)
            term = Mat.kron(
                left.block(left_degree, first, left_vec),
                right.block(right_degree, second, right_vec),
            )
            acc = acc + term.signed(shuffle_sign(first, second))
        parts.append(acc)
    return Mat.vstack(field, 1, parts) if parts else Mat.zeros(field, 0, 1)


def cup_cochain(
    m: OperatorModule,
    left: KoszulCplx,
    left_degree: int,
    left_vec: Mat,
    right: KoszulCplx,
    right_degree: int,
    right_vec: Mat,
) -> Mat:
    """(α∪β)_S = Σ_{S = S1 ⊔ S2} sign(S1, S2) α_{S1} β_{S2} on cochains.

    One factor lives over `m`, the other over the 1-dimensional trivial
    module; the product lives over `m`.

    Raises:
        PreconditionError: If the hosts use different operator subsets or
            neither factor is over the trivial module.
    """
    if left.subset != right.subset:
        raise PreconditionError("Incompatible hosts: operator subsets differ")
    mods = (left.module, right.module)
    if not (
        (mods[0] == m and _is_trivial(mods[1]))
        or (mods[1] == m and _is_trivial(mods[0]))
    ):
        raise PreconditionError(
            "Incompatible hosts: one factor should be over the trivial module"
        )
    host = koszul_cochain(m, left.subset)
    return _product_vector(
        host, left, left_degree, left_vec, right, right_degree, right_vec
    )


def cup_product(m: OperatorModule, alpha: CohClass, beta: CohClass) -> CohClass:
    """Cup product on Koszul cohomology with values in `m`."""
    vec = cup_cochain(
        m, alpha.host, alpha.degree, alpha.rep, beta.host, beta.degree, beta.rep
    )
    host = koszul_cochain(m, alpha.host.subset)
    return CohClass(host, alpha.degree + beta.degree, vec)


def leibniz_check(
    m: OperatorModule,
    subset: Iterable[int],
    left_degree: int,
    left_vec: Mat,
    right_degree: int,
    right_vec: Mat,
    module_first: bool = True,
) -> bool:
    """d(α∪β) = dα∪β + (-1)^|α| α∪dβ on arbitrary, not necessarily closed,
    cochains.

    With `module_first` α lives over `m` and β over the trivial module,
    otherwise the other way round.
    """
    host_m = koszul_cochain(m, subset)
    triv = OperatorModule.trivial(m.field, m.op_count, m.getLabels())
    host_t = koszul_cochain(triv, host_m.subset)
    left, right = (host_m, host_t) if module_first else (host_t, host_m)
    a, b = left_degree, right_degree
    product = cup_cochain(m, left, a, left_vec, right, b, right_vec)
    lhs = host_m.getDiff(a + b) @ product
    d_left = left.getDiff(a) @ left_vec
    d_right = right.getDiff(b) @ right_vec
    rhs = cup_cochain(m, left, a + 1, d_left, right, b, right_vec) + cup_cochain(
        m, left, a, left_vec, right, b + 1, d_right
    ).signed(sign(a))
    return lhs == rhs


class Extension(OperatorModule):
    def __init__(self, sub: OperatorModule, xi: Mat) -> None:
        """0 -> M -> E -> K -> 0 with x_i acting on E by [[x_i, ξ_i], [0, 0]]."""
        field = sub.field
        n = sub.dim
        ops = []
        for i, op in enumerate(sub.getOps()):
            xi_i = xi.select(rows=range(i * n, (i + 1) * n))
            ops.append(
                Mat.from_blocks(field, [n, 1], [n, 1], {(0, 0): op, (0, 1): xi_i})
            )
        super().__init__(field, n + 1, ops, sub.getLabels())
        self._sub = sub
        self._xi = xi

    @property
    def sub(self) -> OperatorModule:
        return self._sub

    @property
    def xi(self) -> Mat:
        return self._xi

    def quotient(self) -> OperatorModule:
        return OperatorModule.trivial(self.field, self.op_count, self.getLabels())


def extension_from_cocycle(m: OperatorModule, xi: Union[CohClass, Mat]) -> Extension:
    """Extension of the trivial module by `m` classified by a 1-cocycle over all
    operators.

    Raises:
        CocycleError: If x_i ξ_j != x_j ξ_i for some i, j.
    """
    vec = xi.rep if isinstance(xi, CohClass) else xi
    if isinstance(xi, CohClass) and (
        xi.degree != 1
        or xi.host.module != m
        or xi.host.subset != tuple(range(m.op_count))
    ):
        raise PreconditionError(
            "Expected a degree-1 class over all operators of the module"
        )
    n = m.dim
    if not isinstance(vec, Mat) or vec.shape != (n * m.op_count, 1):
        raise ValueError(f"A 1-cochain should be a column of length {n * m.op_count}")
    parts = [vec.select(rows=range(i * n, (i + 1) * n)) for i in range(m.op_count)]
    for i, j in itertools.combinations(range(m.op_count), 2):
        if m.getOp(i) @ parts[j] != m.getOp(j) @ parts[i]:
            raise CocycleError(f"x_{i} ξ_{j} != x_{j} ξ_{i}")
    return Extension(m, vec)


def connecting_map(e: Extension, v: CohClass, offset: Optional[Mat] = None) -> CohClass:
    """δ : H^q(K) -> H^{q+1}(M) of the extension, by lift, differentiate, restrict.

    `offset` is an M-valued degree-q cochain added to the lift; the class of
    the result does not depend on it.
    """
    if not isinstance(e, Extension):
        raise TypeError("Invalid Extension")
    if not _is_trivial(v.host.module):
        raise PreconditionError("v should live on the complex of the trivial quotient")
    subset = v.host.subset
    q = v.degree
    n = e.sub.dim
    field = e.field
    host_e = koszul_cochain(e, subset)
    host_m = koszul_cochain(e.sub, subset)
    count = len(v.host.labels(q))
    if offset is None:
        offset = Mat.zeros(field, n * count, 1)
    if offset.shape != (n * count, 1):
        raise ValueError(f"offset should be a column of length {n * count}")
    lift = Mat.vstack(
        field,
        1,
        [
            part
            for k in range(count)
            for part in (
                offset.select(rows=range(k * n, (k + 1) * n)),
                v.rep.select(rows=[k]),
            )
        ],
    ) if count else Mat.zeros(field, 0, 1)
    image = host_e.getDiff(q) @ lift
    labels = host_e.labels(q + 1)
    sub_rows = [k * (n + 1) + r for k in range(len(labels)) for r in range(n)]
    quotient_rows = [k * (n + 1) + n for k in range(len(labels))]
    if not image.select(rows=quotient_rows).is_zero():
        raise RuntimeError("Lift does not differentiate into the submodule")
    return CohClass(host_m, q + 1, image.select(rows=sub_rows))


def cup_equals_delta_check(m: OperatorModule, xi: CohClass, v: CohClass) -> bool:
    """ξ ∪ v = CUP_DELTA_SIGN · δ(v) in cohomology coordinates."""
    e = extension_from_cocycle(m, xi)
    delta = connecting_map(e, v)
    cup = cup_product(m, xi, v)
    ok = delta.coordinates() == cup.coordinates().signed(CUP_DELTA_SIGN)
    if not ok:
        logger.warning(f"cup_equals_delta_check: δ(v)={delta}, ξ∪v={cup}")
    return ok


def _unit_class(host: KoszulCplx, j: int) -> CohClass:
    # e_j: the dual of the j-th operator in degree 1 of the trivial module's complex
    field = host.field
    pos = host.position(1, (j,))
    values = [field.one() if k == pos else field.zero() for k in range(host.getDim(1))]
    return CohClass(host, 1, Mat.column_vector(field, values))


def _columns(field: FieldSpec, nrows: int, classes: List[Mat]) -> Mat:
    return Mat.hstack(field, nrows, classes) if classes else Mat.zeros(field, nrows, 0)


def pairing_report(m: OperatorModule, flags: AnalyticFlags) -> Dict[str, Any]:
    """Cup pairing H^1_an(M) × H^1_cts(K) -> H^2_cts(M) and the kernel mechanisms.

    For each basis class ξ of H^1_an(M), pushed into H^1_cts(M) by extension
    by zero, reports δ_ξ on H^1_cts(K) and checks
    (a) exactness of H^1(E) -> H^1(K) -> H^2(M) at H^1(K), and
    (b) the factorization of δ_ξ on H^1_an(K) through H^2_an(M).
    """
    flags.check(m)
    if flags.analytic_from != 2:
        raise PreconditionError(
            "pairing_report needs an analytic instance (analytic_from=2)"
        )
    field = m.field
    d = flags.d
    everything = list(range(d + 1))
    triv = OperatorModule.trivial(field, m.op_count, m.getLabels())
    k_an = koszul_cochain(m, [0, 1])
    k_cts = koszul_cochain(m, everything)
    t_an = koszul_cochain(triv, [0, 1])
    t_cts = koszul_cochain(triv, everything)
    h_an = cohomology(k_an)
    h_cts = cohomology(k_cts)

    # extension by zero K^•(x_0, x_1, M) -> K^•(x_0..x_d, M)
    n = m.dim
    incl = {}
    for q in range(3):
        blocks = {
            (k_cts.position(q, s), j): Mat.identity(field, n)
            for j, s in enumerate(k_an.labels(q))
        }
        sizes_cts = [n] * len(k_cts.labels(q))
        sizes_an = [n] * len(k_an.labels(q))
        incl[q] = Mat.from_blocks(field, sizes_cts, sizes_an, blocks)
    iota = ChainMap(k_an, k_cts, incl)
    iota_2 = induced_map(iota, 2)

    xis = h_an.representatives(1)
    h2 = h_cts.dim(2)
    classes = []
    pairing_cols: List[Mat] = []
    all_factor, all_contained, all_exact = True, True, True
    for a in range(xis.ncols):
        xi_an = CohClass(k_an, 1, xis.column(a))
        xi = CohClass(k_cts, 1, incl[1] @ xis.column(a))
        e = extension_from_cocycle(m, xi)
        cols = [
            connecting_map(e, _unit_class(t_cts, j)).coordinates() for j in everything
        ]
        delta = _columns(field, h2, cols)
        rank = rank_profile(delta).rank

        # (b) on e_0, e_1: δ_ξ(v) = ι_*(ξ ∪_an v)
        factors = all(
            cols[j]
            == iota_2 @ cup_product(m, xi_an, _unit_class(t_an, j)).coordinates()
            for j in (0, 1)
        )
        contained = cols[0].is_zero() and cols[1].is_zero()

        # (a) H^1(E) -> H^1(K) -> H^2(M)
        k_e = koszul_cochain(e, everything)
        proj = {}
        for q in k_e.degrees():
            count = len(k_e.labels(q))
            rows = [[field.zero()] * ((n + 1) * count) for _ in range(count)]
            for k in range(count):
                rows[k][k * (n + 1) + n] = field.one()
            proj[q] = Mat(field, count, (n + 1) * count, rows)
        # the unit classes are the representative basis of H^1(K)
        p_star = induced_map(ChainMap(k_e, t_cts, proj), 1)
        exact = (delta @ p_star).is_zero() and (
            rank_profile(p_star).rank + rank == cohomology(t_cts).dim(1)
        )

        all_factor = all_factor and factors
        all_contained = all_contained and contained
        all_exact = all_exact and exact
        pairing_cols.extend(cols[2:])
        classes.append(
            {
                "delta_rank": rank,
                "kernel_dim": len(everything) - rank,
                "factorization": factors,
                "analytic_in_kernel": contained,
                "les_exact": exact,
                "pairing": [
                    [field.format(x) for x in c.column_values(0)] for c in cols[2:]
                ],
            }
        )

    h2_an = h_an.dim(2)
    pairing = _columns(field, h2, pairing_cols)
    record = {
        "d": d,
        "h1_an": h_an.dim(1),
        "h2_an": h2_an,
        "h1_cts_trivial": cohomology(t_cts).dim(1),
        "h2_cts": h2,
        "classes": classes,
        "pairing_rank": rank_profile(pairing).rank,
        "note": (
            "nondegeneracy and surjectivity need H^0 = H^2_an = 0 with H^1_an != 0, "
            "impossible for finite-dimensional models (Euler characteristic 0); "
            "not desk-reproducible"
        ),
        "passed": all_factor and all_exact and (all_contained or h2_an != 0),
    }
    logger.debug(f"pairing_report: {record}")
    return record
