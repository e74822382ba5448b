import logging
from typing import Dict, List, Mapping, Optional, Sequence

from pykoszul.exc import (
    ChainMapError,
    ComplexError,
    FieldMismatchError,
    PreconditionError,
)
from pykoszul.field import FieldSpec
from pykoszul.linalg import Mat, inverse, rank_profile, solve_linear

logger = logging.getLogger(__name__)


def sign(q: int) -> int:
    """(-1)^q for any integer q."""
    return 1 if q % 2 == 0 else -1


class Cplx:
    def __init__(
        self, field: FieldSpec, lo: int, dims: Sequence[int], diffs: Sequence[Mat]
    ) -> None:
        """A bounded cochain complex C^lo -> ... -> C^hi of finite-dimensional spaces.

        Args:
            field (FieldSpec): The field of all terms.
            lo (int): Lowest degree.
            dims (Sequence[int]): dim C^q for q = lo, ..., hi.
            diffs (Sequence[Mat]): d^q : C^q -> C^{q+1} for q = lo, ..., hi-1,
                as matrices of shape dims[q+1] x dims[q].

        Raises:
            ComplexError: If shapes disagree or d^{q+1} d^q != 0.
        """
        if not isinstance(field, FieldSpec):
            raise TypeError("Invalid FieldSpec")
        if not dims:
            raise ComplexError("A complex needs at least one degree")
        if any(not isinstance(n, int) or n < 0 for n in dims):
            raise ComplexError("Dimensions should be non-negative integers")
        if len(diffs) != len(dims) - 1:
            raise ComplexError(
                f"Expected {len(dims) - 1} differentials, got {len(diffs)}"
            )
        self._field = field
        self._lo = lo
        self._dims = tuple(dims)
        self._diffs = tuple(diffs)
        self._cohomology: Optional["Cohomology"] = None

        for k, d in enumerate(self._diffs):
            if d.field is not field:
                raise FieldMismatchError(
                    f"Differential d^{lo + k} is over {d.field}, not {field}"
                )
            if d.shape != (self._dims[k + 1], self._dims[k]):
                expected = (self._dims[k + 1], self._dims[k])
                raise ComplexError(
                    f"d^{lo + k} has shape {d.shape}, expected {expected}"
                )
        for k in range(len(self._diffs) - 1):
            if not (self._diffs[k + 1] @ self._diffs[k]).is_zero():
                raise ComplexError(f"d^{lo + k + 1} d^{lo + k} is not zero")

    @classmethod
    def zero(cls, field: FieldSpec) -> "Cplx":
        return cls(field, 0, [0], [])

    @classmethod
    def concentrated(cls, field: FieldSpec, dim: int, degree: int = 0) -> "Cplx":
        """K^dim placed in a single degree."""
        return cls(field, degree, [dim], [])

    @property
    def field(self) -> FieldSpec:
        return self._field

    @property
    def lo(self) -> int:
        return self._lo

    @property
    def hi(self) -> int:
        return self._lo + len(self._dims) - 1

    def degrees(self) -> range:
        return range(self.lo, self.hi + 1)

    def getDim(self, q: int) -> int:
        if self.lo <= q <= self.hi:
            return self._dims[q - self._lo]
        return 0

    def getDims(self) -> Dict[int, int]:
        return {q: self.getDim(q) for q in self.degrees()}

    def getDiff(self, q: int) -> Mat:
        """d^q : C^q -> C^{q+1}, a zero matrix outside the stored range."""
        if self.lo <= q < self.hi:
            return self._diffs[q - self._lo]
        return Mat.zeros(self._field, self.getDim(q + 1), self.getDim(q))

    def total_dim(self) -> int:
        return sum(self._dims)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Cplx):
            return NotImplemented
        if other._field is not self._field:
            return False
        lo = min(self.lo, other.lo)
        hi = max(self.hi, other.hi)
        return all(
            self.getDim(q) == other.getDim(q) and self.getDiff(q) == other.getDiff(q)
            for q in range(lo, hi + 1)
        )

    __hash__ = None  # type: ignore

    def __str__(self) -> str:
        dims = ", ".join(f"{q}: {n}" for q, n in self.getDims().items())
        return f"Cplx(field={self._field}, dims={{{dims}}})"

    __repr__ = __str__


class ChainMap:
    def __init__(self, source: Cplx, target: Cplx, maps: Mapping[int, Mat]) -> None:
        """A degree-0 chain map f : source -> target.

        Args:
            source (Cplx): The source complex.
            target (Cplx): The target complex.
            maps (Mapping[int, Mat]): f^q of shape target^q x source^q; missing
                degrees are zero.

        Raises:
            ChainMapError: If a shape is wrong or d f != f d in some degree.
        """
        if not isinstance(source, Cplx) or not isinstance(target, Cplx):
            raise TypeError("Invalid Cplx")
        if source.field is not target.field:
            raise FieldMismatchError("Source and target live over different fields")
        self._source = source
        self._target = target
        self._lo = min(source.lo, target.lo)
        self._hi = max(source.hi, target.hi)
        self._maps: Dict[int, Mat] = {}
        for q in range(self._lo, self._hi + 1):
            shape = (target.getDim(q), source.getDim(q))
            m = maps.get(q)
            if m is None:
                m = Mat.zeros(source.field, *shape)
            if m.field is not source.field:
                raise FieldMismatchError(f"f^{q} is over {m.field}")
            if m.shape != shape:
                raise ChainMapError(f"f^{q} has shape {m.shape}, expected {shape}")
            self._maps[q] = m
        for q in range(self._lo - 1, self._hi + 1):
            lhs = target.getDiff(q) @ self.getMap(q)
            if lhs != self.getMap(q + 1) @ source.getDiff(q):
                raise ChainMapError(f"Chain map does not commute with d in degree {q}")

    @classmethod
    def identity(cls, c: Cplx) -> "ChainMap":
        return cls(c, c, {q: Mat.identity(c.field, c.getDim(q)) for q in c.degrees()})

    @classmethod
    def zero(cls, source: Cplx, target: Cplx) -> "ChainMap":
        return cls(source, target, {})

    @property
    def source(self) -> Cplx:
        return self._source

    @property
    def target(self) -> Cplx:
        return self._target

    def getMap(self, q: int) -> Mat:
        m = self._maps.get(q)
        if m is None:
            return Mat.zeros(
                self._source.field, self._target.getDim(q), self._source.getDim(q)
            )
        return m

    def compose(self, other: "ChainMap") -> "ChainMap":
        """Return self ∘ other."""
        if other.target != self.source:
            raise ChainMapError("Cannot compose: target and source differ")
        lo = min(other.source.lo, self.target.lo)
        hi = max(other.source.hi, self.target.hi)
        return ChainMap(
            other.source,
            self.target,
            {q: self.getMap(q) @ other.getMap(q) for q in range(lo, hi + 1)},
        )

    def is_iso(self) -> bool:
        for q in range(self._lo, self._hi + 1):
            m = self.getMap(q)
            if not m.is_square() or rank_profile(m).rank != m.nrows:
                return False
        return True

    def inverse(self) -> "ChainMap":
        maps = {}
        for q in range(self._lo, self._hi + 1):
            inv = inverse(self.getMap(q))
            if inv is None:
                raise ChainMapError(f"f^{q} is not invertible")
            maps[q] = inv
        return ChainMap(self._target, self._source, maps)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ChainMap):
            return NotImplemented
        if other.source != self.source or other.target != self.target:
            return False
        return all(
            self.getMap(q) == other.getMap(q) for q in range(self._lo, self._hi + 1)
        )

    __hash__ = None  # type: ignore


def cone(f: ChainMap) -> Cplx:
    """Mapping cone: cone(f)^q = A^{q+1} ⊕ B^q, d(a, b) = (-d a, f a + d b)."""
    a, b = f.source, f.target
    lo = min(a.lo - 1, b.lo)
    hi = max(a.hi - 1, b.hi)
    field = a.field
    dims = [a.getDim(q + 1) + b.getDim(q) for q in range(lo, hi + 1)]
    diffs = []
    for q in range(lo, hi):
        diffs.append(
            Mat.from_blocks(
                field,
                [a.getDim(q + 2), b.getDim(q + 1)],
                [a.getDim(q + 1), b.getDim(q)],
                {
                    (0, 0): -a.getDiff(q + 1),
                    (1, 0): f.getMap(q + 1),
                    (1, 1): b.getDiff(q),
                },
            )
        )
    return Cplx(field, lo, dims, diffs)


def fibre(f: ChainMap) -> Cplx:
    """Mapping fibre: fib(f)^q = A^q ⊕ B^{q-1}, d(a, b) = (d a, f a - d b)."""
    a, b = f.source, f.target
    lo = min(a.lo, b.lo + 1)
    hi = max(a.hi, b.hi + 1)
    field = a.field
    dims = [a.getDim(q) + b.getDim(q - 1) for q in range(lo, hi + 1)]
    diffs = []
    for q in range(lo, hi):
        diffs.append(
            Mat.from_blocks(
                field,
                [a.getDim(q + 1), b.getDim(q)],
                [a.getDim(q), b.getDim(q - 1)],
                {(0, 0): a.getDiff(q), (1, 0): f.getMap(q), (1, 1): -b.getDiff(q - 1)},
            )
        )
    return Cplx(field, lo, dims, diffs)


def fibre_map(
    f: ChainMap, g: ChainMap, on_source: ChainMap, on_target: ChainMap
) -> ChainMap:
    """Map fibre(f) -> fibre(g) induced by a commuting square.

    `on_source` goes from f.source to g.source and `on_target` from f.target
    to g.target; the square must commute for the result to be a chain map.
    """
    src, tgt = fibre(f), fibre(g)
    field = src.field
    maps = {
        q: Mat.block_diag(field, [on_source.getMap(q), on_target.getMap(q - 1)])
        for q in range(min(src.lo, tgt.lo), max(src.hi, tgt.hi) + 1)
    }
    return ChainMap(src, tgt, maps)


def shift(c: Cplx, n: int) -> Cplx:
    """Return C[n], with C[n]^q = C^{q+n} and differential (-1)^n d.

    In particular H^i(C[-n]) = H^{i-n}(C).
    """
    s = sign(n)
    return Cplx(
        c.field,
        c.lo - n,
        [c.getDim(q) for q in c.degrees()],
        [c.getDiff(q).signed(s) for q in range(c.lo, c.hi)],
    )


def shift_map(f: ChainMap, n: int) -> ChainMap:
    src, tgt = shift(f.source, n), shift(f.target, n)
    lo = min(src.lo, tgt.lo)
    hi = max(src.hi, tgt.hi)
    return ChainMap(src, tgt, {q: f.getMap(q + n) for q in range(lo, hi + 1)})


def direct_sum(cs: Sequence[Cplx], field: Optional[FieldSpec] = None) -> Cplx:
    """Degreewise direct sum, summands stacked in list order.

    Raises:
        FieldMismatchError: If the summands live over different fields.
    """
    if not cs:
        if field is None:
            raise ValueError("The field of an empty direct sum should be given")
        return Cplx.zero(field)
    field = cs[0].field if field is None else field
    for c in cs:
        if c.field is not field:
            raise FieldMismatchError(f"Summand over {c.field} in a sum over {field}")
    lo = min(c.lo for c in cs)
    hi = max(c.hi for c in cs)
    dims = [sum(c.getDim(q) for c in cs) for q in range(lo, hi + 1)]
    diffs = [Mat.block_diag(field, [c.getDiff(q) for c in cs]) for q in range(lo, hi)]
    return Cplx(field, lo, dims, diffs)


def direct_sum_maps(fs: Sequence[ChainMap]) -> ChainMap:
    if not fs:
        raise ValueError("At least one chain map is needed")
    src = direct_sum([f.source for f in fs])
    tgt = direct_sum([f.target for f in fs])
    lo = min(src.lo, tgt.lo)
    hi = max(src.hi, tgt.hi)
    maps = {}
    for q in range(lo, hi + 1):
        maps[q] = Mat.block_diag(src.field, [f.getMap(q) for f in fs])
    return ChainMap(src, tgt, maps)


class Cohomology:
    def __init__(self, c: Cplx) -> None:
        """Cohomology of a complex with explicit representatives.

        For each degree the representatives extend a basis of the coboundaries
        to a basis of the cocycles; they are columns in the coordinates of C^q.
        """
        self._complex = c
        field = c.field
        profiles = {q: rank_profile(c.getDiff(q)) for q in range(c.lo - 1, c.hi + 1)}
        self._dims: Dict[int, int] = {}
        self._reps: Dict[int, Mat] = {}
        self._bounds: Dict[int, Mat] = {}
        for q in c.degrees():
            z = profiles[q].kernel_basis
            b = profiles[q - 1].image_basis
            combined = Mat.hstack(field, c.getDim(q), [b, z])
            pivots = rank_profile(combined).pivot_cols
            picked = [j - b.ncols for j in pivots if j >= b.ncols]
            reps = z.select(cols=picked)
            if len(picked) != z.ncols - b.ncols:
                raise RuntimeError(f"Cohomology bookkeeping failed in degree {q}")
            self._dims[q] = len(picked)
            self._reps[q] = reps
            self._bounds[q] = b
        logger.debug(f"cohomology: {c} has h = {self._dims}")

    @property
    def complex(self) -> Cplx:
        return self._complex

    def getDims(self) -> Dict[int, int]:
        return dict(self._dims)

    def dim(self, q: int) -> int:
        return self._dims.get(q, 0)

    def dims_list(self, lo: int, hi: int) -> List[int]:
        return [self.dim(q) for q in range(lo, hi + 1)]

    def representatives(self, q: int) -> Mat:
        if q in self._reps:
            return self._reps[q]
        return Mat.zeros(self._complex.field, self._complex.getDim(q), 0)

    def boundaries(self, q: int) -> Mat:
        if q in self._bounds:
            return self._bounds[q]
        return Mat.zeros(self._complex.field, self._complex.getDim(q), 0)

    def coordinates(self, q: int, v: Mat) -> Mat:
        """Express cocycles (columns of `v`) in the representative basis.

        Raises:
            PreconditionError: If a column of `v` is not a cocycle.
        """
        field = self._complex.field
        h = self.dim(q)
        if v.nrows != self._complex.getDim(q):
            raise ValueError(
                f"Vector has {v.nrows} coordinates, C^{q} has {self._complex.getDim(q)}"
            )
        basis = Mat.hstack(
            field, v.nrows, [self.representatives(q), self.boundaries(q)]
        )
        x = solve_linear(basis, v)
        if x is None:
            raise PreconditionError(f"Not a cocycle in degree {q}")
        return x.select(rows=range(h))


def cohomology(c: Cplx) -> Cohomology:
    """Compute (and cache on the complex) its cohomology."""
    if c._cohomology is None:
        c._cohomology = Cohomology(c)
    return c._cohomology


def euler_char(c: Cplx) -> int:
    chi = sum(sign(q) * h for q, h in cohomology(c).getDims().items())
    chain_chi = sum(sign(q) * n for q, n in c.getDims().items())
    if chi != chain_chi:
        raise RuntimeError(f"Euler characteristic mismatch: {chi} != {chain_chi}")
    return chi


def induced_map(f: ChainMap, q: int) -> Mat:
    """Matrix of H^q(f) in the representative bases."""
    src = cohomology(f.source)
    tgt = cohomology(f.target)
    return tgt.coordinates(q, f.getMap(q) @ src.representatives(q))


class QuasiIsoReport:
    def __init__(
        self,
        induced: Dict[int, Mat],
        ranks: Dict[int, int],
        source_dims: Dict[int, int],
        target_dims: Dict[int, int],
    ) -> None:
        self.induced = induced
        self.ranks = ranks
        self.source_dims = source_dims
        self.target_dims = target_dims

    def isQuasiIso(self) -> bool:
        return all(
            self.source_dims[q] == self.target_dims[q] == self.ranks[q]
            for q in self.ranks
        )

    def __bool__(self) -> bool:
        return self.isQuasiIso()

    def __str__(self) -> str:
        return f"QuasiIsoReport(quasi_iso={self.isQuasiIso()}, ranks={self.ranks})"


def is_quasi_iso(f: ChainMap) -> QuasiIsoReport:
    src = cohomology(f.source)
    tgt = cohomology(f.target)
    lo = min(f.source.lo, f.target.lo)
    hi = max(f.source.hi, f.target.hi)
    induced, ranks = {}, {}
    for q in range(lo, hi + 1):
        induced[q] = induced_map(f, q)
        ranks[q] = rank_profile(induced[q]).rank
    return QuasiIsoReport(
        induced,
        ranks,
        {q: src.dim(q) for q in range(lo, hi + 1)},
        {q: tgt.dim(q) for q in range(lo, hi + 1)},
    )


def cone_les_check(f: ChainMap) -> bool:
    """Check exactness of H(A) -> H(B) -> H(cone f) -> H(A[1]) -> ... by ranks."""
    a, b = f.source, f.target
    c = cone(f)
    field = a.field
    ha, hb, hc = cohomology(a), cohomology(b), cohomology(c)

    def incl(q: int) -> Mat:
        return Mat.vstack(
            field,
            b.getDim(q),
            [
                Mat.zeros(field, a.getDim(q + 1), b.getDim(q)),
                Mat.identity(field, b.getDim(q)),
            ],
        )

    def proj(q: int) -> Mat:
        return Mat.hstack(
            field,
            a.getDim(q + 1),
            [
                Mat.identity(field, a.getDim(q + 1)),
                Mat.zeros(field, a.getDim(q + 1), b.getDim(q)),
            ],
        )

    lo = min(a.lo, b.lo, c.lo) - 1
    hi = max(a.hi, b.hi, c.hi) + 1
    fs = {q: induced_map(f, q) for q in range(lo, hi + 2)}
    degrees = range(lo, hi + 1)
    ins = {q: hc.coordinates(q, incl(q) @ hb.representatives(q)) for q in degrees}
    ps = {q: ha.coordinates(q + 1, proj(q) @ hc.representatives(q)) for q in degrees}

    def rk(m: Mat) -> int:
        return rank_profile(m).rank

    for q in range(lo, hi + 1):
        checks = [
            ((ins[q] @ fs[q]).is_zero(), rk(fs[q]) + rk(ins[q]) == hb.dim(q)),
            ((ps[q] @ ins[q]).is_zero(), rk(ins[q]) + rk(ps[q]) == hc.dim(q)),
            ((fs[q + 1] @ ps[q]).is_zero(), rk(ps[q]) + rk(fs[q + 1]) == ha.dim(q + 1)),
        ]
        for composite_zero, ranks_add_up in checks:
            if not (composite_zero and ranks_add_up):
                logger.debug(f"cone_les_check: exactness fails around degree {q}")
                return False
    return True
