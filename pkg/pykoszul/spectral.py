import logging
from typing import Dict, List, Mapping, Optional, Tuple

from pykoszul.complexes import Cplx, cohomology, sign
from pykoszul.const import Filtration
from pykoszul.exc import ComplexError, FieldMismatchError
from pykoszul.field import FieldSpec
from pykoszul.linalg import Mat, rank_profile, span_dim

logger = logging.getLogger(__name__)

Bidegree = Tuple[int, int]


class DoubleCplx:
    def __init__(
        self,
        field: FieldSpec,
        dims: Mapping[Bidegree, int],
        dh: Optional[Mapping[Bidegree, Mat]] = None,
        dv: Optional[Mapping[Bidegree, Mat]] = None,
    ) -> None:
        """A bounded double complex with anticommuting differentials.

        Args:
            field (FieldSpec): The field of all terms.
            dims (Mapping[Bidegree, int]): dim C^{p,q}; missing bidegrees are zero.
            dh (Optional[Mapping[Bidegree, Mat]]): d_h : C^{p,q} -> C^{p+1,q}.
            dv (Optional[Mapping[Bidegree, Mat]]): d_v : C^{p,q} -> C^{p,q+1}.

        Raises:
            ComplexError: If d_h^2, d_v^2 or d_h d_v + d_v d_h is nonzero.
        """
        if not isinstance(field, FieldSpec):
            raise TypeError("Invalid FieldSpec")
        self._field = field
        self._dims = {k: v for k, v in dims.items() if v}
        if any(not isinstance(v, int) or v < 0 for v in self._dims.values()):
            raise ComplexError("Dimensions should be non-negative integers")
        self._dh: Dict[Bidegree, Mat] = {}
        self._dv: Dict[Bidegree, Mat] = {}
        for store, given, step in ((self._dh, dh, (1, 0)), (self._dv, dv, (0, 1))):
            for (p, q), m in (given or {}).items():
                if m.field is not field:
                    raise FieldMismatchError(
                        f"Differential at {(p, q)} is over {m.field}"
                    )
                shape = (self.getDim(p + step[0], q + step[1]), self.getDim(p, q))
                if m.shape != shape:
                    raise ComplexError(
                        f"Differential at {(p, q)} has shape {m.shape}, "
                        f"expected {shape}"
                    )
                if not m.is_zero():
                    store[(p, q)] = m
        self._validate()

    @classmethod
    def from_commuting(
        cls,
        field: FieldSpec,
        dims: Mapping[Bidegree, int],
        dh: Optional[Mapping[Bidegree, Mat]] = None,
        dv: Optional[Mapping[Bidegree, Mat]] = None,
    ) -> "DoubleCplx":
        """Build from commuting squares by multiplying d_v in column p by (-1)^p."""
        twisted = {(p, q): m.signed(sign(p)) for (p, q), m in (dv or {}).items()}
        return cls(field, dims, dh, twisted)

    def _validate(self) -> None:
        for p, q in self.bidegrees():
            if not (self.getDh(p + 1, q) @ self.getDh(p, q)).is_zero():
                raise ComplexError(f"d_h d_h is not zero at {(p, q)}")
            if not (self.getDv(p, q + 1) @ self.getDv(p, q)).is_zero():
                raise ComplexError(f"d_v d_v is not zero at {(p, q)}")
            square = self.getDv(p + 1, q) @ self.getDh(p, q)
            square = square + self.getDh(p, q + 1) @ self.getDv(p, q)
            if not square.is_zero():
                raise ComplexError(f"d_h and d_v do not anticommute at {(p, q)}")

    @property
    def field(self) -> FieldSpec:
        return self._field

    def getDim(self, p: int, q: int) -> int:
        return self._dims.get((p, q), 0)

    def getDims(self) -> Dict[Bidegree, int]:
        return dict(self._dims)

    def getDh(self, p: int, q: int) -> Mat:
        m = self._dh.get((p, q))
        if m is None:
            return Mat.zeros(self._field, self.getDim(p + 1, q), self.getDim(p, q))
        return m

    def getDv(self, p: int, q: int) -> Mat:
        m = self._dv.get((p, q))
        if m is None:
            return Mat.zeros(self._field, self.getDim(p, q + 1), self.getDim(p, q))
        return m

    def bidegrees(self) -> List[Bidegree]:
        return sorted(self._dims)

    def p_range(self) -> range:
        ps = [p for p, _ in self._dims] or [0]
        return range(min(ps), max(ps) + 1)

    def q_range(self) -> range:
        qs = [q for _, q in self._dims] or [0]
        return range(min(qs), max(qs) + 1)

    def diameter(self) -> int:
        return len(self.p_range()) - 1

    def transpose(self) -> "DoubleCplx":
        """Swap the roles of p and q (and of d_h and d_v)."""
        return DoubleCplx(
            self._field,
            {(q, p): n for (p, q), n in self._dims.items()},
            {(q, p): m for (p, q), m in self._dv.items()},
            {(q, p): m for (p, q), m in self._dh.items()},
        )

    def __str__(self) -> str:
        return f"DoubleCplx(field={self._field}, dims={self._dims})"

    __repr__ = __str__


class _TotalLayout:
    def __init__(self, dc: DoubleCplx) -> None:
        self.dc = dc
        self.ps = dc.p_range()
        qs = dc.q_range()
        self.lo = self.ps.start + qs.start
        self.hi = self.ps.stop - 1 + qs.stop - 1

    def start(self, n: int, p: int) -> int:
        """Offset of column p inside Tot^n (columns ordered by increasing p)."""
        return sum(self.dc.getDim(s, n - s) for s in self.ps if s < p)

    def dim(self, n: int) -> int:
        return sum(self.dc.getDim(s, n - s) for s in self.ps)


def total_complex(dc: DoubleCplx) -> Cplx:
    """Tot^n = ⊕_{p+q=n} C^{p,q}, summands by increasing p, with d = d_h + d_v."""
    lay = _TotalLayout(dc)
    field = dc.field
    ps = list(lay.ps)
    diffs = []
    for n in range(lay.lo, lay.hi):
        blocks = {}
        for j, p in enumerate(ps):
            q = n - p
            blocks[(j, j)] = dc.getDv(p, q)
            if j + 1 < len(ps):
                blocks[(j + 1, j)] = dc.getDh(p, q)
        diffs.append(
            Mat.from_blocks(
                field,
                [dc.getDim(p, n + 1 - p) for p in ps],
                [dc.getDim(p, n - p) for p in ps],
                blocks,
            )
        )
    return Cplx(field, lay.lo, [lay.dim(n) for n in range(lay.lo, lay.hi + 1)], diffs)


class SpectralPage:
    def __init__(
        self, r: int, dims: Dict[Bidegree, int], ranks: Dict[Bidegree, int]
    ) -> None:
        """Page E_r: dims per bidegree and the rank of d_r leaving each bidegree."""
        self.r = r
        self.dims = dims
        self.ranks = ranks

    def getDim(self, p: int, q: int) -> int:
        return self.dims.get((p, q), 0)

    def antidiagonal(self, n: int) -> int:
        return sum(v for (p, q), v in self.dims.items() if p + q == n)

    def is_degenerate(self) -> bool:
        """True if every d_r on this page is zero."""
        return not any(self.ranks.values())

    def __str__(self) -> str:
        return f"SpectralPage(r={self.r}, dims={self.dims}, ranks={self.ranks})"


class _Filtered:
    # the filtration F^p Tot^n = columns >= p, i.e. a tail of the coordinates
    def __init__(self, dc: DoubleCplx) -> None:
        self.lay = _TotalLayout(dc)
        self.tot = total_complex(dc)
        self.field = dc.field
        self._z: Dict[Tuple[int, int, int], Mat] = {}

    def _tail(self, n: int, p: int) -> int:
        if p <= self.lay.ps.start:
            return 0
        if p >= self.lay.ps.stop:
            return self.tot.getDim(n)
        return self.lay.start(n, p)

    def z(self, r: int, p: int, n: int) -> Mat:
        """Basis of Z_r^{p,n} = {x in F^p Tot^n : dx in F^{p+r} Tot^{n+1}}.

        Z_{-1} is F^p Tot^n itself.
        """
        key = (r, p, n)
        if key in self._z:
            return self._z[key]
        total = self.tot.getDim(n)
        s = self._tail(n, p)
        free = total - s
        if r < 0:
            k = Mat.identity(self.field, free)
        else:
            rows = range(self._tail(n + 1, p + r))
            d = self.tot.getDiff(n).select(rows=rows, cols=range(s, total))
            k = rank_profile(d).kernel_basis
        basis = Mat.vstack(self.field, k.ncols, [Mat.zeros(self.field, s, k.ncols), k])
        self._z[key] = basis
        return basis

    def denominator(self, r: int, p: int, n: int) -> Mat:
        """Z_{r-1}^{p+1,n} + d Z_{r-1}^{p-r+1,n-1}, as spanning columns."""
        low = self.tot.getDiff(n - 1) @ self.z(r - 1, p - r + 1, n - 1)
        high = self.z(r - 1, p + 1, n)
        return Mat.hstack(self.field, self.tot.getDim(n), [high, low])

    def page_dim(self, r: int, p: int, n: int) -> int:
        num = self.z(r, p, n)
        den = self.denominator(r, p, n)
        return rank_profile(num).rank - span_dim(self.field, self.tot.getDim(n), [den])

    def d_rank(self, r: int, p: int, n: int) -> int:
        image = self.tot.getDiff(n) @ self.z(r, p, n)
        den = self.denominator(r, p + r, n + 1)
        nrows = self.tot.getDim(n + 1)
        both = span_dim(self.field, nrows, [image, den])
        return both - span_dim(self.field, nrows, [den])


def _column_pages(dc: DoubleCplx, r_max: int) -> List[SpectralPage]:
    filt = _Filtered(dc)
    support = [(p, q) for p in dc.p_range() for q in dc.q_range()]
    pages: List[SpectralPage] = []
    for r in range(r_max + 1):
        dims = {(p, q): filt.page_dim(r, p, p + q) for p, q in support}
        ranks = {(p, q): filt.d_rank(r, p, p + q) for p, q in support}
        page = SpectralPage(
            r,
            {k: v for k, v in dims.items() if v},
            {k: v for k, v in ranks.items() if v},
        )
        if pages:
            prev = pages[-1]
            for p, q in support:
                expected = (
                    prev.getDim(p, q)
                    - prev.ranks.get((p, q), 0)
                    - prev.ranks.get((p - r + 1, q + r - 2), 0)
                )
                if page.getDim(p, q) != expected:
                    raise RuntimeError(
                        f"E_{r} at {(p, q)} has dim {page.getDim(p, q)}, "
                        f"expected {expected} from E_{r - 1}"
                    )
        logger.debug(f"ss_pages: {page}")
        pages.append(page)
    return pages


def ss_pages(
    dc: DoubleCplx, filtration: Filtration = Filtration.columns, r_max: int = 3
) -> List[SpectralPage]:
    """Pages E_0, ..., E_{r_max} of the spectral sequence of a filtered total complex.

    With `Filtration.columns` the total complex is filtered by p, so E_1 is
    the cohomology of the columns; `Filtration.rows` filters by q. Bidegrees
    are always reported as (p, q) of the input.
    """
    if not isinstance(filtration, Filtration):
        raise TypeError("Invalid Filtration")
    if r_max < 0:
        raise ValueError("r_max should be non-negative")
    if filtration is Filtration.columns:
        return _column_pages(dc, r_max)
    pages = _column_pages(dc.transpose(), r_max)
    return [
        SpectralPage(
            pg.r,
            {(p, q): v for (q, p), v in pg.dims.items()},
            {(p, q): v for (q, p), v in pg.ranks.items()},
        )
        for pg in pages
    ]


def stable_page(dc: DoubleCplx, filtration: Filtration = Filtration.columns) -> int:
    """First page index at which a bounded double complex is certainly stationary."""
    d = dc.diameter() if filtration is Filtration.columns else dc.transpose().diameter()
    return d + 1


def e_infinity(
    dc: DoubleCplx, filtration: Filtration = Filtration.columns
) -> SpectralPage:
    return ss_pages(dc, filtration, stable_page(dc, filtration))[-1]


def convergence_check(
    dc: DoubleCplx, filtration: Filtration = Filtration.columns
) -> bool:
    """Σ_{p+q=n} dim E_∞^{p,q} = dim H^n(Tot) for every n."""
    einf = e_infinity(dc, filtration)
    tot = total_complex(dc)
    h = cohomology(tot)
    ok = all(einf.antidiagonal(n) == h.dim(n) for n in range(tot.lo - 1, tot.hi + 2))
    if not ok:
        logger.warning(f"convergence_check: E_inf {einf.dims} vs H(Tot) {h.getDims()}")
    return ok


def collapse_page(pages: List[SpectralPage]) -> Optional[int]:
    """Smallest r such that all d_s vanish for s >= r, if that happens among `pages`."""
    for i in range(len(pages)):
        if all(pg.is_degenerate() for pg in pages[i:]):
            return pages[i].r
    return None
