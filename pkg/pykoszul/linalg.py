import logging
from fractions import Fraction
from math import gcd
from typing import (
    Callable,
    Dict,
    Iterable,
    List,
    Mapping,
    NamedTuple,
    Optional,
    Sequence,
    Tuple,
)

from pykoszul.const import FieldKind
from pykoszul.exc import FieldMismatchError, UnsupportedAutomorphismError
from pykoszul.field import FieldSpec, Raw, Scalar, ScalarLike

logger = logging.getLogger(__name__)


class Mat:
    __slots__ = ("_field", "_nrows", "_ncols", "_rows")

    def __init__(
        self,
        field: FieldSpec,
        nrows: int,
        ncols: int,
        rows: Optional[Iterable[Sequence[Raw]]] = None,
    ) -> None:
        """A dense matrix of raw field values.

        Use `Mat.from_entries` or `Mat.from_scalars` for user input; this
        constructor trusts `rows` to hold raw values of `field`.

        Args:
            field (FieldSpec): The field of the entries.
            nrows (int): Number of rows.
            ncols (int): Number of columns.
            rows (Optional[Iterable[Sequence[Raw]]]): Row-major raw entries,
                zero if omitted.
        """
        if not isinstance(field, FieldSpec):
            raise TypeError("Invalid FieldSpec")
        if nrows < 0 or ncols < 0:
            raise ValueError("Matrix dimensions should be non-negative")
        self._field = field
        self._nrows = nrows
        self._ncols = ncols
        if rows is None:
            z = field.zero()
            self._rows: Tuple[Tuple[Raw, ...], ...] = tuple(
                (z,) * ncols for _ in range(nrows)
            )
        else:
            self._rows = tuple(tuple(r) for r in rows)
            if len(self._rows) != nrows or any(len(r) != ncols for r in self._rows):
                raise ValueError(f"Entries do not form a {nrows}x{ncols} matrix")

    @classmethod
    def from_entries(
        cls,
        field: FieldSpec,
        rows: Sequence[Sequence[ScalarLike]],
        ncols: Optional[int] = None,
    ) -> "Mat":
        """Build a matrix from ints, Fractions, strings or Scalars."""
        if ncols is None:
            ncols = len(rows[0]) if rows else 0
        entries = [[field.coerce(x) for x in r] for r in rows]
        return cls(field, len(rows), ncols, entries)

    @classmethod
    def from_scalars(cls, rows: Sequence[Sequence[Scalar]]) -> "Mat":
        """Build a matrix from Scalars that must all share one field.

        Raises:
            FieldMismatchError: If the entries come from different fields.
        """
        fields = {id(x.field): x.field for r in rows for x in r}
        if not fields:
            raise ValueError("Cannot infer the field of an empty matrix")
        if len(fields) > 1:
            raise FieldMismatchError("Matrix entries come from different fields")
        (field,) = fields.values()
        return cls.from_entries(field, rows)

    @classmethod
    def zeros(cls, field: FieldSpec, nrows: int, ncols: int) -> "Mat":
        return cls(field, nrows, ncols)

    @classmethod
    def identity(cls, field: FieldSpec, n: int) -> "Mat":
        z, o = field.zero(), field.one()
        entries = [[o if i == j else z for j in range(n)] for i in range(n)]
        return cls(field, n, n, entries)

    @classmethod
    def diagonal(cls, field: FieldSpec, values: Sequence[Raw]) -> "Mat":
        n = len(values)
        z = field.zero()
        entries = [[values[i] if i == j else z for j in range(n)] for i in range(n)]
        return cls(field, n, n, entries)

    @classmethod
    def column_vector(cls, field: FieldSpec, values: Sequence[Raw]) -> "Mat":
        return cls(field, len(values), 1, [[v] for v in values])

    @property
    def field(self) -> FieldSpec:
        return self._field

    @property
    def nrows(self) -> int:
        return self._nrows

    @property
    def ncols(self) -> int:
        return self._ncols

    @property
    def shape(self) -> Tuple[int, int]:
        return self._nrows, self._ncols

    def raw(self, i: int, j: int) -> Raw:
        return self._rows[i][j]

    def row(self, i: int) -> Tuple[Raw, ...]:
        return self._rows[i]

    def raw_rows(self) -> Tuple[Tuple[Raw, ...], ...]:
        return self._rows

    def entry(self, i: int, j: int) -> Scalar:
        return Scalar(self._field, self._rows[i][j])

    def column(self, j: int) -> "Mat":
        return Mat(self._field, self._nrows, 1, [[r[j]] for r in self._rows])

    def column_values(self, j: int) -> Tuple[Raw, ...]:
        return tuple(r[j] for r in self._rows)

    def _check(self, other: "Mat") -> None:
        if not isinstance(other, Mat):
            raise TypeError("Invalid Mat")
        if other._field is not self._field:
            raise FieldMismatchError(
                f"Cannot combine matrices over {self._field} and {other._field}"
            )

    def __matmul__(self, other: "Mat") -> "Mat":
        self._check(other)
        if self._ncols != other._nrows:
            raise ValueError(f"Shapes {self.shape} and {other.shape} do not compose")
        f = self._field
        cols = list(zip(*other._rows)) if other._nrows else [()] * other._ncols
        z = f.zero()
        rows = []
        for r in self._rows:
            if not any(not f.is_zero(x) for x in r):
                rows.append((z,) * other._ncols)
            else:
                rows.append(tuple(f.dot(r, c) for c in cols))
        return Mat(f, self._nrows, other._ncols, rows)

    def __add__(self, other: "Mat") -> "Mat":
        self._check(other)
        if self.shape != other.shape:
            raise ValueError(f"Shapes {self.shape} and {other.shape} differ")
        f = self._field
        return Mat(
            f,
            self._nrows,
            self._ncols,
            [
                [f.add(a, b) for a, b in zip(r, s)]
                for r, s in zip(self._rows, other._rows)
            ],
        )

    def __sub__(self, other: "Mat") -> "Mat":
        self._check(other)
        if self.shape != other.shape:
            raise ValueError(f"Shapes {self.shape} and {other.shape} differ")
        f = self._field
        return Mat(
            f,
            self._nrows,
            self._ncols,
            [
                [f.sub(a, b) for a, b in zip(r, s)]
                for r, s in zip(self._rows, other._rows)
            ],
        )

    def __neg__(self) -> "Mat":
        return self.map_raw(self._field.neg)

    def scale(self, c: ScalarLike) -> "Mat":
        f = self._field
        v = f.coerce(c)
        return self.map_raw(lambda x: f.mul(v, x))

    def signed(self, sign: int) -> "Mat":
        return self if sign > 0 else -self

    def map_raw(self, fn: Callable[[Raw], Raw]) -> "Mat":
        entries = [[fn(x) for x in r] for r in self._rows]
        return Mat(self._field, self._nrows, self._ncols, entries)

    def transpose(self) -> "Mat":
        if not self._nrows:
            return Mat(self._field, self._ncols, 0)
        return Mat(self._field, self._ncols, self._nrows, list(zip(*self._rows)))

    @property
    def T(self) -> "Mat":
        return self.transpose()

    def select(
        self, rows: Optional[Sequence[int]] = None, cols: Optional[Sequence[int]] = None
    ) -> "Mat":
        rsel = range(self._nrows) if rows is None else rows
        csel = range(self._ncols) if cols is None else cols
        return Mat(
            self._field,
            len(rsel),
            len(csel),
            [[self._rows[i][j] for j in csel] for i in rsel],
        )

    def is_zero(self) -> bool:
        f = self._field
        return all(f.is_zero(x) for r in self._rows for x in r)

    def is_square(self) -> bool:
        return self._nrows == self._ncols

    def commutes_with(self, other: "Mat") -> bool:
        return self @ other == other @ self

    def rank(self) -> int:
        return rank_profile(self).rank

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Mat):
            return NotImplemented
        return (
            other._field is self._field
            and other.shape == self.shape
            and other._rows == self._rows
        )

    __hash__ = None  # type: ignore

    def __repr__(self) -> str:
        return f"Mat({self._nrows}x{self._ncols} over {self._field})"

    def __str__(self) -> str:
        f = self._field
        rows = ("[" + ", ".join(f.format(x) for x in r) + "]" for r in self._rows)
        return "[" + ", ".join(rows) + "]"

    @staticmethod
    def hstack(field: FieldSpec, nrows: int, mats: Sequence["Mat"]) -> "Mat":
        for m in mats:
            if m._field is not field:
                raise FieldMismatchError("Cannot stack matrices over different fields")
            if m._nrows != nrows:
                raise ValueError("Row counts differ in hstack")
        ncols = sum(m._ncols for m in mats)
        rows = [sum((m._rows[i] for m in mats), ()) for i in range(nrows)]
        return Mat(field, nrows, ncols, rows)

    @staticmethod
    def vstack(field: FieldSpec, ncols: int, mats: Sequence["Mat"]) -> "Mat":
        for m in mats:
            if m._field is not field:
                raise FieldMismatchError("Cannot stack matrices over different fields")
            if m._ncols != ncols:
                raise ValueError("Column counts differ in vstack")
        rows = [r for m in mats for r in m._rows]
        return Mat(field, len(rows), ncols, rows)

    @staticmethod
    def from_blocks(
        field: FieldSpec,
        row_sizes: Sequence[int],
        col_sizes: Sequence[int],
        blocks: Mapping[Tuple[int, int], "Mat"],
    ) -> "Mat":
        """Assemble a block matrix; missing blocks are zero."""
        row_off = [0]
        for s in row_sizes:
            row_off.append(row_off[-1] + s)
        col_off = [0]
        for s in col_sizes:
            col_off.append(col_off[-1] + s)
        z = field.zero()
        data = [[z] * col_off[-1] for _ in range(row_off[-1])]
        for (bi, bj), m in blocks.items():
            if m._field is not field:
                raise FieldMismatchError("Block over a different field")
            if m.shape != (row_sizes[bi], col_sizes[bj]):
                raise ValueError(
                    f"Block ({bi}, {bj}) has shape {m.shape}, "
                    f"expected {(row_sizes[bi], col_sizes[bj])}"
                )
            r0, c0 = row_off[bi], col_off[bj]
            for i, r in enumerate(m._rows):
                data[r0 + i][c0 : c0 + m._ncols] = r
        return Mat(field, row_off[-1], col_off[-1], data)

    @staticmethod
    def block_diag(field: FieldSpec, mats: Sequence["Mat"]) -> "Mat":
        return Mat.from_blocks(
            field,
            [m.nrows for m in mats],
            [m.ncols for m in mats],
            {(i, i): m for i, m in enumerate(mats)},
        )

    @staticmethod
    def kron(a: "Mat", b: "Mat") -> "Mat":
        a._check(b)
        f = a._field
        rows = []
        for ra in a._rows:
            for rb in b._rows:
                rows.append([f.mul(x, y) for x in ra for y in rb])
        return Mat(f, a._nrows * b._nrows, a._ncols * b._ncols, rows)

    def kron_identity(self, k: int) -> "Mat":
        """Return I_k ⊗ self, i.e. k diagonal copies of self."""
        return Mat.block_diag(self._field, [self] * k)


class RankProfile(NamedTuple):
    rank: int
    pivot_cols: Tuple[int, ...]
    kernel_basis: Mat
    image_basis: Mat


def _bareiss_echelon(
    rows: List[List[int]], ncols: int
) -> Tuple[List[List[int]], List[int]]:
    # fraction-free forward elimination; every division below is exact
    m = [list(r) for r in rows]
    nrows = len(m)
    pivots: List[int] = []
    prev = 1
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pr = m[r][c]
        row_r = m[r]
        for i in range(r + 1, nrows):
            row_i = m[i]
            a = row_i[c]
            for j in range(c + 1, ncols):
                q, rem = divmod(pr * row_i[j] - a * row_r[j], prev)
                if rem:
                    raise ArithmeticError(
                        "Inexact division in fraction-free elimination"
                    )
                row_i[j] = q
            row_i[c] = 0
        prev = pr
        pivots.append(c)
        r += 1
    return m[:r], pivots


def _rref_rational(
    rows: Sequence[Sequence[Fraction]], ncols: int
) -> Tuple[List[List[Raw]], List[int]]:
    int_rows = []
    for row in rows:
        den = 1
        for x in row:
            den = den * x.denominator // gcd(den, x.denominator)
        int_rows.append([x.numerator * (den // x.denominator) for x in row])
    echelon, pivots = _bareiss_echelon(int_rows, ncols)
    red = [[Fraction(v) for v in row] for row in echelon]
    for i in range(len(pivots) - 1, -1, -1):
        c = pivots[i]
        pv = red[i][c]
        red[i] = [v / pv for v in red[i]]
        for k in range(i):
            f = red[k][c]
            if f:
                red[k] = [a - f * b for a, b in zip(red[k], red[i])]
    return red, pivots  # type: ignore


def _rref_finite(
    field: FieldSpec, rows: Sequence[Sequence[Raw]], ncols: int
) -> Tuple[List[List[Raw]], List[int]]:
    m = [list(r) for r in rows]
    nrows = len(m)
    pivots: List[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if not field.is_zero(m[i][c])), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = field.inv(m[r][c])
        m[r] = [field.mul(inv, v) for v in m[r]]
        row_r = m[r]
        for i in range(nrows):
            if i != r and not field.is_zero(m[i][c]):
                f = m[i][c]
                m[i] = [field.sub(a, field.mul(f, b)) for a, b in zip(m[i], row_r)]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def rref(m: Mat) -> Tuple[List[List[Raw]], List[int]]:
    """Reduced row echelon form (nonzero rows only) and pivot columns."""
    if m.field.kind is FieldKind.rationals:
        return _rref_rational(m.raw_rows(), m.ncols)  # type: ignore
    return _rref_finite(m.field, m.raw_rows(), m.ncols)


def rank_profile(m: Mat) -> RankProfile:
    """Compute rank, pivot columns, a kernel basis and an image basis.

    Pivots are chosen as the first nonzero entry in column order, so the
    result only depends on the row space and is unchanged by row
    permutations.

    Args:
        m (Mat): The matrix.

    Returns:
        RankProfile: kernel_basis has one column per free column; image_basis
        consists of the pivot columns of `m`.
    """
    if not isinstance(m, Mat):
        raise TypeError("Invalid Mat")
    f = m.field
    red, pivots = rref(m)
    pivot_set = set(pivots)
    free = [c for c in range(m.ncols) if c not in pivot_set]
    z, o = f.zero(), f.one()
    kernel_cols = []
    for fc in free:
        vec = [z] * m.ncols
        vec[fc] = o
        for i, pc in enumerate(pivots):
            vec[pc] = f.neg(red[i][fc])
        kernel_cols.append(vec)
    if kernel_cols:
        kernel = Mat(f, len(kernel_cols), m.ncols, kernel_cols).transpose()
    else:
        kernel = Mat(f, m.ncols, 0)
    image = m.select(cols=pivots)
    return RankProfile(len(pivots), tuple(pivots), kernel, image)


def solve_linear(a: Mat, b: Mat) -> Optional[Mat]:
    """Solve a·x = b.

    Args:
        a (Mat): Coefficient matrix (r x c).
        b (Mat): Right-hand sides (r x k).

    Raises:
        FieldMismatchError: If `a` and `b` live over different fields.

    Returns:
        Optional[Mat]: A solution (c x k) with free variables set to zero, or
        None if the system is inconsistent.
    """
    if not isinstance(a, Mat) or not isinstance(b, Mat):
        raise TypeError("Invalid Mat")
    if a.field is not b.field:
        raise FieldMismatchError(
            f"Cannot solve over {a.field} with right-hand side over {b.field}"
        )
    if a.nrows != b.nrows:
        raise ValueError(f"Shapes {a.shape} and {b.shape} do not match")
    f = a.field
    aug = Mat.hstack(f, a.nrows, [a, b])
    red, pivots = rref(aug)
    if any(pc >= a.ncols for pc in pivots):
        return None
    z = f.zero()
    x = [[z] * b.ncols for _ in range(a.ncols)]
    for i, pc in enumerate(pivots):
        x[pc] = list(red[i][a.ncols :])
    return Mat(f, a.ncols, b.ncols, x)


def inverse(m: Mat) -> Optional[Mat]:
    if not m.is_square():
        return None
    return solve_linear(m, Mat.identity(m.field, m.nrows))


def span_dim(field: FieldSpec, nrows: int, mats: Sequence[Mat]) -> int:
    """Dimension of the span of the columns of several matrices."""
    return rank_profile(Mat.hstack(field, nrows, mats)).rank


def stacked_kernel(field: FieldSpec, ncols: int, mats: Sequence[Mat]) -> Mat:
    """Basis of the common kernel of several matrices with `ncols` columns."""
    return rank_profile(Mat.vstack(field, ncols, mats)).kernel_basis


def field_automorphism(fs: FieldSpec, power: int) -> Callable[[Mat], Mat]:
    """Return the entrywise Frobenius power x -> x^(p^power) on matrices.

    Raises:
        UnsupportedAutomorphismError: On the rationals or a prime field with power > 0.
    """
    if not isinstance(fs, FieldSpec):
        raise TypeError("Invalid FieldSpec")
    if power < 0:
        raise ValueError("Automorphism power should be non-negative")

    def check(m: Mat) -> None:
        if m.field is not fs:
            raise FieldMismatchError(
                f"Automorphism of {fs} applied to a matrix over {m.field}"
            )

    if power == 0:

        def identity(m: Mat) -> Mat:
            check(m)
            return m

        return identity
    if fs.kind is not FieldKind.extension:
        raise UnsupportedAutomorphismError(f"{fs} has no Frobenius power {power}")
    power %= fs.n

    def apply(m: Mat) -> Mat:
        check(m)
        return m.map_raw(lambda v: fs.frobenius(v, power))

    logger.debug(f"field_automorphism: x -> x^({fs.p}^{power}) on {fs}")
    return apply
