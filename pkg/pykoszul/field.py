import itertools
import logging
import random
import re
import threading
from fractions import Fraction
from typing import Dict, Optional, Sequence, Tuple, Union

import sympy

from pykoszul.const import MAX_EXTENSION_DEGREE, FieldKind
from pykoszul.exc import FieldMismatchError, UsageError

logger = logging.getLogger(__name__)

Raw = Union[Fraction, int, Tuple[int, ...]]
ScalarLike = Union["Scalar", Fraction, int, str, Tuple[int, ...]]

_T = sympy.Symbol("t")


def is_irreducible(p: int, coeffs: Sequence[int]) -> bool:
    """Check a polynomial over GF(p) for irreducibility.

    Args:
        p (int): The characteristic.
        coeffs (Sequence[int]): Coefficients from the constant term upwards.

    Returns:
        bool: True if the polynomial is irreducible over GF(p).
    """
    return bool(sympy.Poly(list(reversed(coeffs)), _T, modulus=p).is_irreducible)


def default_modulus(p: int, n: int) -> Tuple[int, ...]:
    """Return the first monic irreducible polynomial of degree `n` over GF(p).

    Candidates are ordered lexicographically by (c_{n-1}, ..., c_0).

    Returns:
        Tuple[int, ...]: Coefficients from the constant term upwards, leading 1
            included.
    """
    for high_to_low in itertools.product(range(p), repeat=n):
        coeffs = tuple(reversed(high_to_low)) + (1,)
        if is_irreducible(p, coeffs):
            logger.debug(f"default_modulus: GF({p}^{n}) uses {coeffs}")
            return coeffs
    raise RuntimeError(f"No irreducible polynomial of degree {n} over GF({p})")


class FieldSpec:
    def __new__(cls, *args, **kwargs):
        raise NotImplementedError(
            "Do not call `FieldSpec` directly. "
            "Instead, call `FieldSpecFactory.get_instance`."
        )

    @classmethod
    def __private_new__(
        cls, kind: FieldKind, p: int, n: int, modulus: Tuple[int, ...]
    ) -> "FieldSpec":
        return cls.__private_init__(super().__new__(cls), kind, p, n, modulus)

    @classmethod
    def __private_init__(
        cls, self, kind: FieldKind, p: int, n: int, modulus: Tuple[int, ...]
    ) -> "FieldSpec":
        """An exact field: the rationals, GF(p) or GF(p^n).

        Elements are handled as raw values: `Fraction` for the rationals,
        `int` in [0, p) for prime fields and a length-n tuple of residues
        (constant term first) for extension fields.
        """
        self._kind = kind
        self._p = p
        self._n = n
        self._modulus = modulus
        return self

    def __init__(self) -> None:  # pragma: no cover
        self._kind: FieldKind
        self._p: int
        self._n: int
        self._modulus: Tuple[int, ...]

    @property
    def kind(self) -> FieldKind:
        return self._kind

    @property
    def p(self) -> int:
        """The characteristic (0 for the rationals)."""
        return self._p

    @property
    def n(self) -> int:
        return self._n

    @property
    def modulus(self) -> Tuple[int, ...]:
        return self._modulus

    @property
    def order(self) -> Optional[int]:
        if self._kind is FieldKind.rationals:
            return None
        return self._p ** self._n

    def spec_string(self) -> str:
        if self._kind is FieldKind.rationals:
            return "q"
        if self._kind is FieldKind.prime:
            return f"gf:{self._p}"
        return f"gf:{self._p}^{self._n}"

    def __str__(self) -> str:
        if self._kind is FieldKind.rationals:
            return "Q"
        if self._kind is FieldKind.prime:
            return f"GF({self._p})"
        return f"GF({self._p}^{self._n})"

    def __repr__(self) -> str:
        return (
            f"FieldSpec(kind={self._kind.name}, p={self._p}, n={self._n}, "
            f"modulus={self._modulus})"
        )

    def __reduce__(self):
        return (
            FieldSpecFactory.get_instance,
            (self._kind, self._p, self._n, self._modulus),
        )

    # raw arithmetic

    def zero(self) -> Raw:
        if self._kind is FieldKind.rationals:
            return Fraction(0)
        if self._kind is FieldKind.prime:
            return 0
        return (0,) * self._n

    def one(self) -> Raw:
        return self.from_int(1)

    def from_int(self, k: int) -> Raw:
        if self._kind is FieldKind.rationals:
            return Fraction(k)
        if self._kind is FieldKind.prime:
            return k % self._p
        return (k % self._p,) + (0,) * (self._n - 1)

    def is_zero(self, a: Raw) -> bool:
        if self._kind is FieldKind.extension:
            return not any(a)  # type: ignore
        return a == 0

    def add(self, a: Raw, b: Raw) -> Raw:
        if self._kind is FieldKind.rationals:
            return a + b  # type: ignore
        if self._kind is FieldKind.prime:
            return (a + b) % self._p  # type: ignore
        p = self._p
        return tuple((x + y) % p for x, y in zip(a, b))  # type: ignore

    def neg(self, a: Raw) -> Raw:
        if self._kind is FieldKind.rationals:
            return -a  # type: ignore
        if self._kind is FieldKind.prime:
            return (-a) % self._p  # type: ignore
        p = self._p
        return tuple((-x) % p for x in a)  # type: ignore

    def sub(self, a: Raw, b: Raw) -> Raw:
        if self._kind is FieldKind.rationals:
            return a - b  # type: ignore
        if self._kind is FieldKind.prime:
            return (a - b) % self._p  # type: ignore
        p = self._p
        return tuple((x - y) % p for x, y in zip(a, b))  # type: ignore

    def mul(self, a: Raw, b: Raw) -> Raw:
        if self._kind is FieldKind.rationals:
            return a * b  # type: ignore
        if self._kind is FieldKind.prime:
            return (a * b) % self._p  # type: ignore
        return self._poly_mul(a, b)  # type: ignore

    def _poly_mul(self, a: Tuple[int, ...], b: Tuple[int, ...]) -> Tuple[int, ...]:
        n, p, mod = self._n, self._p, self._modulus
        res = [0] * (2 * n - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    res[i + j] += x * y
        # t^n = -(m_0 + m_1 t + ... + m_{n-1} t^{n-1})
        for k in range(2 * n - 2, n - 1, -1):
            c = res[k] % p
            if c:
                for j in range(n):
                    res[k - n + j] -= c * mod[j]
        return tuple(v % p for v in res[:n])

    def power(self, a: Raw, e: int) -> Raw:
        if e < 0:
            return self.power(self.inv(a), -e)
        result = self.one()
        base = a
        while e:
            if e & 1:
                result = self.mul(result, base)
            base = self.mul(base, base)
            e >>= 1
        return result

    def inv(self, a: Raw) -> Raw:
        if self.is_zero(a):
            raise ZeroDivisionError(f"Zero has no inverse in {self}")
        if self._kind is FieldKind.rationals:
            return 1 / a  # type: ignore
        if self._kind is FieldKind.prime:
            return pow(a, -1, self._p)  # type: ignore
        return self.power(a, self._p ** self._n - 2)

    def div(self, a: Raw, b: Raw) -> Raw:
        return self.mul(a, self.inv(b))

    def dot(self, xs: Sequence[Raw], ys: Sequence[Raw]) -> Raw:
        if self._kind is FieldKind.rationals:
            return sum((x * y for x, y in zip(xs, ys)), Fraction(0))  # type: ignore
        if self._kind is FieldKind.prime:
            return sum(x * y for x, y in zip(xs, ys)) % self._p  # type: ignore
        acc = self.zero()
        for x, y in zip(xs, ys):
            if any(x) and any(y):  # type: ignore
                acc = self.add(acc, self._poly_mul(x, y))  # type: ignore
        return acc

    def frobenius(self, a: Raw, power: int = 1) -> Raw:
        """Apply x -> x^(p^power)."""
        if self._kind is FieldKind.rationals:
            return a
        return self.power(a, self._p ** power)

    # conversions

    def coerce(self, x: ScalarLike) -> Raw:
        """Turn user input into a raw value of this field."""
        if isinstance(x, Scalar):
            if x.field is not self:
                raise FieldMismatchError(f"Scalar over {x.field} used in {self}")
            return x.value
        if isinstance(x, bool):
            raise TypeError("Invalid Scalar")
        if isinstance(x, int):
            return self.from_int(x)
        if isinstance(x, Fraction):
            if self._kind is FieldKind.rationals:
                return x
            return self.div(self.from_int(x.numerator), self.from_int(x.denominator))
        if isinstance(x, str):
            return self.parse(x)
        if isinstance(x, tuple) and self._kind is FieldKind.extension:
            if len(x) != self._n or not all(isinstance(c, int) for c in x):
                raise ValueError(
                    f"Extension element should have {self._n} integer coefficients"
                )
            return tuple(c % self._p for c in x)
        raise TypeError("Invalid Scalar")

    def to_base_coords(self, a: Raw) -> Tuple[int, ...]:
        """Coordinates of `a` over the prime field (basis 1, t, ..., t^{n-1})."""
        if self._kind is FieldKind.rationals:
            raise ValueError("The rationals have no prime-field coordinates")
        if self._kind is FieldKind.prime:
            return (a,)  # type: ignore
        return a  # type: ignore

    def from_base_coords(self, coords: Sequence[int]) -> Raw:
        if self._kind is FieldKind.prime:
            return coords[0] % self._p
        return tuple(c % self._p for c in coords)

    def embed_prime(self, k: int) -> Raw:
        """Embed an element of the prime subfield."""
        return self.from_int(k)

    def format(self, a: Raw) -> str:
        if self._kind is FieldKind.rationals:
            return str(a)
        if self._kind is FieldKind.prime:
            return str(a)
        terms = []
        for k, c in enumerate(a):  # type: ignore
            if not c:
                continue
            if k == 0:
                terms.append(str(c))
            elif k == 1:
                terms.append(f"{c}*t")
            else:
                terms.append(f"{c}*t^{k}")
        return "+".join(terms) if terms else "0"

    _TERM = re.compile(r"^(?:(-?\d+)\*?)?(t(?:\^(\d+))?)?$")

    def parse(self, s: str) -> Raw:
        text = s.replace(" ", "")
        if not text:
            raise ValueError("Empty scalar")
        if self._kind is FieldKind.rationals:
            try:
                return Fraction(text)
            except (ValueError, ZeroDivisionError):
                raise ValueError(f"Invalid rational scalar: {s}")
        if self._kind is FieldKind.prime:
            if "/" in text:
                num, _, den = text.partition("/")
                return self.coerce(Fraction(int(num), int(den)))
            try:
                return int(text) % self._p
            except ValueError:
                raise ValueError(f"Invalid GF({self._p}) scalar: {s}")
        coeffs = [0] * self._n
        for term in text.split("+"):
            m = self._TERM.match(term)
            if not term or m is None or (m.group(1) is None and m.group(2) is None):
                raise ValueError(f"Invalid {self} scalar: {s}")
            c = int(m.group(1)) if m.group(1) is not None else 1
            k = 0 if m.group(2) is None else int(m.group(3) or 1)
            if k >= self._n:
                raise ValueError(f"Degree {k} too large for {self}: {s}")
            coeffs[k] += c
        return tuple(c % self._p for c in coeffs)

    def random_value(self, rng: random.Random) -> Raw:
        if self._kind is FieldKind.rationals:
            return Fraction(rng.randint(-3, 3), rng.choice((1, 1, 1, 2, 3)))
        if self._kind is FieldKind.prime:
            return rng.randrange(self._p)
        return tuple(rng.randrange(self._p) for _ in range(self._n))

    def scalar(self, x: ScalarLike) -> "Scalar":
        return Scalar(self, self.coerce(x))

    def elements(self):
        """Iterate over all elements of a finite field."""
        if self._kind is FieldKind.rationals:
            raise ValueError("The rationals are infinite")
        if self._kind is FieldKind.prime:
            return iter(range(self._p))
        return (tuple(c) for c in itertools.product(range(self._p), repeat=self._n))


class FieldSpecFactory:
    __instances: Dict[Tuple, FieldSpec] = {}
    __lock = threading.Lock()

    @classmethod
    def get_instance(
        cls,
        kind: FieldKind,
        p: int = 0,
        n: int = 1,
        modulus: Optional[Sequence[int]] = None,
    ) -> FieldSpec:
        """Get the unique FieldSpec for the given parameters.

        Args:
            kind (FieldKind): rationals, prime or extension.
            p (int): The characteristic for finite fields.
            n (int): The extension degree.
            modulus (Optional[Sequence[int]]): Monic minimal polynomial, constant
                term first. Chosen automatically when omitted.

        Raises:
            TypeError: If an argument has the wrong type.
            ValueError: If `p` is not prime or `modulus` is not monic irreducible.

        Returns:
            FieldSpec: A shared instance.
        """
        if not isinstance(kind, FieldKind):
            raise TypeError("Invalid FieldKind")
        if kind is FieldKind.rationals:
            key: Tuple = (kind, 0, 1, ())
        else:
            if not isinstance(p, int) or isinstance(p, bool):
                raise TypeError("Invalid characteristic")
            if not sympy.isprime(p):
                raise ValueError(f"Characteristic should be prime, got {p}")
            if kind is FieldKind.prime:
                key = (kind, p, 1, (0, 1))
            else:
                if not isinstance(n, int) or not 1 <= n <= MAX_EXTENSION_DEGREE:
                    raise ValueError(
                        f"Extension degree should be in 1..{MAX_EXTENSION_DEGREE}, "
                        f"got {n}"
                    )
                if modulus is None:
                    mod = default_modulus(p, n)
                else:
                    mod = tuple(int(c) % p for c in modulus)
                    if len(mod) != n + 1 or mod[-1] != 1:
                        raise ValueError(f"Modulus should be monic of degree {n}")
                    if not is_irreducible(p, mod):
                        raise ValueError(f"Modulus {mod} is reducible over GF({p})")
                key = (kind, p, n, mod)

        with cls.__lock:
            if key not in cls.__instances:
                cls.__instances[key] = FieldSpec.__private_new__(*key)
                logger.debug(f"FieldSpecFactory: created {cls.__instances[key]!r}")
            return cls.__instances[key]


def rationals() -> FieldSpec:
    return FieldSpecFactory.get_instance(FieldKind.rationals)


def gf(p: int, n: int = 1, modulus: Optional[Sequence[int]] = None) -> FieldSpec:
    if n == 1 and modulus is None:
        return FieldSpecFactory.get_instance(FieldKind.prime, p)
    return FieldSpecFactory.get_instance(FieldKind.extension, p, n, modulus)


_FIELD_RE = re.compile(r"^gf:(\d+)(?:\^(\d+))?$")


def parse_field(spec: str) -> FieldSpec:
    """Parse `q`, `gf:p` or `gf:p^n`.

    Raises:
        UsageError: If the string does not follow the grammar or names no field.
    """
    if not isinstance(spec, str):
        raise TypeError("Invalid field spec")
    text = spec.strip().lower()
    if text == "q":
        return rationals()
    m = _FIELD_RE.match(text)
    if m is None:
        raise UsageError(f"Invalid field spec: {spec!r} (expected q, gf:p or gf:p^n)")
    p = int(m.group(1))
    n = int(m.group(2)) if m.group(2) else 1
    try:
        return gf(p, n)
    except ValueError as err:
        raise UsageError(f"Invalid field spec: {spec!r}: {err}")


class Scalar:
    __slots__ = ("_field", "_value")

    def __init__(self, field: FieldSpec, value: Raw) -> None:
        """An element of a FieldSpec."""
        if not isinstance(field, FieldSpec):
            raise TypeError("Invalid FieldSpec")
        self._field = field
        self._value = value

    @property
    def field(self) -> FieldSpec:
        return self._field

    @property
    def value(self) -> Raw:
        return self._value

    def _other(self, other: ScalarLike) -> Raw:
        if isinstance(other, Scalar) and other._field is not self._field:
            raise FieldMismatchError(f"Cannot combine {self._field} and {other._field}")
        return self._field.coerce(other)

    def __add__(self, other: ScalarLike) -> "Scalar":
        return Scalar(self._field, self._field.add(self._value, self._other(other)))

    __radd__ = __add__

    def __sub__(self, other: ScalarLike) -> "Scalar":
        return Scalar(self._field, self._field.sub(self._value, self._other(other)))

    def __rsub__(self, other: ScalarLike) -> "Scalar":
        return Scalar(self._field, self._field.sub(self._other(other), self._value))

    def __mul__(self, other: ScalarLike) -> "Scalar":
        return Scalar(self._field, self._field.mul(self._value, self._other(other)))

    __rmul__ = __mul__

    def __truediv__(self, other: ScalarLike) -> "Scalar":
        return Scalar(self._field, self._field.div(self._value, self._other(other)))

    def __neg__(self) -> "Scalar":
        return Scalar(self._field, self._field.neg(self._value))

    def __pow__(self, e: int) -> "Scalar":
        return Scalar(self._field, self._field.power(self._value, e))

    def inverse(self) -> "Scalar":
        return Scalar(self._field, self._field.inv(self._value))

    def __bool__(self) -> bool:
        return not self._field.is_zero(self._value)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Scalar):
            return other._field is self._field and other._value == self._value
        if isinstance(other, (int, Fraction)) and not isinstance(other, bool):
            return self._field.coerce(other) == self._value
        return NotImplemented

    def __hash__(self) -> int:
        return hash((id(self._field), self._value))

    def __str__(self) -> str:
        return self._field.format(self._value)

    def __repr__(self) -> str:
        return f"Scalar(field={self._field}, value={self})"
