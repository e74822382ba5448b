import logging
from collections import Counter
from functools import lru_cache
from math import comb
from typing import Tuple

from pykoszul.complexes import Cplx, direct_sum, euler_char, shift
from pykoszul.const import MATERIALIZE_LIMIT
from pykoszul.field import rationals

logger = logging.getLogger(__name__)


class YSeq:
    def __init__(self, n: int, entries: Tuple[int, ...]) -> None:
        """The sequence y_n: y_0 = (0), y_{i+1} = (y_i + 1) followed by y_i."""
        if len(entries) != 2 ** n:
            raise ValueError(f"y_{n} should have {2 ** n} entries")
        self._n = n
        self._entries = entries

    @property
    def n(self) -> int:
        return self._n

    @property
    def entries(self) -> Tuple[int, ...]:
        return self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __str__(self) -> str:
        return f"YSeq(n={self._n}, entries={self._entries})"


@lru_cache(maxsize=8)
def _entries(n: int) -> Tuple[int, ...]:
    seq: Tuple[int, ...] = (0,)
    for _ in range(n):
        seq = tuple(e + 1 for e in seq) + seq
    return seq


@lru_cache(maxsize=32)
def _occurrences(n: int) -> Counter:
    return Counter(_entries(n))


def y_sequence(n: int) -> YSeq:
    if not isinstance(n, int) or n < 0:
        raise ValueError("n should be a non-negative integer")
    if n > MATERIALIZE_LIMIT:
        raise ValueError(
            f"y_{n} is too long to materialize (limit {MATERIALIZE_LIMIT})"
        )
    return YSeq(n, _entries(n))


def occurrence_count(k: int, n: int) -> int:
    """N(k, n): how often k occurs in y_n. Equals binomial(n, k)."""
    if k < 0 or n < 0:
        raise ValueError("k and n should be non-negative")
    closed = comb(n, k)
    if n <= MATERIALIZE_LIMIT:
        counted = _occurrences(n)[k]
        if counted != closed:
            raise RuntimeError(
                f"N({k},{n}) = {counted} disagrees with binomial {closed}"
            )
    return closed


def n_chi(d: int) -> int:
    """Sum over k < d of (-1)^k N(k, d-1); 1 for d = 1 and 0 otherwise."""
    if d < 1:
        raise ValueError("d should be at least 1")
    return sum((-1) ** k * occurrence_count(k, d - 1) for k in range(d))


def doubling_complex(steps: int) -> Cplx:
    """C_0 = K[0], C_{i+1} = C_i ⊕ C_i[-1]."""
    c = Cplx.concentrated(rationals(), 1)
    for _ in range(steps):
        c = direct_sum([c, shift(c, -1)])
    return c


def n_chi_via_complexes(d: int) -> int:
    if d < 1:
        raise ValueError("d should be at least 1")
    c = doubling_complex(d - 1)
    logger.debug(f"n_chi_via_complexes: C_{d - 1} has dims {c.getDims()}")
    return euler_char(c)
