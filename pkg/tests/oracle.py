"""Brute-force Koszul cohomology, independent of pykoszul's elimination and cone code.

The complex is written down directly from subsets of the operator indices
(lexicographic order, sign (-1)^position) and ranked with sympy over Q or
plain integer elimination mod p.
"""

import itertools
from fractions import Fraction
from typing import List, Sequence

import sympy

from pykoszul.const import FieldKind
from pykoszul.koszul import OperatorModule


def _rank_mod_p(rows: List[List[int]], p: int) -> int:
    rows = [[x % p for x in r] for r in rows]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col]), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        inv = pow(rows[rank][col], p - 2, p)
        rows[rank] = [x * inv % p for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                c = rows[i][col]
                rows[i] = [(x - c * y) % p for x, y in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def _rank(m: OperatorModule, rows: List[List[object]]) -> int:
    if not rows or not rows[0]:
        return 0
    if m.field.kind is FieldKind.rationals:
        entries = [
            [sympy.Rational(x.numerator, x.denominator) for x in r] for r in rows
        ]
        return sympy.Matrix(entries).rank()
    if m.field.kind is FieldKind.prime:
        return _rank_mod_p([[int(x) for x in r] for r in rows], m.field.p)
    raise NotImplementedError("The oracle handles Q and prime fields")


def _differential(m: OperatorModule, idx: Sequence[int], q: int) -> List[List[object]]:
    n = m.dim
    zero = Fraction(0) if m.field.kind is FieldKind.rationals else 0
    src = list(itertools.combinations(idx, q))
    dst = list(itertools.combinations(idx, q + 1))
    rows = [[zero] * (n * len(src)) for _ in range(n * len(dst))]
    col_of = {s: j for j, s in enumerate(src)}
    for bi, s in enumerate(dst):
        for pos, i in enumerate(s):
            t = s[:pos] + s[pos + 1 :]
            bj = col_of[t]
            op = m.getOp(i)
            for r in range(n):
                for c in range(n):
                    v = op.raw(r, c)
                    if pos % 2:
                        v = -v
                    rows[bi * n + r][bj * n + c] = rows[bi * n + r][bj * n + c] + v
    return rows


def koszul_dims(m: OperatorModule, idx: Sequence[int] = None) -> List[int]:
    """h^q of K^•(x_idx, M) for q = 0..len(idx)."""
    idx = list(range(m.op_count)) if idx is None else sorted(idx)
    l = len(idx)
    ranks = {}
    for q in range(-1, l + 1):
        if 0 <= q < l:
            ranks[q] = _rank(m, _differential(m, idx, q))
        else:
            ranks[q] = 0
    dims = []
    for q in range(l + 1):
        size = m.dim * len(list(itertools.combinations(idx, q)))
        dims.append(size - ranks[q] - ranks[q - 1])
    return dims
