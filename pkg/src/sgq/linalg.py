"""Exact sparse linear algebra over Q.

Vectors are ``dict[int, Fraction]`` keyed by basis index.  ``Echelon`` keeps an
incrementally reduced basis of a span where every stored vector has its
smallest key as pivot, so reduction always terminates.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations
from math import lcm
from typing import Iterable, Sequence

Vector = dict


def _axpy(y: dict, a, x: dict) -> None:
    """y += a * x in place, dropping zeros."""
    for k, v in x.items():
        nv = y.get(k, 0) + a * v
        if nv:
            y[k] = nv
        else:
            y.pop(k, None)


class Echelon:
    """Incremental row-echelon basis.

    With ``track=True`` each stored vector remembers its combination of the
    inserted vectors, which is what ``nullspace`` needs.
    """

    def __init__(self, track: bool = False):
        self.pivots: dict = {}
        self.track = track
        self.combos: dict = {}
        self._count = 0

    def reduce(self, vec: dict, combo: dict | None = None):
        vec = dict(vec)
        piv = self.pivots
        while vec:
            hits = [k for k in vec if k in piv]
            if not hits:
                break
            k = min(hits)
            c = vec[k]
            _axpy(vec, -c, piv[k])
            if combo is not None:
                _axpy(combo, -c, self.combos[k])
        return vec, combo

    def add(self, vec: dict):
        """Insert ``vec``; return the residual (empty if it was dependent)."""
        combo = {self._count: Fraction(1)} if self.track else None
        self._count += 1
        res, combo = self.reduce(vec, combo)
        if res:
            k = min(res)
            inv = 1 / Fraction(res[k])
            res = {kk: v * inv for kk, v in res.items()}
            self.pivots[k] = res
            if self.track:
                self.combos[k] = {kk: v * inv for kk, v in combo.items()}
            return res, None
        return res, combo

    def contains(self, vec: dict) -> bool:
        return not self.reduce(vec)[0]

    @property
    def rank(self) -> int:
        return len(self.pivots)


def rank(vectors: Iterable[dict]) -> int:
    e = Echelon()
    for v in vectors:
        e.add(v)
    return e.rank


def nullspace(columns: Sequence[dict]) -> list:
    """Basis of ``{c : sum_j c_j columns[j] = 0}`` as sparse vectors over column indices."""
    e = Echelon(track=True)
    out = []
    for col in columns:
        res, combo = e.add(col)
        if combo is not None:
            out.append(combo)
    return out


def solve(columns: Sequence[dict], target: dict):
    """A sparse ``c`` with ``sum_j c_j columns[j] = target``, or ``None``."""
    e = Echelon(track=True)
    for col in columns:
        e.add(col)
    res, combo = e.reduce(target, {})
    if res:
        return None
    return {k: -v for k, v in combo.items() if v}


def dense_to_columns(rows: Sequence[Sequence]) -> list:
    if not rows:
        return []
    ncols = len(rows[0])
    cols = []
    for j in range(ncols):
        cols.append({i: Fraction(r[j]) for i, r in enumerate(rows) if r[j]})
    return cols


def dense_rank(rows: Sequence[Sequence]) -> int:
    return rank({j: Fraction(v) for j, v in enumerate(r) if v} for r in rows)


def dense_nullspace(rows: Sequence[Sequence], ncols: int | None = None) -> list:
    """Null vectors of a dense matrix as dense lists of Fractions."""
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    cols = [{i: Fraction(r[j]) for i, r in enumerate(rows) if r[j]} for j in range(ncols)]
    out = []
    for v in nullspace(cols):
        out.append([v.get(j, Fraction(0)) for j in range(ncols)])
    return out


def bareiss_det(matrix: Sequence[Sequence[int]]) -> int:
    """Fraction-free determinant of an integer matrix."""
    m = [list(r) for r in matrix]
    n = len(m)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def rational_det(matrix: Sequence[Sequence]) -> Fraction:
    """Determinant of a rational matrix via Bareiss after clearing denominators."""
    rows = [[Fraction(v) for v in r] for r in matrix]
    scale = Fraction(1)
    ints = []
    for r in rows:
        den = 1
        for v in r:
            den = lcm(den, v.denominator)
        ints.append([int(v * den) for v in r])
        scale /= den
    return bareiss_det(ints) * scale


def leibniz_det(matrix, zero, one):
    """Determinant over a commutative ring of even elements by permutation expansion."""
    n = len(matrix)
    total = zero
    for perm in permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        term = one
        for i in range(n):
            term = term * matrix[i][perm[i]]
            if not term:
                break
        if term:
            total = total - term if inv % 2 else total + term
    return total
