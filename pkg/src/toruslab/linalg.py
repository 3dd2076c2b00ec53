"""Exact linear algebra over the rationals.

Matrices are lists of rows. Entries may be ``int`` or ``Fraction``; results
are ``Fraction`` unless noted. Everything here is exact and side-effect free.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Sequence

Matrix = list[list[Fraction]]


class SingularMatrixError(ArithmeticError):
    pass


def to_fraction_matrix(rows) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def zeros(m: int, n: int) -> Matrix:
    return [[Fraction(0)] * n for _ in range(m)]


def transpose(a):
    return [list(col) for col in zip(*a)]


def matmul(a, b):
    bt = transpose(b)
    return [[sum((x * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def matvec(a, v):
    return [sum((x * y for x, y in zip(row, v)), Fraction(0)) for row in a]


def matadd(a, b):
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def matsub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def matscale(c, a):
    return [[c * x for x in row] for row in a]


def bareiss_det(a: Sequence[Sequence[int]]) -> int:
    """Determinant of an integer matrix by fraction-free elimination."""
    m = [list(map(int, row)) for row in a]
    n = len(m)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for r in range(k + 1, n):
                if m[r][k] != 0:
                    m[k], m[r] = m[r], m[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = m[k][k]
        for i in range(k + 1, n):
            mi = m[i]
            mik = mi[k]
            mk = m[k]
            for j in range(k + 1, n):
                mi[j] = (mi[j] * pivot - mik * mk[j]) // prev
        prev = pivot
    return sign * m[n - 1][n - 1]


def det(a) -> Fraction:
    """Determinant over Q by Gaussian elimination."""
    if all(isinstance(x, int) for row in a for x in row):
        return Fraction(bareiss_det(a))
    m = to_fraction_matrix(a)
    n = len(m)
    result = Fraction(1)
    for k in range(n):
        piv = next((r for r in range(k, n) if m[r][k] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != k:
            m[k], m[piv] = m[piv], m[k]
            result = -result
        pk = m[k][k]
        result *= pk
        for i in range(k + 1, n):
            f = m[i][k] / pk
            if f:
                mi, mk = m[i], m[k]
                for j in range(k + 1, n):
                    mi[j] -= f * mk[j]
    return result


def rref(a) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form and pivot columns."""
    m = to_fraction_matrix(a)
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pv = m[r][c]
        m[r] = [x / pv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [x - f * y for x, y in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def rank(a) -> int:
    if not a:
        return 0
    return len(rref(a)[1])


def nullspace(a, ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of {x : a x = 0}, one basis vector per free column."""
    if not a:
        n = ncols or 0
        return [[Fraction(int(i == j)) for i in range(n)] for j in range(n)]
    m, pivots = rref(a)
    n = len(a[0])
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for row, p in zip(m, pivots):
            v[p] = -row[f]
        basis.append(v)
    return basis


def solve(a, b) -> list[Fraction]:
    """Solve a x = b for square nonsingular a."""
    n = len(a)
    aug = [list(map(Fraction, row)) + [Fraction(bi)] for row, bi in zip(a, b)]
    m, pivots = rref(aug)
    if pivots != list(range(n)):
        raise SingularMatrixError("matrix is singular")
    return [m[i][n] for i in range(n)]


def inverse(a) -> Matrix:
    n = len(a)
    aug = [list(map(Fraction, row)) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    m, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise SingularMatrixError("matrix is singular")
    return [row[n:] for row in m]


def span_equal(u: list[list[Fraction]], v: list[list[Fraction]]) -> bool:
    """True iff the row spaces of u and v coincide."""
    ru, rv = rank(u) if u else 0, rank(v) if v else 0
    if ru != rv:
        return False
    if ru == 0:
        return True
    return rank(list(u) + list(v)) == ru


def minors(a, k: int) -> dict[tuple[int, ...], Fraction]:
    """All maximal k x k minors of an (n x k) matrix, keyed by sorted row subsets."""
    n = len(a)
    integral = all(isinstance(x, int) for row in a for x in row)
    out = {}
    for rows in combinations(range(n), k):
        sub = [a[r] for r in rows]
        out[rows] = Fraction(bareiss_det(sub)) if integral else det(sub)
    return out


def gram_det(cols: Sequence[Sequence]) -> Fraction:
    """Gram determinant of a list of column vectors (exact)."""
    g = [[sum((Fraction(x) * y for x, y in zip(u, v)), Fraction(0)) for v in cols] for u in cols]
    return det(g)
