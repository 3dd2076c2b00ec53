"""Exact two-phase simplex over the rationals (Bland's rule).

Small dense problems only; used where a certificate of (in)feasibility must
not depend on floating-point tolerances.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


class InfeasibleError(ArithmeticError):
    pass


class UnboundedError(ArithmeticError):
    pass


@dataclass(frozen=True)
class LPResult:
    x: tuple[Fraction, ...]
    objective: Fraction


def _pivot(tab: list[list[Fraction]], basis: list[int], r: int, c: int) -> None:
    pr = tab[r]
    pv = pr[c]
    if pv != 1:
        tab[r] = pr = [v / pv for v in pr]
    for i, row in enumerate(tab):
        if i != r and row[c] != 0:
            f = row[c]
            tab[i] = [a - f * b for a, b in zip(row, pr)]
    basis[r] = c


def _simplex(tab: list[list[Fraction]], basis: list[int], ncols: int, allowed: Sequence[bool]) -> None:
    """Minimize the objective stored in the last row (reduced costs, value in last column)."""
    m = len(tab) - 1
    while True:
        obj = tab[-1]
        enter = next((j for j in range(ncols) if allowed[j] and obj[j] < 0), None)
        if enter is None:
            return
        best = None
        for i in range(m):
            a = tab[i][enter]
            if a > 0:
                ratio = tab[i][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            raise UnboundedError("objective is unbounded below")
        _pivot(tab, basis, best[1], enter)


def solve_standard(c: Sequence, a_eq: Sequence[Sequence], b_eq: Sequence) -> LPResult:
    """min c.x subject to a_eq x = b_eq, x >= 0, exactly."""
    n = len(c)
    rows = [[Fraction(v) for v in row] for row in a_eq]
    rhs = [Fraction(v) for v in b_eq]
    for i in range(len(rows)):
        if rhs[i] < 0:
            rows[i] = [-v for v in rows[i]]
            rhs[i] = -rhs[i]
    m = len(rows)
    total = n + m
    tab = []
    for i in range(m):
        art = [Fraction(int(i == k)) for k in range(m)]
        tab.append(rows[i] + art + [rhs[i]])
    phase1 = [Fraction(0)] * n + [Fraction(1)] * m + [Fraction(0)]
    for i in range(m):
        phase1 = [p - v for p, v in zip(phase1, tab[i])]
    tab.append(phase1)
    basis = list(range(n, total))
    _simplex(tab, basis, total, [True] * total)
    if tab[-1][-1] != 0:
        raise InfeasibleError("no feasible point")
    # drive artificial variables out of the basis
    keep = []
    for i in range(m):
        if basis[i] >= n:
            col = next((j for j in range(n) if tab[i][j] != 0), None)
            if col is None:
                continue  # redundant row
            _pivot(tab, basis, i, col)
        keep.append(i)
    tab = [tab[i] for i in keep]
    basis = [basis[i] for i in keep]
    cost = [Fraction(v) for v in c] + [Fraction(0)] * m + [Fraction(0)]
    for i, bcol in enumerate(basis):
        if cost[bcol] != 0:
            f = cost[bcol]
            cost = [a - f * b for a, b in zip(cost, tab[i])]
    tab.append(cost)
    _simplex(tab, basis, total, [j < n for j in range(total)])
    x = [Fraction(0)] * n
    for i, bcol in enumerate(basis):
        if bcol < n:
            x[bcol] = tab[i][-1]
    return LPResult(tuple(x), sum((Fraction(ci) * xi for ci, xi in zip(c, x)), Fraction(0)))


def solve_free(
    c: Sequence,
    a_ge: Sequence[Sequence] = (),
    b_ge: Sequence = (),
    a_eq: Sequence[Sequence] = (),
    b_eq: Sequence = (),
    l1: bool = False,
) -> LPResult:
    """min c.x over free x with a_ge x >= b_ge and a_eq x = b_eq, exactly.

    With ``l1`` the objective is the l1 norm of x instead (c only fixes n).
    """
    n = len(c)
    k = len(a_ge)
    rows, rhs = [], []
    for i, row in enumerate(a_ge):
        slack = [Fraction(-int(i == j)) for j in range(k)]
        rows.append([Fraction(v) for v in row] + [-Fraction(v) for v in row] + slack)
        rhs.append(b_ge[i])
    for row, val in zip(a_eq, b_eq):
        rows.append([Fraction(v) for v in row] + [-Fraction(v) for v in row] + [Fraction(0)] * k)
        rhs.append(val)
    if l1:
        cost = [Fraction(1)] * (2 * n) + [Fraction(0)] * k
    else:
        cost = [Fraction(v) for v in c] + [-Fraction(v) for v in c] + [Fraction(0)] * k
    res = solve_standard(cost, rows, rhs)
    x = tuple(res.x[j] - res.x[n + j] for j in range(n))
    return LPResult(x, res.objective)
