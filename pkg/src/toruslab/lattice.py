"""Geometry of numbers: LLL, exact shortest vectors, ball counts, wedge norms.

Bases are stored column-wise. When a lattice comes from an integer matrix the
integer matrix is kept as provenance so that ties and boundary points can be
decided exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .linalg import gram_det

MAX_ENUM_RANK = 12
COUNT_GUARD = 10**9
RADIUS_INFLATION = 1e-9


class LatticeError(ValueError):
    pass


@dataclass(frozen=True)
class LatticeBasis:
    """Rank-d lattice spanned by the columns of ``basis``.

    ``exact`` is an optional integer matrix with ``basis == exact`` (as floats);
    it enables exact tie-breaking and boundary checks.
    """

    basis: np.ndarray
    exact: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        b = np.array(self.basis, dtype=float)
        if b.ndim != 2 or b.shape[0] != b.shape[1]:
            raise LatticeError("basis must be a square matrix")
        object.__setattr__(self, "basis", b)
        if self.exact is not None:
            object.__setattr__(self, "exact", tuple(tuple(int(x) for x in row) for row in self.exact))

    @classmethod
    def from_integer(cls, rows: Sequence[Sequence[int]]) -> "LatticeBasis":
        ints = [[int(x) for x in row] for row in rows]
        return cls(np.array(ints, dtype=float), tuple(map(tuple, ints)))

    @property
    def rank(self) -> int:
        return self.basis.shape[1]

    @property
    def det(self) -> float:
        return float(abs(np.linalg.det(self.basis)))

    def vector(self, coeffs: Sequence[int]) -> np.ndarray:
        return self.basis @ np.asarray(coeffs, dtype=float)

    def exact_norm2(self, coeffs: Sequence[int]) -> int | None:
        if self.exact is None:
            return None
        v = [sum(row[j] * int(c) for j, c in enumerate(coeffs)) for row in self.exact]
        return sum(x * x for x in v)


@dataclass(frozen=True)
class Reduced:
    lattice: LatticeBasis  # reduced basis, exact provenance carried along
    transform: np.ndarray  # integer unimodular U with reduced = original @ U


def _gram_schmidt(b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d = b.shape[1]
    bstar = np.zeros_like(b)
    mu = np.eye(d)
    norms = np.zeros(d)
    for i in range(d):
        v = b[:, i].copy()
        for j in range(i):
            mu[i, j] = b[:, i] @ bstar[:, j] / norms[j]
            v -= mu[i, j] * bstar[:, j]
        bstar[:, i] = v
        norms[i] = v @ v
    return mu, norms


def lll_reduce(lat: LatticeBasis, delta: float = 0.99) -> Reduced:
    """LLL-reduce the columns; the unimodular transform is tracked in integers."""
    if not 0.25 < delta < 1:
        raise LatticeError("delta must lie in (0.25, 1)")
    b0 = lat.basis
    d = lat.rank
    if d:
        cols = np.linalg.norm(b0, axis=0)
        if np.any(cols == 0) or np.linalg.cond(b0 / cols) > 1e13:
            raise LatticeError("numerically singular basis")
    u = np.eye(d, dtype=np.int64)
    b = b0.copy()
    mu, norms = _gram_schmidt(b)
    k = 1
    steps = 0
    while k < d:
        steps += 1
        if steps > 100000:
            raise LatticeError("LLL did not terminate")
        changed = False
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
            if q:
                u[:, k] -= q * u[:, j]
                mu[k, : j + 1] -= q * mu[j, : j + 1]
                changed = True
        if changed:
            b[:, k] = b0 @ u[:, k]
        if norms[k] >= (delta - mu[k, k - 1] ** 2) * norms[k - 1]:
            k += 1
        else:
            u[:, [k - 1, k]] = u[:, [k, k - 1]]
            b[:, [k - 1, k]] = b[:, [k, k - 1]]
            mu, norms = _gram_schmidt(b)
            k = max(k - 1, 1)
    exact = None
    if lat.exact is not None:
        e = [[sum(row[m] * int(u[m, j]) for m in range(d)) for j in range(d)] for row in lat.exact]
        exact = tuple(map(tuple, e))
        b = np.array(e, dtype=float)
    return Reduced(LatticeBasis(b, exact), u)


def _enumerate(r_mat: np.ndarray, radius2: float):
    """Yield integer coefficient vectors x != 0 with ||R x||^2 <= radius2 (R upper triangular)."""
    d = r_mat.shape[0]
    diag = np.diag(r_mat)
    x = np.zeros(d, dtype=np.int64)
    out = []

    def rec(i: int, partial: float):
        center = -sum(r_mat[i, j] * x[j] for j in range(i + 1, d)) / diag[i]
        rem = radius2 - partial
        if rem < 0:
            return
        half = math.sqrt(rem) / abs(diag[i])
        lo, hi = math.ceil(center - half), math.floor(center + half)
        for xi in range(lo, hi + 1):
            x[i] = xi
            val = diag[i] * (xi - center)
            p = partial + val * val
            if p > radius2:
                continue
            if i == 0:
                if x.any():
                    out.append(x.copy())
                    if len(out) > COUNT_GUARD:
                        raise LatticeError("point count exceeds guard")
            else:
                rec(i - 1, p)
        x[i] = 0

    if d:
        rec(d - 1, 0.0)
    return out


def _points_within(lat: LatticeBasis, radius: float) -> tuple[Reduced, list[np.ndarray]]:
    if lat.rank > MAX_ENUM_RANK:
        raise LatticeError(f"rank {lat.rank} exceeds enumeration limit {MAX_ENUM_RANK}")
    red = lll_reduce(lat)
    _, r_mat = np.linalg.qr(red.lattice.basis)
    r2 = (radius * (1 + RADIUS_INFLATION)) ** 2
    return red, _enumerate(r_mat, r2)


def _canonical(c: tuple[int, ...]) -> tuple[int, ...]:
    for x in c:
        if x:
            return c if x > 0 else tuple(-y for y in c)
    return c


@dataclass(frozen=True)
class ShortestVector:
    vector: np.ndarray
    coeffs: tuple[int, ...]  # coefficients on the original basis
    norm: float
    exact_norm2: int | None


def shortest_vector(lat: LatticeBasis) -> ShortestVector:
    """Exact minimizer; among ties the sign-normalized, lexicographically smallest coefficient vector."""
    if lat.rank == 0:
        raise LatticeError("rank zero lattice")
    if lat.rank > MAX_ENUM_RANK:
        raise LatticeError(f"rank {lat.rank} exceeds enumeration limit {MAX_ENUM_RANK}")
    red = lll_reduce(lat)
    first = float(np.linalg.norm(red.lattice.basis[:, 0]))
    _, r_mat = np.linalg.qr(red.lattice.basis)
    pts = _enumerate(r_mat, (first * (1 + RADIUS_INFLATION)) ** 2)
    cands = []
    for x in pts:
        c = tuple(int(v) for v in red.transform @ x)
        cands.append(_canonical(c))
    cands = sorted(set(cands))
    if lat.exact is not None:
        scored = [(lat.exact_norm2(c), c) for c in cands]
        best = min(s for s, _ in scored)
        winners = [c for s, c in scored if s == best]
    else:
        scored = [(float(np.linalg.norm(lat.vector(c))), c) for c in cands]
        best_f = min(s for s, _ in scored)
        winners = [c for s, c in scored if s <= best_f * (1 + RADIUS_INFLATION)]
    c = min(winners)
    vec = lat.vector(c)
    n2 = lat.exact_norm2(c)
    norm = math.sqrt(n2) if n2 is not None else float(np.linalg.norm(vec))
    return ShortestVector(vec, c, norm, n2)


def systole(lat: LatticeBasis) -> float:
    return shortest_vector(lat).norm


def count_points(lat: LatticeBasis, r: float) -> int:
    """Number of nonzero lattice vectors of norm at most r.

    With integer provenance the boundary is decided exactly; otherwise points
    within the inflated radius r(1 + 1e-9) are counted.
    """
    if r <= 0:
        raise LatticeError("radius must be positive")
    d = lat.rank
    expected = math.pi ** (d / 2) / math.gamma(d / 2 + 1) * r**d / max(lat.det, 1e-300)
    if expected > COUNT_GUARD:
        raise LatticeError(f"expected point count {expected:.3g} exceeds guard")
    red, pts = _points_within(lat, r)
    if lat.exact is None:
        return len(pts)
    bound = Fraction(r) ** 2
    n = 0
    for x in pts:
        c = red.transform @ x
        if lat.exact_norm2(c) <= bound:
            n += 1
    return n


def is_exact_matrix(b) -> bool:
    if isinstance(b, np.ndarray):
        return b.dtype.kind in "iu" or (b.dtype == object and all(isinstance(x, (int, Fraction)) for x in b.flat))
    return all(isinstance(x, (int, Fraction)) for row in b for x in row)


def wedge_norm2_exact(b, xi: Sequence[int]) -> Fraction:
    """Exact squared norm of the wedge of the columns of an integer/rational matrix."""
    rows = [[Fraction(int(x)) if not isinstance(x, Fraction) else x for x in row] for row in np.asarray(b, dtype=object).tolist()]
    cols = [[row[j] for row in rows] for j in xi]
    return gram_det(cols)


def log_wedge_norm(b, xi: Sequence[int]) -> float:
    """log ||b e_xi||; exact Gram determinant for integer/rational b, QR otherwise."""
    xi = list(xi)
    if not xi:
        raise LatticeError("index set must be nonempty")
    if is_exact_matrix(b):
        g = wedge_norm2_exact(b, xi)
        if g <= 0:
            return -math.inf
        return 0.5 * (math.log(g.numerator) - math.log(g.denominator))
    m = np.asarray(b, dtype=complex if np.iscomplexobj(b) else float)[:, xi]
    r = np.linalg.qr(m, mode="r")
    d = np.abs(np.diag(r))
    if np.any(d == 0):
        return -math.inf
    return float(np.sum(np.log(d)))


def wedge_norm(b, xi: Sequence[int]) -> float:
    """||b e_xi|| = sqrt of the Gram determinant of the selected columns."""
    return math.exp(log_wedge_norm(b, xi))


def plucker_norm(b, xi: Sequence[int]) -> float:
    """Same quantity through the explicit vector of maximal minors."""
    from itertools import combinations

    m = np.asarray(b, dtype=float)[:, list(xi)]
    k = m.shape[1]
    total = 0.0
    for rows in combinations(range(m.shape[0]), k):
        total += np.linalg.det(m[list(rows), :]) ** 2
    return math.sqrt(total)
