"""Independent brute-force oracles shared by the unit and acceptance tests."""
import itertools
import math

import numpy as np


def brute_min_norm2(rows):
    """Smallest squared norm of a nonzero vector of the integer lattice spanned by the columns.

    Coefficients are bounded rigorously: |c_j| <= ||row_j(B^-1)|| * (shortest column norm).
    """
    b = np.array(rows, dtype=np.int64)
    n = b.shape[0]
    best = int(min((b[:, j] ** 2).sum() for j in range(n)))
    inv = np.linalg.inv(b.astype(float))
    bounds = [int(math.floor(np.linalg.norm(inv[j]) * math.sqrt(best) * (1 + 1e-9))) for j in range(n)]
    # enumerate the last coordinate vectorially
    last = np.arange(-bounds[-1], bounds[-1] + 1, dtype=np.int64)
    for head in itertools.product(*(range(-k, k + 1) for k in bounds[:-1])):
        base = b[:, :-1] @ np.array(head, dtype=np.int64) if n > 1 else np.zeros(n, dtype=np.int64)
        v = base[:, None] + b[:, -1:] * last[None, :]
        n2 = (v * v).sum(axis=0)
        if not any(head):
            n2 = n2[last != 0]
        if n2.size:
            best = min(best, int(n2.min()))
    return best, bounds


def naive_n2_norms(trace, det, rmax):
    """Squared norms of all 2x2 integer matrices in [-rmax, rmax]^4 with the given trace and determinant."""
    r = np.arange(-rmax, rmax + 1, dtype=np.int64)
    b, c, d = np.meshgrid(r, r, r, indexing="ij")
    out = []
    for a in r:
        mask = (a + d == trace) & (a * d - b * c == det)
        out.append(a * a + b[mask] ** 2 + c[mask] ** 2 + d[mask] ** 2)
    return np.sort(np.concatenate(out))


def naive_n2_count(trace, det, radii):
    rmax = int(math.floor(max(radii)))
    norms = naive_n2_norms(trace, det, rmax)
    return [int(np.searchsorted(norms, math.floor(r * r), side="right")) for r in radii]


def _ball_points(dim, r2):
    k = math.isqrt(r2)
    pts = np.array(list(itertools.product(range(-k, k + 1), repeat=dim)), dtype=np.int64)
    n2 = (pts * pts).sum(axis=1)
    keep = n2 <= r2
    order = np.argsort(n2[keep], kind="stable")
    return pts[keep][order], n2[keep][order]


def naive_n3_count(coeffs_low_first, R):
    """All 3x3 integer matrices of norm <= R with det(xI - A) = given monic cubic.

    Nine entries: (a11, a12, a21, a22, a33) in an outer loop, the remaining four
    vectorized; every coefficient is recomputed from scratch.
    """
    c0, c1, c2, _ = coeffs_low_first
    r2 = int(math.floor(R * R))
    outer, outer_n2 = _ball_points(5, r2)
    inner, inner_n2 = _ball_points(4, r2)
    a13, a23, a31, a32 = inner.T
    total = 0
    for (a11, a12, a21, a22, a33), n2 in zip(outer.tolist(), outer_n2.tolist()):
        m = np.searchsorted(inner_n2, r2 - n2, side="right")
        if m == 0:
            continue
        x13, x23, x31, x32 = a13[:m], a23[:m], a31[:m], a32[:m]
        tr = a11 + a22 + a33
        minors = a11 * a22 - a12 * a21 + a11 * a33 - x13 * x31 + a22 * a33 - x23 * x32
        det = (
            a11 * (a22 * a33 - x23 * x32)
            - a12 * (a21 * a33 - x23 * x31)
            + x13 * (a21 * x32 - a22 * x31)
        )
        # det(xI - A) = x^3 - tr x^2 + minors x - det
        ok = (-tr == c2) & (minors == c1) & (-det == c0)
        total += int(np.count_nonzero(ok))
    return total


def ambient_min_norm2(rows, start=4):
    """Shortest squared norm in the integer lattice spanned by the columns, by scanning Z^d.

    The lattice is a sublattice of Z^d, so its shortest vector is the smallest-norm
    integer point x with adj(B) x = 0 mod det(B). Balls are scanned with growing radius.
    """
    import sympy

    m = sympy.Matrix(rows)
    det = abs(int(m.det()))
    if det == 0:
        raise ValueError("singular basis")
    adj = np.array(m.adjugate().tolist(), dtype=np.int64) % det
    d = m.shape[0]
    r2 = start
    while True:
        k = math.isqrt(r2)
        grid = np.stack(np.meshgrid(*[np.arange(-k, k + 1, dtype=np.int64)] * d, indexing="ij"), -1).reshape(-1, d)
        n2 = (grid * grid).sum(axis=1)
        keep = (n2 > 0) & (n2 <= r2)
        pts, n2 = grid[keep], n2[keep]
        hit = np.all((pts @ adj.T) % det == 0, axis=1)
        if hit.any():
            return int(n2[hit].min())
        r2 *= 2
