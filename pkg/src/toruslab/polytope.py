"""Polytopes of non-divergence in the split Lie algebra and their volumes.

A polytope is stored as inequalities ``A s >= b`` in orthonormal chart
coordinates ``s`` of the trace-zero split subspace (see ``TorusSpec.chart``).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

from .lattice import is_exact_matrix, log_wedge_norm
from .linalg import det
from .torus import TorusSpec

FEAS_TOL = 1e-9
DEFAULT_MC_SAMPLES = 10**6


class PolytopeError(ValueError):
    pass


class UnboundedPolytopeError(PolytopeError):
    def __init__(self, direction: np.ndarray):
        super().__init__(f"polytope is unbounded along direction {np.round(direction, 6).tolist()}")
        self.direction = direction


class EmptyPolytopeError(PolytopeError):
    pass


@dataclass(frozen=True)
class HPolytope:
    A: np.ndarray  # (m, d)
    b: np.ndarray  # (m,)
    chart: np.ndarray | None = None  # (N, d) basis of the ambient diagonal subspace
    labels: tuple = ()

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.A, dtype=float))
        b = np.asarray(self.b, dtype=float).reshape(-1)
        if a.shape[0] != b.shape[0]:
            raise PolytopeError("A and b have inconsistent lengths")
        if np.any(np.linalg.norm(a, axis=1) == 0):
            raise PolytopeError("zero functional")
        object.__setattr__(self, "A", a)
        object.__setattr__(self, "b", b)

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    def contains_point(self, s, tol: float = FEAS_TOL) -> bool:
        return bool(np.all(self.A @ np.asarray(s, dtype=float) >= self.b - tol))

    def translate(self, s0) -> "HPolytope":
        """P + s0."""
        return HPolytope(self.A, self.b + self.A @ np.asarray(s0, dtype=float), self.chart, self.labels)


@dataclass(frozen=True)
class PolytopeStats:
    volume: float
    volume_error: float
    chebyshev_radius: float
    vertex_count: int
    bounded: bool


# -- construction -------------------------------------------------------------


def weight_rows(spec: TorusSpec) -> np.ndarray:
    """Chart functionals of the characters chi_xi, one row per weight."""
    c = spec.chart
    return np.array([c[list(w.index), :].sum(axis=0) for w in spec.weight_family]).reshape(-1, c.shape[1])


def build_omega(spec: TorusSpec, B, eps: float) -> HPolytope:
    """Split parameters with ||B exp(t) e_xi|| >= eps for every weight xi."""
    if eps <= 0:
        raise PolytopeError("eps must be positive")
    bf = np.asarray(B, dtype=float)
    if bf.shape != (spec.N, spec.N):
        raise PolytopeError("B has the wrong shape")
    if abs(_det(B) - 1) > 1e-6:
        raise PolytopeError("B must have determinant 1")
    offsets = []
    for w in spec.weight_family:
        ln = log_wedge_norm(B, w.index)
        if not math.isfinite(ln):
            raise PolytopeError(f"degenerate B: ||B e_xi|| = 0 for xi = {w.index}")
        offsets.append(math.log(eps) - ln)
    return HPolytope(weight_rows(spec), np.array(offsets), spec.chart, tuple(w.index for w in spec.weight_family))


def _place_block(b, real: bool) -> np.ndarray:
    b = np.asarray(b, dtype=complex)
    if real:
        if np.max(np.abs(b.imag), initial=0.0) > 1e-12:
            raise PolytopeError("matrix at a real place must be real")
        return b.real
    return np.block([[b.real, -b.imag], [b.imag, b.real]])


def omega_prime_norm(spec: TorusSpec, Bs: Sequence, emb, xi: Sequence[int]) -> float:
    """||B N(e_xi)|| with B acting blockwise on the realified places."""
    from .resscalars import realify

    n = spec.N
    places = emb.places
    if len(Bs) != len(places):
        raise PolytopeError(f"need one matrix per place ({len(places)}), got {len(Bs)}")
    blocks = [_place_block(b, p < emb.r0) for b, p in zip(Bs, places)]
    if any(blk.shape[0] != n * (1 if p < emb.r0 else 2) for blk, p in zip(blocks, places)):
        raise PolytopeError("place matrices have the wrong shape")
    size = sum(blk.shape[0] for blk in blocks)
    big = np.zeros((size, size))
    o = 0
    for blk in blocks:
        k = blk.shape[0]
        big[o : o + k, o : o + k] = blk
        o += k
    cols = []
    for j in xi:
        for k in range(emb.m0):
            x = [0] * (n * emb.m0)
            x[k * n + j] = 1  # w_k e_j in V'(Z)
            cols.append(big @ realify(x, n, emb))
    m = np.array(cols).T
    r = np.linalg.qr(m, mode="r")
    return float(np.prod(np.abs(np.diag(r))))


def build_omega_prime(spec: TorusSpec, Bs: Sequence, eps: float, emb) -> HPolytope:
    """Split parameters with ||B exp(t) N(e_xi)|| >= eps, one matrix of B per place of M.

    The split part acts on N(e_xi) by exp(m0 chi_xi(t)), so the rows are m0 times
    the character rows and the offsets use the norm of the transformed wedge.
    """
    if eps <= 0:
        raise PolytopeError("eps must be positive")
    offsets = []
    for w in spec.weight_family:
        nv = omega_prime_norm(spec, Bs, emb, w.index)
        if not nv > 0:
            raise PolytopeError(f"degenerate B: ||B N(e_xi)|| = 0 for xi = {w.index}")
        offsets.append(math.log(eps) - math.log(nv))
    return HPolytope(emb.m0 * weight_rows(spec), np.array(offsets), spec.chart, tuple(w.index for w in spec.weight_family))


def _det(B) -> float:
    if is_exact_matrix(B):
        return float(det(np.asarray(B, dtype=object).tolist()))
    return float(np.linalg.det(np.asarray(B, dtype=float)))


# -- linear programming helpers ---------------------------------------------


def _lp(c, A_ub, b_ub, bounds):
    return linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")


def recession_direction(P: HPolytope) -> np.ndarray | None:
    """A nonzero r with A r >= 0, or None if the polytope (if nonempty) is bounded."""
    d = P.dim
    for j in range(d):
        for sgn in (1.0, -1.0):
            c = np.zeros(d)
            c[j] = -sgn
            res = _lp(c, -P.A, np.zeros(len(P.b)), [(-1, 1)] * d)
            if res.status == 0 and -res.fun > 1e-9:
                return res.x
    return None


def bounding_box(P: HPolytope) -> np.ndarray:
    """Per-coordinate (min, max) over P; raises on unbounded or empty polytopes."""
    d = P.dim
    box = np.zeros((d, 2))
    for j in range(d):
        for k, sgn in enumerate((1.0, -1.0)):
            c = np.zeros(d)
            c[j] = sgn
            res = _lp(c, -P.A, -P.b, [(None, None)] * d)
            if res.status == 3:
                raise UnboundedPolytopeError(recession_direction(P))
            if res.status == 2:
                raise EmptyPolytopeError("polytope is empty")
            if res.status != 0:
                raise PolytopeError(f"LP failed: {res.message}")
            box[j, k] = sgn * res.fun
    return box


def is_bounded(P: HPolytope) -> bool:
    return recession_direction(P) is None


def inscribed_radius(P: HPolytope) -> float:
    """Chebyshev radius: largest r with a ball of radius r inside P."""
    d = P.dim
    norms = np.linalg.norm(P.A, axis=1)
    c = np.zeros(d + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-P.A, norms[:, None]])
    res = _lp(c, a_ub, -P.b, [(None, None)] * d + [(None, None)])
    if res.status == 3:
        return math.inf
    if res.status != 0:
        raise PolytopeError(f"LP failed: {res.message}")
    r = -res.fun
    if r < -FEAS_TOL * max(1.0, np.abs(P.b).max()):
        raise EmptyPolytopeError(f"polytope is empty (Chebyshev optimum {r:.3e})")
    return max(r, 0.0)


def chebyshev_center(P: HPolytope) -> np.ndarray:
    d = P.dim
    norms = np.linalg.norm(P.A, axis=1)
    c = np.zeros(d + 1)
    c[-1] = -1.0
    res = _lp(c, np.hstack([-P.A, norms[:, None]]), -P.b, [(None, None)] * (d + 1))
    if res.status != 0:
        raise PolytopeError(f"LP failed: {res.message}")
    return res.x[:d]


def contains(outer: HPolytope, inner: HPolytope, tol: float = 1e-9) -> bool:
    """True iff inner is a subset of outer (an empty inner is contained in anything)."""
    d = inner.dim
    for a, b in zip(outer.A, outer.b):
        res = _lp(a, -inner.A, -inner.b, [(None, None)] * d)
        if res.status == 2:
            return True
        if res.status == 3:
            return False
        if res.fun < b - tol * max(1.0, abs(b)):
            return False
    return True


# -- vertices and volume ----------------------------------------------------


def vertices(P: HPolytope, tol: float = 1e-9) -> np.ndarray:
    """All vertices by brute force over d-subsets of facets (desk-scale d)."""
    d = P.dim
    if d == 0:
        return np.zeros((1, 0)) if np.all(P.b <= tol) else np.zeros((0, 0))
    scale = max(1.0, np.abs(P.b).max())
    found: list[np.ndarray] = []
    for rows in itertools.combinations(range(len(P.b)), d):
        a = P.A[list(rows)]
        if abs(np.linalg.det(a)) < 1e-12:
            continue
        v = np.linalg.solve(a, P.b[list(rows)])
        if np.all(P.A @ v >= P.b - tol * scale):
            if not any(np.linalg.norm(v - u) <= 1e-9 * max(1.0, np.linalg.norm(v)) for u in found):
                found.append(v)
    return np.array(found).reshape(len(found), d)


def _angle_sorted(vs: np.ndarray) -> np.ndarray:
    c = vs.mean(axis=0)
    ang = np.arctan2(vs[:, 1] - c[1], vs[:, 0] - c[0])
    return vs[np.argsort(ang)]


def exact_volume(P: HPolytope) -> float:
    """Volume from the vertex set: interval length, shoelace area, or hull triangulation."""
    d = P.dim
    if d > 4:
        raise PolytopeError("exact volume supported for dimension <= 4")
    if d == 0:
        return 1.0 if len(vertices(P)) else 0.0
    if not is_bounded(P):
        raise UnboundedPolytopeError(recession_direction(P))
    vs = vertices(P)
    if len(vs) <= d:
        return 0.0
    if d == 1:
        return float(vs.max() - vs.min())
    if np.linalg.matrix_rank(vs - vs[0], tol=1e-9 * max(1.0, np.abs(vs).max())) < d:
        return 0.0
    if d == 2:
        p = _angle_sorted(vs)
        x, y = p[:, 0], p[:, 1]
        return float(0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))
    try:
        return float(ConvexHull(vs).volume)
    except QhullError:
        return 0.0


def monte_carlo_volume(
    P: HPolytope, n: int = DEFAULT_MC_SAMPLES, seed: int = 0, partitions: int = 1
) -> tuple[float, float]:
    """Rejection sampling in the LP bounding box; returns (volume, standard error).

    Samples are split across ``partitions`` independent streams spawned from
    ``seed``; the result depends on (seed, partitions, n) only.
    """
    box = bounding_box(P)
    widths = box[:, 1] - box[:, 0]
    box_vol = float(np.prod(widths))
    if box_vol == 0:
        return 0.0, 0.0
    streams = np.random.SeedSequence(seed).spawn(partitions)
    sizes = [n // partitions + (1 if k < n % partitions else 0) for k in range(partitions)]
    hits = 0
    chunk = 200_000
    for ss, m in zip(streams, sizes):
        rng = np.random.default_rng(ss)
        left = m
        while left > 0:
            k = min(chunk, left)
            pts = box[:, 0] + widths * rng.random((k, P.dim))
            hits += int(np.count_nonzero(np.all(pts @ P.A.T >= P.b, axis=1)))
            left -= k
    frac = hits / n
    return box_vol * frac, box_vol * math.sqrt(frac * (1 - frac) / n)


def volume(P: HPolytope, method: str = "auto", n: int = DEFAULT_MC_SAMPLES, seed: int = 0, partitions: int = 1) -> tuple[float, float]:
    """(volume, error); exact methods report zero error."""
    if method == "auto":
        method = "exact" if P.dim <= 3 else "montecarlo"
    if method == "exact":
        return exact_volume(P), 0.0
    if method == "montecarlo":
        if P.dim > 8:
            raise PolytopeError("Monte Carlo volume supported for dimension <= 8")
        if not is_bounded(P):
            raise UnboundedPolytopeError(recession_direction(P))
        return monte_carlo_volume(P, n, seed, partitions)
    raise PolytopeError(f"unknown volume method {method!r}")


def stats(P: HPolytope, method: str = "auto", **kw) -> PolytopeStats:
    bounded = is_bounded(P)
    if not bounded:
        raise UnboundedPolytopeError(recession_direction(P))
    vol, err = volume(P, method, **kw)
    return PolytopeStats(vol, err, inscribed_radius(P), len(vertices(P)) if P.dim <= 4 else -1, bounded)


# -- shrink-ratio experiment --------------------------------------------


@dataclass(frozen=True)
class ShrinkRow:
    i: float
    vol: float
    vol_shrunk: float
    ratio: float
    cheb_radius: float


def loglog_schedule(i: float) -> float:
    return math.log(math.log(i))


def shrink_ratio_series(
    spec: TorusSpec,
    sequence: Iterable[tuple[float, object]],
    eps: float,
    omega: Callable[[float], float],
    method: str = "auto",
) -> list[ShrinkRow]:
    """Vol(Omega_{B_i, eps + omega_i}) / Vol(Omega_{B_i, eps}) along a sequence (i, B_i)."""
    rows = []
    for i, B in sequence:
        base = build_omega(spec, B, eps)
        shrunk = build_omega(spec, B, eps + omega(i))
        vol, _ = volume(base, method)
        if vol <= 0:
            raise PolytopeError(f"zero base volume at i={i}")
        try:
            vs, _ = volume(shrunk, method)
        except EmptyPolytopeError:
            vs = 0.0
        rows.append(ShrinkRow(i, vol, vs, vs / vol, inscribed_radius(base)))
    return rows


def sl3_unipotent(i) -> list[list[int]]:
    """u_i with x12 = i, x13 = i^2, x23 = i (integer entries)."""
    i = int(i)
    return [[1, i, i * i], [0, 1, i], [0, 0, 1]]


FAMILIES: dict[str, tuple[int, Callable]] = {"sl3-u": (3, sl3_unipotent)}


def family(name: str) -> tuple[TorusSpec, Callable]:
    from .torus import split_torus

    if name not in FAMILIES:
        raise PolytopeError(f"unknown family {name!r}; known: {sorted(FAMILIES)}")
    n, f = FAMILIES[name]
    return split_torus(n), f
