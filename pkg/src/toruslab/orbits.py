"""Translated torus orbits: sampling, systole surveys, Siegel statistics,
bounded subalgebras, centralizers, and the three worked example tori.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from . import linalg
from .exact import NumberField, RatPolynomial
from .lattice import LatticeBasis, count_points, systole
from .polytope import build_omega, vertices
from .torus import LieParam, TorusSpec, lie_algebra_basis, sample_lie, torus_element

DET_TOL = 1e-8
GROWTH_TOL = 0.1


class OrbitError(ValueError):
    pass


# -- sampling -------------------------------------------------------------


@dataclass
class OrbitSample:
    spec: TorusSpec
    g: np.ndarray
    box: tuple[tuple[float, float], ...]
    seed: int
    params: list[LieParam]
    bases: list[np.ndarray]

    @property
    def n(self) -> int:
        return len(self.bases)

    def lattice(self, k: int) -> LatticeBasis:
        return LatticeBasis(self.bases[k])

    @cached_property
    def systoles(self) -> np.ndarray:
        return np.array([systole(self.lattice(k)) for k in range(self.n)])

    def counts(self, r: float) -> np.ndarray:
        return np.array([count_points(self.lattice(k), r) for k in range(self.n)])


def sample_orbit(
    spec: TorusSpec,
    g,
    box: Sequence[tuple[float, float]],
    n: int,
    seed: int,
    partitions: int = 1,
) -> OrbitSample:
    """n lattices g exp(t) Z^N with t uniform in the free-coordinate box."""
    if n < 1:
        raise OrbitError("n must be positive")
    g = np.asarray(g, dtype=float)
    streams = np.random.SeedSequence(seed).spawn(partitions)
    sizes = [n // partitions + (1 if k < n % partitions else 0) for k in range(partitions)]
    params, bases = [], []
    for ss, m in zip(streams, sizes):
        rng = np.random.default_rng(ss)
        for _ in range(m):
            t = sample_lie(spec, box, rng)
            b = g @ torus_element(spec, t)
            d = np.linalg.det(b)
            if abs(d - 1) > DET_TOL:
                raise OrbitError(f"sampled basis has determinant {d!r}")
            params.append(t)
            bases.append(b)
    return OrbitSample(spec, g, tuple(map(tuple, box)), seed, params, bases)


def split_box_from_omega(spec: TorusSpec, B, eps: float) -> list[tuple[float, float]]:
    """Bounding intervals of Omega_{B,eps} in the free split coordinates."""
    P = build_omega(spec, B, eps)
    vs = vertices(P)
    if len(vs) == 0:
        raise OrbitError("polytope is empty")
    free = np.array([spec.chart_to_split(v)[: spec.n_vertices - 1] for v in vs]).reshape(len(vs), -1)
    return [(float(free[:, k].min()), float(free[:, k].max())) for k in range(free.shape[1])]


@dataclass(frozen=True)
class SurveyResult:
    fraction: float
    stderr: float


def systole_survey(sample: OrbitSample, eps: float) -> SurveyResult:
    s = sample.systoles
    f = float(np.mean(s < eps))
    return SurveyResult(f, math.sqrt(f * (1 - f) / len(s)))


def ball_volume(n: int, r: float) -> float:
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1) * r**n


@dataclass(frozen=True)
class SiegelResult:
    mean: float
    stderr: float
    ball_volume: float


def siegel_statistic(sample: OrbitSample, r: float) -> SiegelResult:
    if sample.spec.N > 5:
        raise OrbitError("rank at most 5 supported")
    c = sample.counts(r).astype(float)
    se = float(c.std(ddof=1) / math.sqrt(len(c))) if len(c) > 1 else 0.0
    return SiegelResult(float(c.mean()), se, ball_volume(sample.spec.N, r))


# -- bounded subalgebra ---------------------------------------------------


def _as_float(m) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in m])


def rationalize(v: np.ndarray, max_den: int = 1000) -> list[Fraction]:
    """Rational vector proportional to v (largest entry scaled to 1)."""
    k = int(np.argmax(np.abs(v)))
    w = v / v[k]
    return [Fraction(float(x)).limit_denominator(max_den) for x in w]


@dataclass(frozen=True)
class SubalgebraReport:
    dim: int
    basis: np.ndarray  # rows: coefficient vectors on the Lie(T) basis
    matrices: list  # exact rational matrices spanning the bounded subspace
    exponents: tuple[float, ...]  # growth exponent per singular direction
    lie_basis: list  # rational basis of Lie(T) used for coefficients


def bounded_subalgebra(
    g_sampler: Callable[[float], object],
    spec: TorusSpec,
    sample_indices: Sequence[float],
    growth_tol: float = GROWTH_TOL,
) -> SubalgebraReport:
    """Directions Y in Lie(T) whose images Ad(g_i) Y stay bounded."""
    idx = [float(i) for i in sample_indices]
    if len(idx) < 4 or math.log10(idx[-1] / idx[0]) < 3:
        raise OrbitError("need at least 4 sample indices spanning 3 decades")
    lie = lie_algebra_basis(spec)
    ys = [_as_float(m) for m in lie]
    maps = []
    for i in idx:
        g = np.asarray(g_sampler(i), dtype=float)
        ginv = np.linalg.inv(g)
        maps.append(np.array([(g @ y @ ginv).reshape(-1) for y in ys]).T)
    _, _, vt = np.linalg.svd(maps[-1])
    exps = []
    x = np.log(idx)
    for v in vt:
        norms = np.array([np.linalg.norm(m @ v) for m in maps])
        if np.any(norms <= 0):
            raise OrbitError("degenerate adjoint image")
        slope = np.polyfit(x, np.log(norms), 1)[0]
        exps.append(float(slope))
    keep = [k for k, e in enumerate(exps) if e < growth_tol]
    basis = vt[keep] if keep else np.zeros((0, len(ys)))
    mats = []
    for v in basis:
        coeffs = rationalize(v)
        mats.append(
            [[sum((c * m[r][s] for c, m in zip(coeffs, lie)), Fraction(0)) for s in range(spec.N)] for r in range(spec.N)]
        )
    return SubalgebraReport(len(keep), basis, mats, tuple(exps), lie)


# -- centralizers -----------------------------------------------------------


def centralizer_algebra(generators: Sequence, n: int | None = None) -> list[list[list[Fraction]]]:
    """Exact basis of {X in sl_n : X A = A X for every generator A}."""
    gens = [linalg.to_fraction_matrix(a) for a in generators]
    if n is None:
        if not gens:
            raise OrbitError("dimension needed when no generators are given")
        n = len(gens[0])
    rows = []
    for a in gens:
        for r in range(n):
            for c in range(n):
                # (XA - AX)[r][c] = sum_k X[r][k] A[k][c] - A[r][k] X[k][c]
                row = [Fraction(0)] * (n * n)
                for k in range(n):
                    row[r * n + k] += a[k][c]
                    row[k * n + c] -= a[r][k]
                if any(row):
                    rows.append(row)
    rows.append([Fraction(int(i == j)) for i in range(n) for j in range(n)])
    null = linalg.nullspace(rows, n * n)
    return [[v[r * n : (r + 1) * n] for r in range(n)] for v in null]


def _flatten(ms) -> list[list[Fraction]]:
    return [[Fraction(x) for row in m for x in row] for m in ms]


def center_check(generators: Sequence, n: int) -> bool:
    """Center of the centralizer of the generators (within sl_n) equals their span."""
    h = centralizer_algebra(generators, n)
    z = centralizer_algebra(h, n) if h else centralizer_algebra([], n)
    gens = [g for g in _flatten(generators) if any(g)]
    return linalg.span_equal(_flatten(z), gens)


# -- worked examples --------------------------------------------------------


def quadratic_block_field(p: int) -> NumberField:
    return NumberField(RatPolynomial([-p, 0, 1]))


def example_torus(name: str, p: int = 2, q: int = 3) -> TorusSpec:
    """Tori of the three worked examples, blocks [[b, c], [p c, b]] in basis (theta, 1)."""
    if name == "ex1":
        k = quadratic_block_field(p)
        return TorusSpec(N=3, l0=1, fields=(k,), bases=((k.gen(), k.one()),), positions=(2, 0, 1))
    if name == "ex2":
        k1, k2 = quadratic_block_field(p), quadratic_block_field(q)
        return TorusSpec(N=4, l0=0, fields=(k1, k2), bases=((k1.gen(), k1.one()), (k2.gen(), k2.one())))
    if name == "ex3":
        k = quadratic_block_field(2)
        b = (k.gen(), k.one())
        return TorusSpec(N=4, l0=0, fields=(k, k), bases=(b, b))
    raise OrbitError(f"unknown example {name!r}")


def translator_ex1(d, e):
    return [[1, 0, d], [0, 1, e], [0, 0, 1]]


F0_EX2 = ((1, 2), (3, 5))


def translator_ex2(i, f0=F0_EX2):
    f = [[i * x for x in row] for row in f0]
    return [[1, 0, f[0][0], f[0][1]], [0, 1, f[1][0], f[1][1]], [0, 0, 1, 0], [0, 0, 0, 1]]


def translator_ex3(f, h):
    return [[1, 0, f, h], [0, 1, 2 * h, f], [0, 0, 1, 0], [0, 0, 0, 1]]


def sequence(name: str) -> Callable[[float], list]:
    """Translator sequences i -> g_i used for the examples."""
    if name == "ex1":
        return lambda i: translator_ex1(i, i)
    if name == "ex2":
        return lambda i: translator_ex2(i)
    if name == "ex3":
        return lambda i: translator_ex3(i, i)
    raise OrbitError(f"unknown example {name!r}")


def _block_diag(*blocks):
    n = sum(len(b) for b in blocks)
    out = [[Fraction(0)] * n for _ in range(n)]
    s = 0
    for b in blocks:
        for r, row in enumerate(b):
            for c, x in enumerate(row):
                out[s + r][s + c] = Fraction(x)
        s += len(b)
    return out


def pell_unit(p: int, limit: int = 10**5) -> tuple[int, int]:
    """Smallest (b, c), c > 0, with b^2 - p c^2 = 1 (found by search)."""
    if p < 0:
        raise OrbitError("norm-one units of infinite order need p > 0")
    for c in range(1, limit):
        b2 = 1 + p * c * c
        b = math.isqrt(b2)
        if b * b == b2:
            return b, c
    raise OrbitError(f"no unit found for p={p} below c={limit}")


def _quad_block(b, c, p):
    return [[b, c], [p * c, b]]


def _conj(g, s):
    return linalg.matmul(linalg.matmul(g, s), linalg.inverse(g))


def _max_abs(m) -> float:
    return float(max(abs(x) for row in m for x in row))


@dataclass
class ExampleReport:
    name: str
    indices: list
    elements: dict = field(default_factory=dict)  # label -> rational matrix
    exponents: dict = field(default_factory=dict)  # label -> growth exponent of ||g s g^-1||
    formula_residual: float = 0.0  # closed-form conjugation vs direct product
    commutation_residual: float | None = None  # ex3: max |g s g^-1 - s| over s in S
    ok: bool = False

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "indices": [float(i) for i in self.indices],
            "exponents": self.exponents,
            "formula_residual": self.formula_residual,
            "commutation_residual": self.commutation_residual,
            "ok": self.ok,
        }


def _growth(g_of_i, s, indices) -> float:
    norms = [math.sqrt(float(sum(x * x for row in _conj(g_of_i(i), s) for x in row))) for i in indices]
    from .graph import growth_exponent

    return growth_exponent(indices, norms)


def example_suite(name: str, indices: Sequence[int] = (10, 100, 1000, 10**4, 10**5, 10**6), p: int = 2, q: int = 3) -> ExampleReport:
    """Exact conjugation experiments on the three worked examples."""
    idx = [int(i) for i in indices]
    rep = ExampleReport(name, idx)
    g_of_i = lambda i: linalg.to_fraction_matrix(sequence(name)(i))
    if name == "ex1":
        g_of_i = lambda i: linalg.to_fraction_matrix(translator_ex1(i, i))
        ub, uc = pell_unit(p)
        rep.elements = {
            "split": _block_diag(_quad_block(2, 0, p), [[Fraction(1, 4)]]),
            "anisotropic": _block_diag(_quad_block(ub, uc, p), [[1]]),
            "mixed": _block_diag(_quad_block(2 * ub, 2 * uc, p), [[Fraction(1, 4)]]),
        }
        res = 0.0
        for s in rep.elements.values():
            b, c, a = s[0][0], s[0][1], s[2][2]
            for i in idx:
                direct = _conj(g_of_i(i), s)
                xy = [(a - b) * i - c * i, -p * c * i + (a - b) * i]
                res = max(res, float(abs(direct[0][2] - xy[0]) + abs(direct[1][2] - xy[1])))
        rep.formula_residual = res
    elif name == "ex2":
        b, d = Fraction(2), Fraction(1, 2)
        rep.elements = {
            "split": _block_diag([[b, 0], [0, b]], [[d, 0], [0, d]]),
            "anisotropic-p": _block_diag(_quad_block(*pell_unit(p), p), [[1, 0], [0, 1]]),
            "anisotropic-q": _block_diag([[1, 0], [0, 1]], _quad_block(*pell_unit(q), q)),
        }
        s = rep.elements["split"]
        res = 0.0
        for i in idx:
            direct = _conj(g_of_i(i), s)
            f = [[i * x for x in row] for row in F0_EX2]
            res = max(res, max(float(abs(direct[r][2 + c] - (d - b) * f[r][c])) for r in range(2) for c in range(2)))
        rep.formula_residual = res
    elif name == "ex3":
        in_s = {"S": _block_diag(_quad_block(3, 2, 2), _quad_block(3, 2, 2)), "S-inverse": _block_diag(_quad_block(3, -2, 2), _quad_block(3, -2, 2))}
        outside = {
            "T-not-S-a": _block_diag(_quad_block(3, 2, 2), [[1, 0], [0, 1]]),
            "T-not-S-b": _block_diag([[1, 0], [0, 1]], _quad_block(3, 2, 2)),
            "T-not-S-c": _block_diag(_quad_block(3, 2, 2), _quad_block(17, 12, 2)),
        }
        comm = 0.0
        for s in in_s.values():
            for i in idx:
                comm = max(comm, _max_abs(linalg.matsub(_conj(g_of_i(i), s), s)))
        rep.commutation_residual = comm
        rep.elements = outside
    else:
        raise OrbitError(f"unknown example {name!r}")
    for label, s in rep.elements.items():
        if linalg.det(s) != 1:
            raise OrbitError(f"element {label} does not have determinant 1")
        rep.exponents[label] = _growth(g_of_i, s, idx)
    rep.ok = all(abs(e - 1) < 0.05 for e in rep.exponents.values()) and rep.formula_residual == 0
    if rep.commutation_residual is not None:
        rep.ok = rep.ok and rep.commutation_residual == 0
    return rep


# -- equidistribution experiment -------------------------------------------


def unit_box(p: int) -> tuple[float, float]:
    """One period of log|u| for the norm-one units of Z[sqrt p]."""
    b, c = pell_unit(p)
    return (0.0, math.log(b + c * math.sqrt(p)))


@dataclass(frozen=True)
class EquidistRow:
    index: float
    samples: int
    systole_fraction: float
    siegel_mean: float
    siegel_stderr: float
    ball_volume: float

    @property
    def relative_error(self) -> float:
        return abs(self.siegel_mean / self.ball_volume - 1)


def example1_orbit(index: float, eps: float, n: int, seed: int, p: int = 2, partitions: int = 1) -> OrbitSample:
    """Example 1 torus translated by (d, e) = (index, index), split part inside Omega^s_{g, eps}."""
    spec = example_torus("ex1", p)
    g = np.array(translator_ex1(index, index), dtype=float)
    box = split_box_from_omega(spec, translator_ex1(int(index), int(index)), eps) + [unit_box(p)]
    return sample_orbit(spec, g, box, n, seed, partitions)


def equidist_run(
    index: float, eps: float = 0.1, n: int = 10**4, seed: int = 0, r: float = 2.0, delta: float = 1e-3, partitions: int = 1
) -> EquidistRow:
    s = example1_orbit(index, eps, n, seed, partitions=partitions)
    st = siegel_statistic(s, r)
    return EquidistRow(float(index), n, systole_survey(s, delta).fraction, st.mean, st.stderr, st.ball_volume)
