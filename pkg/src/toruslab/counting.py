"""Integer matrices with a prescribed characteristic polynomial in Euclidean balls.

Counts #{A in M_N(Z) : char poly of A = p, ||A||_F <= R} exactly for N = 2, 3
and compares the growth with c R^alpha (log R)^beta.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .exact import RatPolynomial, verify_factorization

MAX_RADIUS_N2 = 2**24
DEFAULT_OP_CAP = 5 * 10**8


class CountError(ValueError):
    pass


@dataclass(frozen=True)
class CountSpec:
    N: int
    poly: RatPolynomial  # monic with integer coefficients
    radii: tuple[float, ...]
    m0: int = 1

    def __post_init__(self):
        if self.poly.degree != self.N or not self.poly.is_monic():
            raise CountError("polynomial must be monic of degree N")
        if any(c.denominator != 1 for c in self.poly.coeffs):
            raise CountError("polynomial must have integer coefficients")
        if not self.poly.is_squarefree():
            raise CountError("polynomial must be squarefree")
        if any(r <= 0 for r in self.radii) or any(b <= a for a, b in zip(self.radii, self.radii[1:])):
            raise CountError("radii must be positive and increasing")

    @property
    def alpha(self) -> float:
        return self.m0 * self.N * (self.N - 1) / 2

    @property
    def beta(self) -> int:
        return count_beta(self.poly)


def split_rational_factors(p: RatPolynomial) -> list[RatPolynomial]:
    """Factorization into the rational linear part and the remaining factor."""
    roots = p.rational_roots()
    lin = RatPolynomial.from_roots(roots)
    rest = p // lin
    return [f for f in (lin, rest) if f.degree > 0]


def count_beta(p: RatPolynomial) -> int:
    rep = verify_factorization(p, split_rational_factors(p))
    return rep.l0 + rep.a0 - 1


def _coeffs_int(p: RatPolynomial) -> list[int]:
    return [int(c) for c in p.coeffs]


# -- N = 2 -------------------------------------------------------------------


def n2_norms(trace: int, det: int, rmax: float) -> np.ndarray:
    """Sorted squared norms of all [[a,b],[c,d]] with a+d=trace, ad-bc=det, norm <= rmax."""
    if rmax > MAX_RADIUS_N2:
        raise CountError(f"radius {rmax} exceeds the overflow guard {MAX_RADIUS_N2}")
    r2 = _r2_floor(rmax)
    chunks = []
    amax = math.isqrt(r2) + 1
    for a in range(-amax, amax + 1):
        d = trace - a
        base = a * a + d * d
        if base > r2:
            continue
        s = r2 - base
        m = a * d - det
        if m == 0:
            k = math.isqrt(s)
            ks = np.arange(-k, k + 1, dtype=np.int64)
            sq = base + ks * ks
            chunks.append(sq)  # b = 0, c free
            chunks.append(sq[ks != 0])  # c = 0, b free, b != 0
            continue
        am = abs(m)
        # b^2 + (m/b)^2 <= s forces |m|/b <= sqrt(s)
        lo = -(-am // math.isqrt(s)) if s > 0 else am + 1
        hi = math.isqrt(am)
        if lo > hi:
            continue
        bs = np.arange(lo, hi + 1, dtype=np.int64)
        divs = bs[am % bs == 0]
        if divs.size == 0:
            continue
        cs = am // divs
        sq = base + divs * divs + cs * cs
        keep = sq <= r2
        divs, cs, sq = divs[keep], cs[keep], sq[keep]
        mult = np.where(divs == cs, 2, 4)
        chunks.append(np.repeat(sq, mult))
    if not chunks:
        return np.zeros(0, dtype=np.int64)
    return np.sort(np.concatenate(chunks))


def _r2_floor(r: float) -> int:
    fr = Fraction(r) ** 2
    return math.floor(fr)


def enumerate_n2(p: RatPolynomial, R: float) -> int:
    """#{A in M_2(Z): char poly p, ||A|| <= R}."""
    return enumerate_n2_many(p, [R])[0]


def enumerate_n2_many(p: RatPolynomial, radii: Sequence[float]) -> list[int]:
    c = _coeffs_int(p)
    if len(c) != 3 or c[2] != 1:
        raise CountError("expected a monic quadratic")
    if not p.is_squarefree():
        raise CountError("polynomial must be squarefree")
    trace, det = -c[1], c[0]
    norms = n2_norms(trace, det, max(radii))
    return [int(np.searchsorted(norms, _r2_floor(r), side="right")) for r in radii]


def n2_solutions(p: RatPolynomial, R: float) -> list[tuple[int, int, int, int]]:
    """Explicit list of counted matrices (a, b, c, d), for audits."""
    c = _coeffs_int(p)
    trace, det = -c[1], c[0]
    r2 = _r2_floor(R)
    out = []
    amax = math.isqrt(r2) + 1
    for a in range(-amax, amax + 1):
        d = trace - a
        base = a * a + d * d
        if base > r2:
            continue
        s = r2 - base
        m = a * d - det
        k = math.isqrt(s)
        for b in range(-k, k + 1):
            if b == 0:
                if m == 0:
                    out.extend((a, 0, cc, d) for cc in range(-k, k + 1))
                continue
            if m % b == 0:
                cc = m // b
                if b * b + cc * cc <= s:
                    out.append((a, b, cc, d))
    return out


# -- N = 3 -------------------------------------------------------------------


def _pairs_with_product(P: int, s: int) -> int:
    """#{(u, v) in Z^2 : u v = P, u^2 + v^2 <= s}."""
    if s < 0:
        return 0
    if P == 0:
        return 4 * math.isqrt(s) + 1
    ap = abs(P)
    n = 0
    b = 1
    while b * b <= ap:
        if ap % b == 0:
            c = ap // b
            if b * b + c * c <= s:
                n += 2 if b == c else 4
        b += 1
    return n


def _solve_last_pair(alpha: int, beta: int, gamma: int, P: int, s: int) -> int:
    """#{(u, v) : u v = P, alpha u + beta v = gamma, u^2 + v^2 <= s}."""
    if s < 0:
        return 0
    if alpha == 0 and beta == 0:
        return _pairs_with_product(P, s) if gamma == 0 else 0
    if beta == 0:
        alpha, beta = beta, alpha  # symmetric roles of (u, alpha) and (v, beta)
    # v = (gamma - alpha u) / beta, so alpha u^2 - gamma u + P beta = 0
    cands = []
    if alpha == 0:
        if gamma == 0:
            if P != 0:
                return 0
            return 2 * math.isqrt(s) + 1  # v = 0, u free
        if (P * beta) % gamma == 0:
            cands = [(P * beta) // gamma]
    else:
        disc = gamma * gamma - 4 * alpha * P * beta
        if disc < 0:
            return 0
        root = math.isqrt(disc)
        if root * root != disc:
            return 0
        for num in {gamma + root, gamma - root}:
            if num % (2 * alpha) == 0:
                cands.append(num // (2 * alpha))
    n = 0
    for u in cands:
        num = gamma - alpha * u
        if num % beta:
            continue
        v = num // beta
        if u * v == P and u * u + v * v <= s:
            n += 1
    return n


def enumerate_n3(p: RatPolynomial, R: float, op_cap: int = DEFAULT_OP_CAP) -> int:
    """#{A in M_3(Z): char poly p, ||A|| <= R}.

    Six entries are enumerated with partial-norm pruning, a33 is forced by the
    trace and (a23, a32) are solved from the two remaining coefficient equations.
    """
    c = _coeffs_int(p)
    if len(c) != 4 or c[3] != 1:
        raise CountError("expected a monic cubic")
    c1, c2, c3 = -c[2], c[1], -c[0]  # trace, sum of principal 2-minors, determinant
    r2 = _r2_floor(R)
    k = math.isqrt(r2)
    ops = 0
    total = 0
    rng = range(-k, k + 1)
    for a11 in rng:
        s1 = r2 - a11 * a11
        for a22 in rng:
            a33 = c1 - a11 - a22
            s2 = s1 - a22 * a22 - a33 * a33
            if s2 < 0:
                continue
            diag_minors = a11 * a22 + a11 * a33 + a22 * a33
            k2 = math.isqrt(s2)
            for a12 in range(-k2, k2 + 1):
                s3 = s2 - a12 * a12
                k3 = math.isqrt(s3)
                for a21 in range(-k3, k3 + 1):
                    s4 = s3 - a21 * a21
                    k4 = math.isqrt(s4)
                    for a13 in range(-k4, k4 + 1):
                        s5 = s4 - a13 * a13
                        k5 = math.isqrt(s5)
                        ops += 2 * k5 + 1
                        if ops > op_cap:
                            raise CountError(f"operation cap {op_cap} exceeded")
                        base_p = diag_minors - a12 * a21 - c2
                        alpha_pre = a12
                        beta = a13 * a21
                        g0 = c3 - a11 * a22 * a33 + a12 * a21 * a33
                        for a31 in range(-k5, k5 + 1):
                            s6 = s5 - a31 * a31
                            P = base_p - a13 * a31
                            gamma = g0 + a11 * P + a13 * a22 * a31
                            total += _solve_last_pair(alpha_pre * a31, beta, gamma, P, s6)
    return total


def char_poly_int(a: Sequence[Sequence[int]]) -> list[int]:
    """Coefficients (lowest first) of det(x I - A) for an integer matrix, via Faddeev-LeVerrier."""
    n = len(a)
    m = [[Fraction(x) for x in row] for row in a]
    coeffs = [Fraction(0)] * (n + 1)
    coeffs[n] = Fraction(1)
    mk = [[Fraction(0)] * n for _ in range(n)]
    ck = Fraction(1)
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{n-k+1} I
        prod = [[sum(m[i][t] * mk[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        mk = [[prod[i][j] + (ck if i == j else 0) for j in range(n)] for i in range(n)]
        am = [[sum(m[i][t] * mk[t][j] for t in range(n)) for j in range(n)] for i in range(n)]
        ck = -sum(am[i][i] for i in range(n)) / k
        coeffs[n - k] = ck
    return [int(x) for x in coeffs]


# -- reports and asymptotics -------------------------------------------------


@dataclass(frozen=True)
class CountReport:
    spec: CountSpec
    counts: tuple[int, ...]

    @property
    def normalized(self) -> list[float]:
        a, b = self.spec.alpha, self.spec.beta
        return [c / (r**a * math.log(r) ** b) for r, c in zip(self.spec.radii, self.counts)]

    @property
    def doubling_log_ratios(self) -> list[float]:
        """log2 of count(R_{j+1})/count(R_j), per doubling of R (nan where undefined)."""
        out = [math.nan]
        for (r0, c0), (r1, c1) in zip(zip(self.spec.radii, self.counts), zip(self.spec.radii[1:], self.counts[1:])):
            if c0 > 0 and c1 > 0:
                out.append(math.log2(c1 / c0) / math.log2(r1 / r0))
            else:
                out.append(math.nan)
        return out

    def rows(self) -> list[tuple[float, int, float, float]]:
        return list(zip(self.spec.radii, self.counts, self.normalized, self.doubling_log_ratios))


def count(spec: CountSpec) -> CountReport:
    if spec.m0 != 1:
        raise CountError("enumeration is implemented over Q only")
    if spec.N == 2:
        counts = enumerate_n2_many(spec.poly, spec.radii)
    elif spec.N == 3:
        counts = [enumerate_n3(spec.poly, r) for r in spec.radii]
    else:
        raise CountError("N must be 2 or 3")
    return CountReport(spec, tuple(counts))


@dataclass(frozen=True)
class FitReport:
    doubling_log_ratios: tuple[float, ...]
    plateau: float  # max/min of the last k normalized counts
    alpha: float
    beta: int


def fit_asymptotics(report: CountReport, k: int = 4) -> FitReport:
    radii = report.spec.radii
    if len(radii) < 5 or math.log2(radii[-1] / radii[0]) < 4 - 1e-9:
        raise CountError("need at least 5 radii spanning 4 doublings")
    tail = report.normalized[-k:]
    if min(tail) <= 0:
        raise CountError("zero counts in the plateau window")
    return FitReport(tuple(report.doubling_log_ratios), max(tail) / min(tail), report.spec.alpha, report.spec.beta)


def plateau_statistic(values: Sequence[float]) -> float:
    return max(values) / min(values)


@dataclass(frozen=True)
class LogFactorDiagnostic:
    R: float
    growth: float  # [c_hi(4R)/c_lo(4R)] / [c_hi(R)/c_lo(R)]
    expected: float  # log(4R)/log(R)
    exponent: float  # log(growth)/log(expected); 1 means exactly one extra log factor


def log_factor_diagnostic(
    radii: Sequence[float], counts_hi: Sequence[int], counts_lo: Sequence[int], step: int = 2
) -> list[LogFactorDiagnostic]:
    """Compare two count series whose beta differs by one, over R -> 4R steps.

    ``step`` is the number of list positions per quadrupling (2 for doubling radii).
    """
    out = []
    for j in range(len(radii) - step):
        r0, r1 = radii[j], radii[j + step]
        g = (counts_hi[j + step] / counts_lo[j + step]) / (counts_hi[j] / counts_lo[j])
        e = math.log(r1) / math.log(r0)
        out.append(LogFactorDiagnostic(r0, g, e, math.log(g) / math.log(e)))
    return out
