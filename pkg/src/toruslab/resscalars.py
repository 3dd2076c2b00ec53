"""Restriction of scalars from a number field M down to Q.

A vector v over Z[theta] of length N maps to an integer vector of length
N * m0 whose coordinate (k, j), stored at position k * N + j, is the k-th
power-basis coordinate of v_j. The norm map sends v_1 ^ ... ^ v_a to the wedge
of the vectors w_k * v_i (i outer, k inner), where w is the power basis.

Real geometry on V' = R^N (x) (M (x) R) uses the realification: a real place
contributes tau(.) in R^N and a complex place contributes (Re, Im) of
tau(.) in R^{2N}.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Sequence

import numpy as np

from .exact import FieldElement, NumberField, RatPolynomial
from .linalg import bareiss_det, gram_det


class IntegralityError(ValueError):
    pass


class DeterminantError(ValueError):
    pass


def rational_field(precision: int = 30) -> NumberField:
    """Q presented as Q[x]/(x)."""
    return NumberField(RatPolynomial.x(), precision)


@dataclass(frozen=True)
class GeometricEmbedding:
    M: NumberField

    @property
    def m0(self) -> int:
        return self.M.degree

    @property
    def r0(self) -> int:
        return self.M.r

    @property
    def s0(self) -> int:
        return self.M.s

    @cached_property
    def table(self) -> tuple[tuple[int, ...], ...]:
        """Integer power-basis coordinates of theta^k, k < 2 m0 - 1."""
        tab = self.M._mult_table
        if any(c.denominator != 1 for row in tab for c in row):
            raise IntegralityError("defining polynomial must have integer coefficients")
        return tuple(tuple(int(c) for c in row) for row in tab)

    @cached_property
    def embedding_matrix(self) -> np.ndarray:
        """(tau_k(w_j)) with rows embeddings (in NumberField order) and columns power basis."""
        roots = self.M.roots_complex()
        return np.array([[z**j for j in range(self.m0)] for z in roots], dtype=complex)

    @cached_property
    def abs_det(self) -> float:
        """|det(tau_k(w_j))| = sqrt(|disc Z[theta]|)."""
        return float(abs(np.linalg.det(self.embedding_matrix))) if self.m0 > 1 else 1.0

    @cached_property
    def places(self) -> tuple[int, ...]:
        """Embedding index for each place: all real ones, then one per complex pair."""
        r, s = self.r0, self.s0
        return tuple(range(r)) + tuple(r + 2 * k for k in range(s))

    @cached_property
    def realification(self) -> np.ndarray:
        """(m0 x m0) real matrix; row blocks are places, column k is w_k."""
        e = self.embedding_matrix
        rows = []
        for p in self.places:
            if p < self.r0:
                rows.append(e[p].real)
            else:
                rows.append(e[p].real)
                rows.append(e[p].imag)
        return np.array(rows)

    @property
    def c_w(self) -> float:
        """Constant with ||N v|| = c_w * prod over embeddings of ||tau v||."""
        return self.abs_det / 2**self.s0

    @property
    def kappa(self) -> float:
        """Analytic constant with ||N v|| <= kappa ||v'||^m0 for every v."""
        return self.abs_det * self.m0 ** (-self.m0 / 2)

    # -- integer arithmetic in Z[theta] --------------------------------
    def mul(self, a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
        out = [0] * self.m0
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        for k, t in enumerate(self.table[i + j]):
                            if t:
                                out[k] += x * y * t
        return tuple(out)

    def to_int(self, x) -> tuple[int, ...]:
        if isinstance(x, FieldElement):
            if x.owner != self.M:
                raise IntegralityError("element belongs to another field")
            cs = x.coords
        elif isinstance(x, (int, Fraction)):
            cs = (Fraction(x),) + (Fraction(0),) * (self.m0 - 1)
        else:
            cs = tuple(Fraction(c) for c in x)
            cs = cs + (Fraction(0),) * (self.m0 - len(cs))
        if any(Fraction(c).denominator != 1 for c in cs):
            raise IntegralityError(f"entry {x!r} is not in Z[theta]")
        return tuple(int(c) for c in cs)

    def vec(self, v: Sequence) -> list[tuple[int, ...]]:
        return [self.to_int(x) for x in v]

    def embed_value(self, a: Sequence[int], k: int) -> complex:
        z = self.M.roots_complex()[k]
        return sum(c * z**j for j, c in enumerate(a))


# -- geometric embedding and norm map -------------------------------------


def geom_embed(v: Sequence, emb: GeometricEmbedding) -> list[int]:
    """Integer coordinates of v' in the basis (w_k e_j)', position k * N + j."""
    ints = emb.vec(v)
    n = len(ints)
    out = [0] * (n * emb.m0)
    for j, a in enumerate(ints):
        for k in range(emb.m0):
            out[k * n + j] = a[k]
    return out


def realify(x: Sequence, n: int, emb: GeometricEmbedding) -> np.ndarray:
    """Real image of an integer V'(Z) vector: concatenated place components."""
    c = np.asarray(x, dtype=float).reshape(emb.m0, n)  # row k holds the w_k coefficients
    return (emb.realification @ c).reshape(-1)


@dataclass(frozen=True)
class WedgeVector:
    grade: int
    dim: int
    coords: dict  # sorted index tuple -> int (nonzero entries only)

    def to_json(self) -> dict:
        return {
            "grade": self.grade,
            "dim": self.dim,
            "coords": {",".join(map(str, k)): str(v) for k, v in sorted(self.coords.items())},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    @classmethod
    def from_json(cls, data: dict) -> "WedgeVector":
        coords = {tuple(int(i) for i in k.split(",")): int(v) for k, v in data["coords"].items()}
        return cls(data["grade"], data["dim"], coords)

    def __neg__(self) -> "WedgeVector":
        return WedgeVector(self.grade, self.dim, {k: -v for k, v in self.coords.items()})


def _norm_columns(vs: Sequence[Sequence], emb: GeometricEmbedding) -> list[list[int]]:
    cols = []
    for v in vs:
        ints = emb.vec(v)
        for k in range(emb.m0):
            wk = tuple(int(j == k) for j in range(emb.m0))
            cols.append(geom_embed([emb.mul(wk, a) for a in ints], emb))
    return cols


def wedge_of_columns(cols: Sequence[Sequence[int]]) -> WedgeVector:
    """Exact Plucker coordinates of the wedge of integer column vectors."""
    k = len(cols)
    dim = len(cols[0]) if cols else 0
    coords = {}
    for rows in combinations(range(dim), k):
        d = bareiss_det([[cols[c][r] for c in range(k)] for r in rows])
        if d:
            coords[rows] = d
    return WedgeVector(k, dim, coords)


def norm_map(vs: Sequence[Sequence], emb: GeometricEmbedding) -> WedgeVector:
    """N(v_1 ^ ... ^ v_a) as an exact integer wedge of grade a * m0."""
    if not vs:
        raise ValueError("need at least one vector")
    return wedge_of_columns(_norm_columns(vs, emb))


def wedge_metric_norm(cols: Sequence[Sequence[int]], n: int, emb: GeometricEmbedding) -> float:
    """||x_1 ^ ... ^ x_k|| for V'(Z) vectors under the product Euclidean metric."""
    if not cols:
        return 1.0
    m = np.array([realify(c, n, emb) for c in cols]).T
    r = np.linalg.qr(m, mode="r")
    return float(np.prod(np.abs(np.diag(r))))


def norm_map_length(vs: Sequence[Sequence], emb: GeometricEmbedding) -> float:
    n = len(vs[0])
    return wedge_metric_norm(_norm_columns(vs, emb), n, emb)


@dataclass(frozen=True)
class Covolume:
    value: float
    degenerate: bool


def covolume(vectors: Sequence[Sequence[int]], emb: GeometricEmbedding | None = None, n: int | None = None) -> Covolume:
    """sqrt of the Gram determinant of V'(Z) vectors; plain Euclidean when emb is None."""
    if emb is None or emb.m0 == 1:
        g = gram_det([[Fraction(int(x)) for x in v] for v in vectors])
        return Covolume(math.sqrt(float(g)), g == 0)
    n = n if n is not None else len(vectors[0]) // emb.m0
    m = np.array([realify(v, n, emb) for v in vectors]).T
    g = float(np.linalg.det(m.T @ m))
    scale = float(np.prod(np.sum(m * m, axis=0)))
    degenerate = abs(g) <= 1e-12 * scale
    return Covolume(0.0 if degenerate else math.sqrt(max(g, 0.0)), degenerate)


MARGIN_RTOL = 1e-12


@dataclass(frozen=True)
class Margin:
    ratio: float
    bound: float

    @property
    def within(self) -> bool:
        """ratio <= bound up to floating rounding (equality is attained, e.g. at v = e_1)."""
        return self.ratio <= self.bound * (1 + MARGIN_RTOL)


def covolume_decrease_margin(v: Sequence, emb: GeometricEmbedding) -> Margin:
    """||N v|| / ||v'||^m0 together with the analytic bound kappa."""
    ints = emb.vec(v)
    if not any(any(a) for a in ints):
        raise ValueError("zero vector")
    n = len(ints)
    vp = np.linalg.norm(realify(geom_embed(v, emb), n, emb))
    return Margin(float(norm_map_length([v], emb) / vp**emb.m0), emb.kappa)


# -- equivariance -----------------------------------------------------------


def field_det(g: Sequence[Sequence], emb: GeometricEmbedding) -> tuple[int, ...]:
    """Determinant over Z[theta] by permutation expansion (small N)."""
    from itertools import permutations

    n = len(g)
    ints = [emb.vec(row) for row in g]
    total = [0] * emb.m0
    for perm in permutations(range(n)):
        inv = sum(1 for i in range(n) for j in range(i + 1, n) if perm[i] > perm[j])
        prod = emb.to_int(1)
        for i in range(n):
            prod = emb.mul(prod, ints[i][perm[i]])
        sgn = -1 if inv % 2 else 1
        total = [t + sgn * p for t, p in zip(total, prod)]
    return tuple(total)


def restricted_matrix(g: Sequence[Sequence], emb: GeometricEmbedding) -> list[list[int]]:
    """Integer matrix of g' on V'(Z): column k * N + j is (w_k * g e_j)'."""
    n = len(g)
    ints = [emb.vec(row) for row in g]
    cols = []
    for k in range(emb.m0):
        wk = tuple(int(j == k) for j in range(emb.m0))
        for j in range(n):
            col = [emb.mul(wk, ints[i][j]) for i in range(n)]
            cols.append(geom_embed(col, emb))
    return [[cols[c][r] for c in range(len(cols))] for r in range(len(cols))]


def compound_apply(m: Sequence[Sequence[int]], w: WedgeVector) -> WedgeVector:
    """(wedge^k m) applied to w, by Cauchy-Binet with memoized column-prefix minors."""
    k, dim = w.grade, w.dim
    memo: dict[tuple[int, ...], dict[tuple[int, ...], int]] = {(): {(): 1}}

    def minors(prefix: tuple[int, ...]) -> dict[tuple[int, ...], int]:
        if prefix in memo:
            return memo[prefix]
        prev = minors(prefix[:-1])
        last = prefix[-1]
        j = len(prefix)
        out = {}
        for rows in combinations(range(dim), j):
            acc = 0
            for pos, r in enumerate(rows):
                a = m[r][last]
                if a:
                    sub = prev.get(rows[:pos] + rows[pos + 1 :], 0)
                    if sub:
                        acc += (-1) ** (pos + j - 1) * a * sub
            if acc:
                out[rows] = acc
        memo[prefix] = out
        return out

    result: dict[tuple[int, ...], int] = {}
    for cols, y in w.coords.items():
        for rows, d in minors(tuple(cols)).items():
            result[rows] = result.get(rows, 0) + d * y
    return WedgeVector(k, dim, {r: v for r, v in result.items() if v})


def apply_matrix(g: Sequence[Sequence], v: Sequence, emb: GeometricEmbedding) -> list[tuple[int, ...]]:
    ints_g = [emb.vec(row) for row in g]
    ints_v = emb.vec(v)
    out = []
    for row in ints_g:
        acc = [0] * emb.m0
        for a, b in zip(row, ints_v):
            acc = [x + y for x, y in zip(acc, emb.mul(a, b))]
        out.append(tuple(acc))
    return out


def equivariance_check(g: Sequence[Sequence], vs: Sequence[Sequence], emb: GeometricEmbedding) -> bool:
    """Exact test of g' N(v) == N(g v) in integer wedge coordinates."""
    if field_det(g, emb) != emb.to_int(1):
        raise DeterminantError("g must have determinant 1")
    lhs = compound_apply(restricted_matrix(g, emb), norm_map(vs, emb))
    rhs = norm_map([apply_matrix(g, v, emb) for v in vs], emb)
    return lhs == rhs


def random_integral(emb: GeometricEmbedding, rng: np.random.Generator, bound: int = 3) -> tuple[int, ...]:
    return tuple(int(x) for x in rng.integers(-bound, bound + 1, emb.m0))


def random_sl(n: int, emb: GeometricEmbedding, rng: np.random.Generator, steps: int = 3, bound: int = 3):
    """Product of elementary matrices over Z[theta]; determinant 1 by construction."""
    g = [[emb.to_int(int(i == j)) for j in range(n)] for i in range(n)]
    for _ in range(steps):
        i, j = rng.choice(n, 2, replace=False)
        x = random_integral(emb, rng, bound)
        # row operation: row_i += x * row_j
        g[i] = [tuple(a + b for a, b in zip(g[i][c], emb.mul(x, g[j][c]))) for c in range(n)]
    return g
