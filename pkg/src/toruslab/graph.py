"""Divergence graphs of unipotent sequences and UDS weight assignments.

Vertices are the torus vertices in their canonical order (split coordinates,
then anisotropic blocks); vertex ``k`` is smaller than vertex ``k + 1``.
"""
from __future__ import annotations

import enum
import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

import numpy as np

from .lattice import is_exact_matrix, wedge_norm2_exact
from .linalg import det
from .ratlp import InfeasibleError, solve_free
from .torus import TorusSpec

ZERO_TOL = 1e-8
DIVERGE_FACTOR = 1e3


class GraphError(ValueError):
    pass


class AmbiguousPatternError(GraphError):
    pass


class NormalizationError(GraphError):
    pass


class Label(str, enum.Enum):
    DIVERGENT = "Divergent"
    ZERO = "Zero"
    AMBIGUOUS = "Ambiguous"


class Action(str, enum.Enum):
    CONSTANT_EQUAL = "ConstantEqual"
    DIVERGENT = "Divergent"


@dataclass(frozen=True)
class BlockPattern:
    n_vertices: int
    labels: dict  # (xi, zeta) -> Label for ordered pairs xi != zeta
    exponents: dict  # (xi, zeta) -> growth exponent estimate (nan when undefined)
    vertex_labels: tuple[str, ...] = ()


@dataclass(frozen=True)
class DivergenceGraph:
    vertices: tuple[str, ...]
    edges: frozenset  # of frozenset({i, j}) over vertex indices

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]], labels: Sequence[str] | None = None):
        es = frozenset(frozenset(e) for e in edges)
        if any(len(e) != 2 for e in es):
            raise GraphError("edge endpoints must be distinct")
        if any(not 0 <= v < n for e in es for v in e):
            raise GraphError("edge endpoint out of range")
        return cls(tuple(labels) if labels else tuple(str(k + 1) for k in range(n)), es)

    @property
    def n(self) -> int:
        return len(self.vertices)

    def neighbors(self, v: int) -> list[int]:
        return sorted(w for e in self.edges if v in e for w in e if w != v)

    def to_json(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "adjacency": {self.vertices[v]: [self.vertices[w] for w in self.neighbors(v)] for v in range(self.n)},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


# -- parabolic decomposition ----------------------------------------------


@dataclass(frozen=True)
class ParabolicDecomposition:
    delta: np.ndarray
    u: np.ndarray
    h: np.ndarray
    t: tuple[float, ...]  # split parameter per vertex

    def product(self, spec: TorusSpec) -> np.ndarray:
        return self.delta @ self.u @ self.h @ np.diag(np.exp(spec.split_to_diag(self.t)))


def parabolic_decompose(g, spec: TorusSpec, cond_limit: float = 1e12) -> ParabolicDecomposition:
    """g = delta u h exp(t) with delta orthogonal, u block unipotent, h unit-determinant blocks."""
    g = np.asarray(g, dtype=float)
    cond = np.linalg.cond(g)
    if not np.isfinite(cond) or cond > cond_limit:
        raise GraphError(f"ill-conditioned input (condition number {cond:.3e})")
    p = spec.permutation
    gc = p.T @ g @ p
    q, r = np.linalg.qr(gc)
    signs = np.sign(np.diag(r))
    signs[signs == 0] = 1.0
    q, r = q * signs, signs[:, None] * r
    dblock = np.zeros_like(r)
    hc = np.zeros_like(r)
    ts = []
    for coords in spec.vertex_canonical:
        sl = slice(coords[0], coords[-1] + 1)
        blk = r[sl, sl]
        dblock[sl, sl] = blk
        t = float(np.log(np.diag(blk)).sum() / len(coords))
        ts.append(t)
        hc[sl, sl] = blk * math.exp(-t)
    u = r @ np.linalg.inv(dblock)
    return ParabolicDecomposition(p @ q @ p.T, p @ u @ p.T, p @ hc @ p.T, tuple(ts))


# -- block classification -------------------------------------------------


def _block(m, spec: TorusSpec, xi: int, zeta: int):
    rows = spec.vertex_ambient[xi]
    cols = spec.vertex_ambient[zeta]
    return np.asarray(m, dtype=float)[np.ix_(rows, cols)]


def growth_exponent(indices: Sequence[float], values: Sequence[float]) -> float:
    """Slope of log(value) against log(index); nan if any value vanishes."""
    v = np.asarray(values, dtype=float)
    if np.any(v <= 0):
        return math.nan
    x = np.log(np.asarray(indices, dtype=float))
    return float(np.polyfit(x, np.log(v), 1)[0])


def classify_blocks(
    u_sampler: Callable[[float], object],
    sample_indices: Sequence[float],
    spec: TorusSpec,
    zero_tol: float = ZERO_TOL,
    diverge_factor: float = DIVERGE_FACTOR,
) -> BlockPattern:
    idx = list(sample_indices)
    if len(idx) < 4 or any(b <= a for a, b in zip(idx, idx[1:])):
        raise GraphError("need at least 4 increasing sample indices")
    mats = [u_sampler(i) for i in idx]
    n = spec.n_vertices
    labels, exps = {}, {}
    for xi, zeta in itertools.permutations(range(n), 2):
        norms = [float(np.linalg.norm(_block(m, spec, xi, zeta))) for m in mats]
        if all(v < zero_tol for v in norms):
            lab = Label.ZERO
        elif norms[0] > 0 and norms[-1] / norms[0] > diverge_factor and norms[-1] > 1 / zero_tol:
            lab = Label.DIVERGENT
        else:
            lab = Label.AMBIGUOUS
        labels[(xi, zeta)] = lab
        exps[(xi, zeta)] = growth_exponent(idx, norms)
    return BlockPattern(n, labels, exps, tuple(spec.vertex_label(v) for v in range(n)))


def build_graph(pattern: BlockPattern) -> DivergenceGraph:
    amb = sorted(k for k, v in pattern.labels.items() if v == Label.AMBIGUOUS)
    if amb:
        raise AmbiguousPatternError(
            f"blocks {amb} neither vanish nor diverge; left-multiply the sequence by a bounded "
            "sequence so that every block either diverges or stays zero"
        )
    edges = {tuple(sorted(k)) for k, v in pattern.labels.items() if v == Label.DIVERGENT}
    return DivergenceGraph.from_edges(pattern.n_vertices, edges, pattern.vertex_labels or None)


# -- combinatorics ---------------------------------------------------------


def is_connected(graph: DivergenceGraph) -> bool:
    if graph.n <= 1:
        return True
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in graph.neighbors(v):
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == graph.n


def is_uds(graph: DivergenceGraph, subset: Iterable[int]) -> bool:
    """For j in J, every smaller neighbour of j lies in J."""
    s = set(subset)
    for e in graph.edges:
        i, j = sorted(e)
        if j in s and i not in s:
            return False
    return True


def enumerate_uds(graph: DivergenceGraph, proper_only: bool = False) -> list[frozenset[int]]:
    if graph.n > 20:
        raise GraphError("at most 20 vertices supported")
    out = []
    for mask in range(1 << graph.n):
        s = frozenset(v for v in range(graph.n) if mask >> v & 1)
        if proper_only and (not s or len(s) == graph.n):
            continue
        if is_uds(graph, s):
            out.append(s)
    return sorted(out, key=lambda s: (len(s), sorted(s)))


def uds_weights(graph: DivergenceGraph) -> tuple[Fraction, ...]:
    """x with sum(x) = 0 and sum over S of x >= 1 for every proper nonempty UDS S.

    Solved exactly (minimal l1 norm); raises InfeasibleError for disconnected graphs.
    """
    n = graph.n
    proper = enumerate_uds(graph, proper_only=True)
    a_ge = [[1 if v in s else 0 for v in range(n)] for s in proper]
    try:
        res = solve_free([0] * n, a_ge, [1] * len(a_ge), [[1] * n], [0], l1=True)
    except InfeasibleError as exc:
        raise InfeasibleError("no UDS weights exist; the divergence graph is disconnected") from exc
    if not audit_uds_weights(graph, res.x):
        raise ArithmeticError("UDS weight audit failed")
    return res.x


def audit_uds_weights(graph: DivergenceGraph, x: Sequence, margin=1) -> bool:
    """Independent check of the weight conditions by brute force over subsets."""
    n = graph.n
    if sum(x) != 0:
        return False
    for r in range(1, n):
        for s in itertools.combinations(range(n), r):
            ss = set(s)
            closed = all(not (max(e) in ss and min(e) not in ss) for e in map(tuple, graph.edges))
            if closed and sum(x[v] for v in s) < margin:
                return False
    return True


# -- action on weight vectors ---------------------------------------------


def _wedge_norm2_and_principal(m, index: Sequence[int]):
    if is_exact_matrix(m):
        rows = np.asarray(m, dtype=object).tolist()
        g = wedge_norm2_exact(rows, index)
        pm = det([[rows[i][j] for j in index] for i in index])
        return g, pm, True
    a = np.asarray(m, dtype=float)[:, list(index)]
    g = float(np.prod(np.diag(np.linalg.qr(a, mode="r")) ** 2))  # Gram det without cancellation
    pm = float(np.linalg.det(a[list(index), :]))
    return g, pm, False


def weight_vector_action(
    u_sampler: Callable[[float], object],
    index: Sequence[int],
    sample_indices: Sequence[float],
    zero_tol: float = ZERO_TOL,
    tol: float = 1e-9,
) -> Action:
    """Whether u_i e_I stays equal to e_I or diverges along the samples."""
    index = sorted(index)
    constant = True
    norms = []
    for i in sample_indices:
        g, pm, exact = _wedge_norm2_and_principal(u_sampler(i), index)
        norms.append(math.sqrt(float(g)))
        if exact:
            constant &= g == 1 and pm == 1
        else:
            constant &= abs(g - 1) <= tol and abs(pm - 1) <= tol
    if constant:
        return Action.CONSTANT_EQUAL
    if norms[-1] > 1 / zero_tol:
        return Action.DIVERGENT
    raise NormalizationError(
        f"u_i e_I stays bounded but is not constant for I = {index} (final norm {norms[-1]:.3e}); "
        "the sequence is not normalized"
    )


def index_to_vertices(spec: TorusSpec, index: Sequence[int]) -> frozenset[int]:
    s = set(index)
    out = set()
    for v, coords in enumerate(spec.vertex_ambient):
        inside = s.issuperset(coords)
        if not inside and s.intersection(coords):
            raise GraphError(f"index set {sorted(s)} splits the block of vertex {spec.vertex_label(v)}")
        if inside:
            out.add(v)
    return frozenset(out)
