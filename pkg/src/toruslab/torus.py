"""Maximal Q-tori of SL_N in block normal form.

Canonical coordinates put the split coordinates first, then one block per
anisotropic field. ``positions`` maps canonical coordinates to ambient matrix
coordinates, so tori written with anisotropic blocks first are handled by a
permutation rather than a second code path.

Vertices of the torus are numbered ``0 .. l0 + a0 - 1``: vertex ``k < l0`` is
split coordinate ``k``, vertex ``l0 + j`` is the block of field ``j``.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Sequence

import numpy as np

from .exact import (
    DEFAULT_PRECISION,
    FactorizationReport,
    FieldElement,
    NumberField,
    RatPolynomial,
    regular_rep,
)

REALITY_TOL = 1e-9


class TorusError(ValueError):
    pass


@dataclass(frozen=True)
class WeightVector:
    vertices: frozenset[int]
    index: tuple[int, ...]  # ambient coordinates, 0-based, ascending
    character: tuple[Fraction, ...]  # coefficients on the split parameters


@dataclass(frozen=True)
class LieParam:
    """Point of Lie(T(R)).

    ``split`` has one entry per vertex. ``aniso[j]`` lists ``r_j`` real
    parameters followed by ``s_j`` complex parameters, one per conjugate pair.
    """

    split: tuple[float, ...]
    aniso: tuple[tuple[complex, ...], ...] = ()


@dataclass(frozen=True)
class TorusSpec:
    N: int
    l0: int
    fields: tuple[NumberField, ...] = ()
    bases: tuple[tuple[FieldElement, ...], ...] = ()
    positions: tuple[int, ...] = ()
    split_roots: tuple[Fraction, ...] = ()

    def __post_init__(self):
        if self.l0 + sum(f.degree for f in self.fields) != self.N:
            raise TorusError("l0 + sum of field degrees must equal N")
        if not self.positions:
            object.__setattr__(self, "positions", tuple(range(self.N)))
        if sorted(self.positions) != list(range(self.N)):
            raise TorusError("positions must be a permutation of range(N)")
        if not self.bases:
            object.__setattr__(self, "bases", tuple(tuple(f.power_basis()) for f in self.fields))
        if len(self.bases) != len(self.fields):
            raise TorusError("one basis per field required")
        for f, basis in zip(self.fields, self.bases):
            if len(basis) != f.degree or any(v.owner != f for v in basis):
                raise TorusError("basis does not match its field")

    # -- structure --------------------------------------------------------
    @property
    def a0(self) -> int:
        return len(self.fields)

    @property
    def n_vertices(self) -> int:
        return self.l0 + self.a0

    @property
    def vertex_sizes(self) -> tuple[int, ...]:
        return (1,) * self.l0 + tuple(f.degree for f in self.fields)

    @cached_property
    def vertex_canonical(self) -> tuple[tuple[int, ...], ...]:
        out, start = [], 0
        for size in self.vertex_sizes:
            out.append(tuple(range(start, start + size)))
            start += size
        return tuple(out)

    @cached_property
    def vertex_ambient(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(self.positions[c] for c in coords) for coords in self.vertex_canonical)

    @cached_property
    def permutation(self) -> np.ndarray:
        """P with P @ e_canonical(c) = e_ambient(positions[c])."""
        p = np.zeros((self.N, self.N))
        for c, a in enumerate(self.positions):
            p[a, c] = 1.0
        return p

    def vertex_label(self, v: int) -> str:
        return str(v + 1) if v < self.l0 else f"[l{v - self.l0 + 1}]"

    @cached_property
    def weight_family(self) -> tuple[WeightVector, ...]:
        """Weights e_xi for xi in A_0 minus the empty and the full set."""
        n = self.n_vertices
        out = []
        for r in range(1, n):
            for verts in itertools.combinations(range(n), r):
                index = tuple(sorted(a for v in verts for a in self.vertex_ambient[v]))
                character = tuple(Fraction(self.vertex_sizes[v]) if v in verts else Fraction(0) for v in range(n))
                out.append(WeightVector(frozenset(verts), index, character))
        return tuple(out)

    @property
    def split_dim(self) -> int:
        return max(self.n_vertices - 1, 0)

    @cached_property
    def chart(self) -> np.ndarray:
        """Orthonormal basis (N x split_dim) of Lie(T_s(R)) inside the diagonal of sl_N."""
        n = self.n_vertices
        if n <= 1:
            return np.zeros((self.N, 0))
        vecs = []
        for v in range(n - 1):
            u = np.zeros(self.N)
            u[list(self.vertex_ambient[v])] = 1.0
            vecs.append(u - u.sum() / self.N)
        q, r = np.linalg.qr(np.array(vecs).T)
        signs = np.sign(np.diag(r))
        signs[signs == 0] = 1.0
        return q * signs

    # -- split Lie algebra coordinates -------------------------------------
    def split_to_diag(self, split: Sequence[float]) -> np.ndarray:
        d = np.zeros(self.N)
        for v, t in enumerate(split):
            d[list(self.vertex_ambient[v])] = t
        return d

    def diag_to_split(self, d: Sequence[float]) -> tuple[float, ...]:
        d = np.asarray(d, dtype=float)
        return tuple(float(d[self.vertex_ambient[v][0]]) for v in range(self.n_vertices))

    def chart_to_split(self, s: Sequence[float]) -> tuple[float, ...]:
        return self.diag_to_split(self.chart @ np.asarray(s, dtype=float))

    def split_to_chart(self, split: Sequence[float]) -> np.ndarray:
        return self.chart.T @ self.split_to_diag(split)

    def character_value(self, w: WeightVector, split: Sequence[float]) -> float:
        return float(sum(float(c) * t for c, t in zip(w.character, split)))

    # -- anisotropic data -----------------------------------------------
    @cached_property
    def vandermonde(self) -> tuple[np.ndarray, ...]:
        """Per field, the matrix (sigma_xi(v_zeta)) with rows embeddings and columns basis."""
        out = []
        for f, basis in zip(self.fields, self.bases):
            roots = f.roots_complex()
            m = np.array([[_eval_complex(v, z) for v in basis] for z in roots], dtype=complex)
            if abs(np.linalg.det(m)) < 1e-12:
                raise TorusError("singular A0 block")
            out.append(m)
        return tuple(out)

    @cached_property
    def A0(self) -> np.ndarray:
        """Ambient matrix diag(I_l0, V_1, ..., V_a0); A0 @ g @ inv(A0) is diagonal on T."""
        a = np.zeros((self.N, self.N), dtype=complex)
        for k in range(self.l0):
            a[k, k] = 1.0
        start = self.l0
        for v in self.vandermonde:
            l = v.shape[0]
            a[start : start + l, start : start + l] = v
            start += l
        p = self.permutation
        return p @ a @ p.T

    def aniso_shape(self) -> list[tuple[int, int]]:
        return [(f.r, f.s) for f in self.fields]

    # -- free coordinates for sampling --------------------------------
    def free_layout(self) -> list[str]:
        labels = [f"t{self.vertex_label(v)}" for v in range(self.n_vertices - 1)]
        for j, (r, s) in enumerate(self.aniso_shape()):
            labels += [f"a{j + 1}.re{k}" for k in range(r + s - 1)]
            labels += [f"a{j + 1}.im{k}" for k in range(s)]
        return labels

    @property
    def free_dim(self) -> int:
        return len(self.free_layout())

    def lie_from_free(self, x: Sequence[float]) -> LieParam:
        x = list(x)
        if len(x) != self.free_dim:
            raise TorusError(f"expected {self.free_dim} free coordinates, got {len(x)}")
        n = self.n_vertices
        sizes = self.vertex_sizes
        pos = 0
        if n >= 1:
            head = x[: n - 1]
            pos = n - 1
            last = -sum(sizes[v] * t for v, t in enumerate(head)) / sizes[n - 1]
            split = tuple(head) + (last,)
        else:
            split = ()
        aniso = []
        for r, s in self.aniso_shape():
            re = x[pos : pos + r + s - 1]
            pos += r + s - 1
            im = x[pos : pos + s]
            pos += s
            weights = [1] * r + [2] * s
            last = -sum(w * a for w, a in zip(weights, re)) / weights[-1]
            re = list(re) + [last]
            vals = [complex(a) for a in re[:r]] + [complex(a, b) for a, b in zip(re[r:], im)]
            aniso.append(tuple(vals))
        return LieParam(split, tuple(aniso))

    def zero_param(self) -> LieParam:
        return self.lie_from_free([0.0] * self.free_dim)

    # -- serialization ----------------------------------------------------
    def to_json(self) -> dict:
        return {
            "N": self.N,
            "l0": self.l0,
            "a0": self.a0,
            "split_roots": [str(r) for r in self.split_roots],
            "fields": [f.to_json() for f in self.fields],
            "bases": [[[str(c) for c in v.coords] for v in basis] for basis in self.bases],
            "positions": list(self.positions),
            "weights": [
                {"vertices": sorted(w.vertices), "index": list(w.index), "character": [str(c) for c in w.character]}
                for w in self.weight_family
            ],
        }

    @classmethod
    def from_json(cls, data: dict, precision: int = DEFAULT_PRECISION) -> "TorusSpec":
        fields = tuple(NumberField(RatPolynomial.from_json(f["poly"]), precision) for f in data.get("fields", []))
        bases = tuple(
            tuple(f.element([Fraction(c) for c in v]) for v in basis) for f, basis in zip(fields, data.get("bases", []))
        )
        return cls(
            N=data["N"],
            l0=data["l0"],
            fields=fields,
            bases=bases,
            positions=tuple(data.get("positions", ())),
            split_roots=tuple(Fraction(r) for r in data.get("split_roots", [])),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


def _eval_complex(v: FieldElement, z: complex) -> complex:
    acc = 0j
    for c in reversed(v.coords):
        acc = acc * z + float(c)
    return acc


def build_torus(
    report: FactorizationReport,
    precision: int = DEFAULT_PRECISION,
    bases: Sequence[Sequence[FieldElement]] | None = None,
    positions: Sequence[int] | None = None,
) -> TorusSpec:
    """Torus in normal form attached to a verified factorization."""
    fields = tuple(NumberField(f, precision) for f in report.aniso_factors)
    if bases is not None:
        bases = tuple(tuple(b) for b in bases)
    spec = TorusSpec(
        N=report.N,
        l0=report.l0,
        fields=fields,
        bases=bases or (),
        positions=tuple(positions) if positions else (),
        split_roots=tuple(report.split_roots),
    )
    spec.A0  # fail early on singular blocks
    return spec


def split_torus(n: int) -> TorusSpec:
    return TorusSpec(N=n, l0=n)


def torus_element(spec: TorusSpec, t: LieParam) -> np.ndarray:
    """exp(t) as a real N x N matrix in ambient coordinates."""
    if len(t.split) != spec.n_vertices:
        raise TorusError("split parameter has wrong length")
    sizes = spec.vertex_sizes
    trace = sum(sz * x for sz, x in zip(sizes, t.split))
    if abs(trace) > 1e-12 * max(1.0, max(map(abs, t.split), default=0.0)):
        raise TorusError(f"split parameter is not trace zero (trace {trace:.3e})")
    g = np.zeros((spec.N, spec.N), dtype=complex)
    for k in range(spec.l0):
        g[k, k] = np.exp(t.split[k])
    start = spec.l0
    for j, (v, (r, s)) in enumerate(zip(spec.vandermonde, spec.aniso_shape())):
        vals = t.aniso[j] if j < len(t.aniso) else (0,) * (r + s)
        if len(vals) != r + s:
            raise TorusError(f"anisotropic parameter {j} must have {r + s} entries")
        tr = sum(complex(a).real for a in vals[:r]) + 2 * sum(complex(z).real for z in vals[r:])
        if abs(tr) > 1e-12 * max(1.0, max((abs(z) for z in vals), default=0.0)):
            raise TorusError(f"anisotropic parameter {j} is not trace zero")
        diag = [np.exp(complex(a).real) for a in vals[:r]]
        for z in vals[r:]:
            ez = np.exp(complex(z))
            diag += [ez, np.conj(ez)]
        block = np.linalg.solve(v, np.diag(diag) @ v) * np.exp(t.split[spec.l0 + j])
        l = v.shape[0]
        g[start : start + l, start : start + l] = block
        start += l
    p = spec.permutation
    g = p @ g @ p.T
    residue = np.abs(g.imag).max()
    if residue > REALITY_TOL * max(1.0, np.abs(g).max()):
        raise TorusError(f"torus element is not real (imaginary residue {residue:.3e})")
    return g.real.copy()


def sample_lie(spec: TorusSpec, box: Sequence[tuple[float, float]], rng: np.random.Generator) -> LieParam:
    """Uniform point of the free-coordinate box; dependent coordinates solved for trace zero."""
    if len(box) != spec.free_dim:
        raise TorusError(f"box must have {spec.free_dim} intervals ({', '.join(spec.free_layout())})")
    lo = np.array([b[0] for b in box], dtype=float)
    hi = np.array([b[1] for b in box], dtype=float)
    if np.any(hi < lo):
        raise TorusError("empty box")
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise TorusError("box must be bounded")
    x = lo + (hi - lo) * rng.random(len(box))
    return spec.lie_from_free(x)


def lie_algebra_basis(spec: TorusSpec) -> list[list[list[Fraction]]]:
    """Rational basis of Lie(T) as trace-zero N x N matrices (ambient coordinates).

    Spanned by the split coordinate idempotents and the regular representations
    of the power basis of each field, then cut down to trace zero.
    """
    n = spec.N
    gens = []
    for k in range(spec.l0):
        m = [[Fraction(0)] * n for _ in range(n)]
        a = spec.positions[k]
        m[a][a] = Fraction(1)
        gens.append(m)
    start = spec.l0
    for f, basis in zip(spec.fields, spec.bases):
        l = f.degree
        for e in f.power_basis():
            rep = regular_rep(e, basis)
            m = [[Fraction(0)] * n for _ in range(n)]
            for i in range(l):
                for j in range(l):
                    m[spec.positions[start + i]][spec.positions[start + j]] = rep[i][j]
            gens.append(m)
        start += l
    traces = [sum(m[i][i] for i in range(n)) for m in gens]
    pivot = next(i for i, tr in enumerate(traces) if tr != 0)
    out = []
    for i, (m, tr) in enumerate(zip(gens, traces)):
        if i == pivot:
            continue
        c = tr / traces[pivot]
        out.append([[x - c * y for x, y in zip(rm, rp)] for rm, rp in zip(m, gens[pivot])])
    return out
