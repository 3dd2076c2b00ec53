"""Acceptance criteria, one test each. Every test prints a single PASS/FAIL line."""
import itertools

import numpy as np
import pytest

from oracles import ambient_min_norm2, naive_n2_count
from toruslab.counting import CountSpec, count, enumerate_n2_many, fit_asymptotics, log_factor_diagnostic
from toruslab.exact import NumberField, RatPolynomial
from toruslab.graph import DivergenceGraph, audit_uds_weights, is_connected, uds_weights
from toruslab.lattice import LatticeBasis, shortest_vector
from toruslab.orbits import (
    bounded_subalgebra,
    center_check,
    centralizer_algebra,
    equidist_run,
    example_torus,
    sequence,
)
from toruslab.polytope import build_omega, build_omega_prime, family, loglog_schedule, shrink_ratio_series, vertices
from toruslab.ratlp import InfeasibleError
from toruslab.resscalars import (
    GeometricEmbedding,
    covolume_decrease_margin,
    equivariance_check,
    random_integral,
    random_sl,
    rational_field,
)
from toruslab.torus import split_torus

SEED = 20261016
pytestmark = pytest.mark.slow


@pytest.fixture
def verdict(capsys):
    def emit(k, ok, detail):
        with capsys.disabled():
            print(f"\nACCEPTANCE {k}: {'PASS' if ok else 'FAIL'} | {detail}")
        return ok

    return emit


def test_1_exact_algebra(verdict):
    rng = np.random.default_rng(SEED)
    failures, violations, lines = 0, 0, []
    for q in ("x^2-2", "x^2-3", "x^3-2"):
        emb = GeometricEmbedding(NumberField(RatPolynomial.parse(q)))
        for n in (2, 3):
            bad = 0
            for _ in range(200):
                g = random_sl(n, emb, rng)
                a = int(rng.integers(1, n + 1))
                vs = [[random_integral(emb, rng) for _ in range(n)] for _ in range(a)]
                bad += not equivariance_check(g, vs, emb)
            failures += bad
            lines.append(f"{q},N={n}:{bad}")
        worst, seen = 0.0, 0
        while seen < 1000:
            v = [random_integral(emb, rng) for _ in range(int(rng.integers(2, 4)))]
            if not any(any(x) for x in v):
                continue
            m = covolume_decrease_margin(v, emb)
            violations += not m.within
            worst = max(worst, m.ratio / m.bound)
            seen += 1
        lines.append(f"{q} max ratio/bound={worst:.6f}")
    ok = failures == 0 and violations == 0
    assert verdict(1, ok, f"equivariance failures={failures}, margin violations={violations}; " + ", ".join(lines))


def test_2_graph_uds(verdict):
    pairs = list(itertools.combinations(range(5), 2))
    mismatch, audit_fail, connected = 0, 0, 0
    for mask in range(1 << len(pairs)):
        g = DivergenceGraph.from_edges(5, [p for k, p in enumerate(pairs) if mask >> k & 1])
        try:
            x = uds_weights(g)
            feasible = True
            audit_fail += not audit_uds_weights(g, x, margin=1)
        except InfeasibleError:
            feasible = False
        connected += is_connected(g)
        mismatch += feasible != is_connected(g)
    ok = mismatch == 0 and audit_fail == 0
    assert verdict(2, ok, f"1024 edge sets, {connected} connected, feasibility mismatches={mismatch}, audit failures={audit_fail}")


def test_3_oracle_equivalence(verdict):
    rng = np.random.default_rng(SEED)
    sv_bad = {}
    for d in range(2, 7):
        bad = 0
        for _ in range(100):
            while True:
                b = rng.integers(-6, 7, size=(d, d))
                if round(abs(np.linalg.det(b))) != 0:
                    break
            bad += shortest_vector(LatticeBasis.from_integer(b)).exact_norm2 != ambient_min_norm2(b)
        sv_bad[d] = bad
    radii = list(range(1, 51))
    n2_bad = []
    for _ in range(10):
        while True:
            T, D = (int(x) for x in rng.integers(-6, 7, size=2))
            if T * T - 4 * D != 0:
                break
        if enumerate_n2_many(RatPolynomial([D, -T, 1]), radii) != naive_n2_count(T, D, radii):
            n2_bad.append((T, D))
    ok = not any(sv_bad.values()) and not n2_bad
    assert verdict(3, ok, f"shortest-vector mismatches by rank {sv_bad}; n2 mismatches {n2_bad} over R=1..50")


def test_4_polytope_stability(verdict):
    spec, f = family("sl3-u")
    idx = [10.0**k for k in range(3, 9)]
    rows = shrink_ratio_series(spec, [(i, f(i)) for i in idx], 1.0, loglog_schedule, method="exact")
    ratios = [r.ratio for r in rows]
    radii = [r.cheb_radius for r in rows]
    final_ok = ratios[-1] >= 0.9
    grows = ratios[-1] > ratios[0]
    radius_ok = all(b > a for a, b in zip(radii, radii[1:]))
    detail = (
        f"ratio(1e8)={ratios[-1]:.4f} (need >=0.9: {final_ok}), ratio(1e3)={ratios[0]:.4f} (exceeded: {grows}), "
        f"radii {radii[0]:.2f}->{radii[-1]:.2f} strictly increasing: {radius_ok}; "
        "ratios " + " ".join(f"{x:.4f}" for x in ratios)
    )
    assert verdict(4, final_ok and grows and radius_ok, detail)


@pytest.fixture(scope="module")
def equidist_rows():
    return equidist_run(10**4, eps=0.1, n=10**4, seed=SEED), equidist_run(10, eps=0.1, n=10**4, seed=SEED)


def test_5_nondivergence(verdict, equidist_rows):
    row = equidist_rows[0]
    ok = row.systole_fraction <= 0.05
    assert verdict(5, ok, f"systole<1e-3 fraction={row.systole_fraction:.4f} over {row.samples} samples at i=1e4")


def test_6_siegel_mean(verdict, equidist_rows):
    row, pre = equidist_rows
    ok = row.relative_error <= 0.1
    detail = (
        f"i=1e4 mean={row.siegel_mean:.3f}+-{row.siegel_stderr:.3f} vs {row.ball_volume:.4f}, "
        f"relative error {row.relative_error:.3f}; i=10 (not gated) mean={pre.siegel_mean:.3f}+-{pre.siegel_stderr:.3f}"
    )
    assert verdict(6, ok, detail)


def test_7_limit_centralizer(verdict):
    idx = [10.0**k for k in range(1, 7)]
    dims = {name: bounded_subalgebra(sequence(name), example_torus(name), idx) for name in ("ex1", "ex2", "ex3")}
    s = dims["ex3"].matrices
    cent = len(centralizer_algebra(s, 4)) if s else None
    center = bool(s) and center_check(s, 4)
    ok = dims["ex1"].dim == 0 and dims["ex2"].dim == 0 and dims["ex3"].dim == 1 and cent == 7 and center
    detail = f"dims ex1={dims['ex1'].dim} ex2={dims['ex2'].dim} ex3={dims['ex3'].dim}; centralizer dim={cent}; center_check={center}"
    assert verdict(7, ok, detail)


def test_8_counting(verdict):
    radii = tuple(2.0**k for k in range(7, 15))
    irr = count(CountSpec(2, RatPolynomial.parse("x^2-2"), radii))
    split = count(CountSpec(2, RatPolynomial.parse("x^2-3x+2"), radii))
    fi, fs = fit_asymptotics(irr), fit_asymptotics(split)
    last3 = fi.doubling_log_ratios[-3:]
    doubling_ok = all(0.85 <= x <= 1.15 for x in last3)
    diag = log_factor_diagnostic(radii, split.counts, irr.counts)
    quads = [d for d in diag if d.R in (2.0**10, 2.0**12)]
    log_ok = len(quads) == 2 and all(0.7 <= d.exponent <= 1.3 for d in quads)
    ok = doubling_ok and fi.plateau <= 1.2 and fs.plateau <= 1.25 and log_ok
    detail = (
        "x^2-2 last doublings " + " ".join(f"{x:.3f}" for x in last3) + f", plateau {fi.plateau:.4f}; "
        f"x^2-3x+2 plateau {fs.plateau:.4f}; log-factor exponents "
        + " ".join(f"R={d.R:g}:{d.exponent:.3f} (growth {d.growth:.3f} vs {d.expected:.3f})" for d in quads)
    )
    assert verdict(8, ok, detail)


def _sorted_vertices(P):
    v = np.round(vertices(P), 12)
    return v[np.lexsort(v.T[::-1])]


def test_9_degeneration(verdict):
    rng = np.random.default_rng(SEED)
    emb = GeometricEmbedding(rational_field())
    worst, bad = 0.0, 0
    for _ in range(20):
        n = int(rng.integers(2, 5))
        B = rng.normal(size=(n, n))
        if np.linalg.det(B) < 0:
            B[:, 0] *= -1
        B /= abs(np.linalg.det(B)) ** (1 / n)
        eps = float(rng.uniform(0.05, 1.0))
        spec = split_torus(n)
        va, vb = _sorted_vertices(build_omega(spec, B, eps)), _sorted_vertices(build_omega_prime(spec, (B,), eps, emb))
        if va.shape != vb.shape:
            bad += 1
            continue
        err = float(np.abs(va - vb).max()) if va.size else 0.0
        worst = max(worst, err)
        bad += err > 1e-9
    assert verdict(9, bad == 0, f"20 instances, mismatches={bad}, max vertex deviation={worst:.2e}")
