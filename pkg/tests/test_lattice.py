import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import brute_min_norm2
from toruslab.lattice import (
    LatticeBasis,
    LatticeError,
    count_points,
    lll_reduce,
    plucker_norm,
    shortest_vector,
    systole,
    wedge_norm,
)


def random_integer_basis(rng, d, bound=6):
    while True:
        m = rng.integers(-bound, bound + 1, size=(d, d))
        if round(abs(np.linalg.det(m))) != 0:
            return m


def random_unimodular(rng, d, steps=12):
    u = np.eye(d, dtype=np.int64)
    for _ in range(steps):
        i, j = rng.choice(d, 2, replace=False)
        u[i] += int(rng.integers(-2, 3)) * u[j]
    return u


def test_lll_identity_and_known_reduction():
    red = lll_reduce(LatticeBasis(np.eye(3)))
    assert np.allclose(np.abs(red.lattice.basis), np.eye(3))
    red = lll_reduce(LatticeBasis.from_integer([[1, 0], [10**6, 1]]))
    assert np.linalg.norm(red.lattice.basis[:, 0]) == pytest.approx(1.0)


def test_lll_properties(rng):
    lat = LatticeBasis(rng.normal(size=(6, 6)))
    red = lll_reduce(lat)
    assert red.lattice.det == pytest.approx(lat.det, rel=1e-9)
    assert round(abs(np.linalg.det(red.transform))) == 1
    assert np.allclose(lat.basis @ red.transform, red.lattice.basis, atol=1e-9)
    q, r = np.linalg.qr(red.lattice.basis)
    d = np.abs(np.diag(r))
    mu = r / np.diag(r)[None, :]
    for k in range(1, 6):
        assert all(abs(mu[j, k]) <= 0.5 + 1e-9 for j in range(k))
        assert d[k] ** 2 >= (0.99 - mu[k - 1, k] ** 2) * d[k - 1] ** 2 - 1e-9


def test_shortest_vector_examples():
    assert shortest_vector(LatticeBasis(np.eye(3))).norm == pytest.approx(1.0)
    assert systole(LatticeBasis(np.diag([2.0, 0.5]))) == pytest.approx(0.5)
    t = 1.3
    assert systole(LatticeBasis(np.diag([math.exp(t), math.exp(-t)]))) == pytest.approx(math.exp(-t))
    with pytest.raises(LatticeError):
        shortest_vector(LatticeBasis(np.eye(13)))


def test_tie_breaking_is_canonical():
    sv = shortest_vector(LatticeBasis.from_integer(np.eye(3, dtype=int)))
    assert sv.coeffs == (0, 0, 1)


def test_shortest_vector_matches_box_bruteforce_rank4(rng):
    for _ in range(100):
        b = random_integer_basis(rng, 4)
        sv = shortest_vector(LatticeBasis.from_integer(b))
        best = brute_min_norm2(b)[0]
        assert sv.exact_norm2 == best


@pytest.mark.parametrize("r,expected", [(1, 6), (1.5, 18)])
def test_count_points_z3(r, expected):
    assert count_points(LatticeBasis.from_integer(np.eye(3, dtype=int)), r) == expected


def test_count_points_z2_bruteforce():
    n = sum(1 for a in range(-3, 4) for b in range(-3, 4) if 0 < a * a + b * b <= 4)
    assert n == 12
    assert count_points(LatticeBasis.from_integer([[1, 0], [0, 1]]), 2) == 12


def test_count_points_unimodular_invariance(rng):
    for d in (2, 3, 4):
        b = random_integer_basis(rng, d, 3)
        u = random_unimodular(rng, d)
        r = 1.5 * abs(np.linalg.det(b)) ** (1 / d)
        assert count_points(LatticeBasis.from_integer(b), r) == count_points(LatticeBasis.from_integer(b @ u), r)


def test_wedge_norm_examples(rng):
    assert wedge_norm(np.eye(4), [0, 2]) == pytest.approx(1.0)
    assert wedge_norm(np.array([[3.0, 0, 0], [4, 1, 0], [0, 0, 1]]), [0]) == pytest.approx(5.0)
    b = rng.normal(size=(4, 4))
    assert wedge_norm(b, [0, 1]) == pytest.approx(plucker_norm(b, [0, 1]), abs=1e-10)


@given(st.lists(st.floats(-3, 3, allow_nan=False), min_size=16, max_size=16), st.sets(st.integers(0, 3), min_size=1))
def test_gram_equals_minors(entries, xi):
    b = np.array(entries).reshape(4, 4)
    xi = sorted(xi)
    assert wedge_norm(b, xi) == pytest.approx(plucker_norm(b, xi), rel=1e-9, abs=1e-10)
