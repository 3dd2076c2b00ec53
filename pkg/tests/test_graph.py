import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from toruslab.graph import (
    Action,
    AmbiguousPatternError,
    DivergenceGraph,
    Label,
    NormalizationError,
    audit_uds_weights,
    build_graph,
    classify_blocks,
    enumerate_uds,
    index_to_vertices,
    is_connected,
    is_uds,
    parabolic_decompose,
    uds_weights,
    weight_vector_action,
)
from toruslab.ratlp import InfeasibleError
from toruslab.torus import split_torus

IDX = [1e9, 1e10, 1e11, 1e12, 1e13]
PATH = DivergenceGraph.from_edges(3, [(0, 1), (1, 2)])


def unipotent(entries, n=3):
    def u(i):
        m = np.eye(n, dtype=object)
        for (a, b), f in entries.items():
            m[a, b] = f(i)
        return m
    return u


def test_parabolic_decompose_trivial_cases(rng):
    spec = split_torus(3)
    u = np.array([[1.0, 2, 3], [0, 1, 4], [0, 0, 1]])
    dec = parabolic_decompose(u, spec)
    assert np.allclose(dec.delta, np.eye(3)) and np.allclose(dec.h, np.eye(3)) and np.allclose(dec.t, 0)
    assert np.allclose(dec.u, u)
    t0 = (0.3, 0.5, -0.8)
    dec = parabolic_decompose(np.diag(np.exp(t0)), spec)
    assert np.allclose(dec.u, np.eye(3)) and np.allclose(dec.t, t0)
    g = rng.normal(size=(3, 3))
    assert np.abs(parabolic_decompose(g, spec).product(spec) - g).max() < 1e-9


def test_classify_examples():
    spec = split_torus(3)
    pat = classify_blocks(unipotent({(0, 1): lambda i: i}), IDX, spec)
    assert pat.labels[(0, 1)] == Label.DIVERGENT
    assert pat.labels[(1, 2)] == Label.ZERO
    pat = classify_blocks(unipotent({}), IDX, spec)
    assert set(pat.labels.values()) == {Label.ZERO}
    pat = classify_blocks(unipotent({(0, 1): lambda i: 5}), IDX, spec)
    assert pat.labels[(0, 1)] == Label.AMBIGUOUS
    with pytest.raises(AmbiguousPatternError):
        build_graph(pat)


def test_graph_of_path_sequence():
    spec = split_torus(3)
    g = build_graph(classify_blocks(unipotent({(0, 1): lambda i: i, (1, 2): lambda i: i}), IDX, spec))
    assert g.edges == PATH.edges


@pytest.mark.parametrize(
    "graph,expected",
    [
        (PATH, [{0}, {0, 1}]),
        (DivergenceGraph.from_edges(3, [(0, 1), (1, 2), (0, 2)]), [{0}, {0, 1}]),
        (DivergenceGraph.from_edges(2, []), [{0}, {1}]),
    ],
)
def test_proper_uds(graph, expected):
    assert [set(s) for s in enumerate_uds(graph, proper_only=True)] == expected


def test_edgeless_all_subsets():
    assert len(enumerate_uds(DivergenceGraph.from_edges(2, []))) == 4


def test_weights_examples():
    x = uds_weights(PATH)
    assert sum(x) == 0 and audit_uds_weights(PATH, x)
    assert x == (1, 0, -1)
    assert uds_weights(DivergenceGraph.from_edges(1, [])) == (0,)
    with pytest.raises(InfeasibleError):
        uds_weights(DivergenceGraph.from_edges(2, []))


def test_weight_vector_actions():
    u = unipotent({(0, 1): lambda i: i, (1, 2): lambda i: i})
    assert weight_vector_action(u, [0], IDX) == Action.CONSTANT_EQUAL
    assert weight_vector_action(u, [1], IDX) == Action.DIVERGENT
    assert weight_vector_action(u, [0, 1], IDX) == Action.CONSTANT_EQUAL
    with pytest.raises(NormalizationError):
        weight_vector_action(unipotent({(0, 1): lambda i: 5}), [1], IDX)


def test_index_to_vertices():
    spec = split_torus(3)
    assert index_to_vertices(spec, [0, 2]) == {0, 2}


@st.composite
def upper_sequences(draw):
    n = draw(st.integers(2, 4))
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True))
    powers = {p: draw(st.integers(1, 2)) for p in chosen}
    return n, {p: (lambda k: (lambda i: int(i) ** k))(k) for p, k in powers.items()}


@given(upper_sequences())
def test_action_matches_uds(seq):
    n, entries = seq
    spec = split_torus(n)
    u = unipotent(entries, n)
    g = build_graph(classify_blocks(u, IDX, spec))
    uds = set(enumerate_uds(g))
    for w in spec.weight_family:
        action = weight_vector_action(u, w.index, IDX)
        assert (action == Action.CONSTANT_EQUAL) == (index_to_vertices(spec, w.index) in uds)


@given(st.integers(1, 5).flatmap(lambda n: st.tuples(st.just(n), st.sets(st.sampled_from(list(itertools.combinations(range(n), 2))) if n > 1 else st.nothing()))))
def test_connected_iff_feasible(data):
    n, edges = data
    g = DivergenceGraph.from_edges(n, edges)
    try:
        x = uds_weights(g)
        feasible = True
        assert audit_uds_weights(g, x)
    except InfeasibleError:
        feasible = False
    assert feasible == is_connected(g)


def test_is_uds_definition():
    assert is_uds(PATH, {0, 1}) and not is_uds(PATH, {1}) and not is_uds(PATH, {0, 2})
