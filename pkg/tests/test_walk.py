import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fptrace.covers import Cover, CoverGraph
from fptrace.errors import DisconnectedGraph
from fptrace.spaces import StateSpace
from fptrace.walk import covering_walk


def graph_from_edges(n, edges):
    """CoverGraph over a dummy cover; walk construction only reads edges."""
    sy = StateSpace(lower=np.array([0.0]), upper=np.array([1.0]))
    cover = Cover(centers=np.zeros((n, 1)), radii=np.ones(n),
                  space_tag="Y", convex_flag=True, space=sy)
    return CoverGraph(cover=cover, edges=tuple(sorted(edges)))


def check_walk_invariants(walk, n, edges):
    seq = walk.sequence
    assert set(seq) == set(range(n))
    edge_set = {frozenset(e) for e in edges}
    for a, b in zip(seq, seq[1:]):
        assert a == b or frozenset((a, b)) in edge_set
    assert walk.N <= 2 * n - 2


def test_walk_path_graph():
    g = graph_from_edges(3, [(0, 1), (1, 2)])
    assert covering_walk(g, start=0).sequence == (0, 1, 2)


def test_walk_single_vertex():
    g = graph_from_edges(1, [])
    w = covering_walk(g, start=0)
    assert w.sequence == (0,)
    assert w.N == 0


def test_walk_star_graph():
    g = graph_from_edges(3, [(0, 1), (0, 2)])
    w = covering_walk(g, start=0)
    assert w.sequence == (0, 1, 0, 2)
    assert w.N == 3 <= 2 * 3 - 2


def test_walk_disconnected_error():
    g = graph_from_edges(4, [(0, 1), (2, 3)])
    with pytest.raises(DisconnectedGraph):
        covering_walk(g, start=0)


def test_walk_deterministic():
    g = graph_from_edges(6, [(0, 1), (0, 2), (1, 3), (2, 4), (2, 5)])
    assert covering_walk(g, start=0).sequence == covering_walk(g, start=0).sequence


@st.composite
def connected_graphs(draw):
    n = draw(st.integers(1, 64))
    rng = np.random.default_rng(draw(st.integers(0, 2**32 - 1)))
    edges = set()
    # random spanning tree, then extra edges
    order = rng.permutation(n)
    for i in range(1, n):
        j = order[int(rng.integers(0, i))]
        edges.add((min(order[i], j), max(order[i], j)))
    extra = int(rng.integers(0, n))
    for _ in range(extra):
        a, b = rng.integers(0, n, size=2)
        if a != b:
            edges.add((min(a, b), max(a, b)))
    start = draw(st.integers(0, n - 1))
    return n, edges, start


@settings(max_examples=200, deadline=None)
@given(connected_graphs())
def test_walk_properties_random_graphs(data):
    n, edges, start = data
    w = covering_walk(graph_from_edges(n, edges), start=start)
    check_walk_invariants(w, n, edges)
