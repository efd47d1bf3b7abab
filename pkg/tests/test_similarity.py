from itertools import combinations

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netheal.similarity import graph_similarity, node_similarity_matrix
from netheal.topology import Graph, generate_community, generate_hub_spoke

from oracles import to_nx

PAIRS4 = list(combinations(range(4), 2))


def graph4(mask: int) -> Graph:
    return Graph.from_edges(4, [e for i, e in enumerate(PAIRS4) if mask >> i & 1])


def test_identical_graphs_score_one():
    g = generate_hub_spoke(20)
    assert graph_similarity(g, g.copy()) == 1.0


def test_triangle_minus_edge_strictly_between():
    tri = Graph.from_edges(3, [(0, 1), (1, 2), (0, 2)])
    path = Graph.from_edges(3, [(0, 1), (1, 2)])
    s = graph_similarity(tri, path)
    assert 0.0 < s < 1.0


def test_empty_graph_is_an_error():
    g = generate_hub_spoke(3)
    empty = Graph(0)
    with pytest.raises(ValueError):
        graph_similarity(g, empty)


def test_exhaustive_four_node_pairs():
    """Score is exactly 1.0 iff the two graphs are isomorphic (checked against networkx)."""
    graphs = [graph4(m) for m in range(64)]
    nxg = [to_nx(g) for g in graphs]
    for i in range(64):
        for j in range(i, 64):
            score = graph_similarity(graphs[i], graphs[j])
            assert 0.0 <= score <= 1.0
            assert (score == 1.0) == nx.is_isomorphic(nxg[i], nxg[j]), (i, j, score)


def test_relabelled_graph_scores_one():
    g = generate_community(40, 4, 4, 0.3, __import__("random").Random(2))
    perm = list(range(40))
    __import__("random").Random(3).shuffle(perm)
    h = Graph.from_edges(40, [(perm[u], perm[v]) for u, v in g.edges()])
    assert not g.same_as(h)
    assert graph_similarity(g, h) == pytest.approx(1.0)


def test_missing_nodes_lower_the_score():
    g = generate_community(60, 4, 4, 0.3, __import__("random").Random(4))
    scores = []
    damaged = g.copy()
    for u in (5, 17, 33, 48):
        damaged.kill(u)
        scores.append(graph_similarity(g, damaged))
    assert all(s < 1.0 for s in scores)
    assert scores == sorted(scores, reverse=True)


def test_node_matrix_bounds_and_degree_rules():
    a = Graph.from_edges(3, [(0, 1)])
    x = node_similarity_matrix(a, a)
    assert np.all((x >= 0) & (x <= 1))
    # isolated node vs isolated node is a perfect match, vs a connected one is not
    assert x[2, 2] == 1.0
    assert x[2, 0] == 0.0


small_graphs = st.integers(2, 7).flatmap(lambda n: st.lists(
    st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=15).map(lambda e: Graph.from_edges(n, e)))


@settings(max_examples=60)
@given(small_graphs, small_graphs)
def test_score_bounds_and_symmetry(a, b):
    s_ab = graph_similarity(a, b)
    s_ba = graph_similarity(b, a)
    assert 0.0 <= s_ab <= 1.0
    assert s_ab == pytest.approx(s_ba, abs=1e-9)


@settings(max_examples=60)
@given(small_graphs)
def test_score_one_for_self(a):
    assert graph_similarity(a, a) == 1.0


def reference_matrix(a: Graph, b: Graph, eps=1e-4, max_sweeps=100):
    """Uncompressed node-pair sweeps with scipy's assignment solver."""
    from scipy.optimize import linear_sum_assignment

    na, nb = sorted(a.adj), sorted(b.adj)
    ia = {u: i for i, u in enumerate(na)}
    ib = {u: i for i, u in enumerate(nb)}
    x = np.ones((len(na), len(nb)))
    for _ in range(max_sweeps):
        new = np.empty_like(x)
        for i, u in enumerate(na):
            for j, v in enumerate(nb):
                du, dv = len(a.adj[u]), len(b.adj[v])
                if du == 0 and dv == 0:
                    new[i, j] = 1.0
                elif du == 0 or dv == 0:
                    new[i, j] = 0.0
                else:
                    sub = x[np.ix_([ia[p] for p in a.adj[u]], [ib[q] for q in b.adj[v]])]
                    r, c = linear_sum_assignment(sub, maximize=True)
                    new[i, j] = sub[r, c].sum() / max(du, dv)
        done = np.abs(new - x).max() < eps
        x = new
        if done:
            break
    return x


@settings(max_examples=40)
@given(small_graphs, small_graphs)
def test_compressed_sweeps_match_reference(a, b):
    np.testing.assert_allclose(node_similarity_matrix(a, b), reference_matrix(a, b), atol=1e-9)
