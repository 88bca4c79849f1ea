import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from imgnn.centrality import (
    FEATURE_COLUMNS,
    chi2_transform,
    chi2_value,
    clustering_coefficient,
    coreness,
    degree_centrality,
    feature_matrix,
    features_from_csv,
    features_to_csv,
    h_index,
    pagerank,
    rank,
)
from imgnn.graph import Graph, complete_graph, generate_ba, generate_er, star_graph

from conftest import graphs, random_graph, to_nx


def dense_pagerank(g, c=0.15):
    """Direct linear solve of the PageRank fixed point (independent route)."""
    n = g.n
    A = np.zeros((n, n))
    for u, v in g.edges():
        A[u, v] = A[v, u] = 1.0
    k = A.sum(axis=1)
    M = np.zeros((n, n))
    for j in range(n):
        if k[j] > 0:
            M[:, j] = A[j, :] / k[j]
        else:
            M[:, j] = 1.0 / n
    return np.linalg.solve(np.eye(n) - (1 - c) * M, np.full(n, c / n))


def naive_coreness(g):
    """Remove nodes of degree < k repeatedly for k = 1, 2, ...; record survivors."""
    core = np.zeros(g.n, dtype=int)
    alive = set(range(g.n))
    k = 0
    while alive:
        k += 1
        changed = True
        while changed:
            changed = False
            for v in list(alive):
                if sum(1 for u in g.neighbors(v) if u in alive) < k:
                    alive.remove(v)
                    changed = True
        for v in alive:
            core[v] = k
    return core


def test_degree_centrality(star5, p3):
    dc = degree_centrality(star5)
    assert dc[0] == 1.0
    assert dc[1] == pytest.approx(0.2)
    assert degree_centrality(p3)[1] == 1.0


def test_degree_centrality_needs_two_nodes():
    with pytest.raises(ValueError):
        degree_centrality(Graph(1))


def test_clustering_examples(k3, star5):
    assert clustering_coefficient(k3).tolist() == [1.0, 1.0, 1.0]
    assert clustering_coefficient(star5)[0] == 0.0
    # K4 minus edge (0, 1): node 0's neighbours 2, 3 are adjacent
    g = Graph(4, [(0, 2), (0, 3), (1, 2), (1, 3), (2, 3)])
    assert clustering_coefficient(g)[0] == 1.0


@settings(max_examples=40, deadline=None)
@given(graphs(max_n=14))
def test_clustering_matches_networkx(g):
    ref = nx.clustering(to_nx(g))
    np.testing.assert_allclose(clustering_coefficient(g), [ref[i] for i in range(g.n)], atol=1e-12)


def test_pagerank_symmetric_cases(k3):
    np.testing.assert_allclose(pagerank(Graph(2, [(0, 1)])).values, [0.5, 0.5], atol=1e-12)
    np.testing.assert_allclose(pagerank(k3).values, [1 / 3] * 3, atol=1e-12)


def test_pagerank_star_against_dense_oracle():
    g = star_graph(3)
    pr = pagerank(g, 0.15)
    assert pr.converged
    np.testing.assert_allclose(pr.values, dense_pagerank(g), atol=1e-8)
    # closed form for the centre: x = 0.85 * 3 * (1 - x) / 3 + 0.15 / 4 => x = (0.85 + 0.0375) / 1.85
    assert pr.values[0] == pytest.approx((0.85 + 0.0375) / 1.85, abs=1e-9)


@pytest.mark.parametrize("seed", range(8))
def test_pagerank_matches_dense_oracle(seed):
    rng = np.random.default_rng(seed)
    g = random_graph(rng, int(rng.integers(2, 51)), float(rng.uniform(0.02, 0.4)))
    pr = pagerank(g).values
    assert abs(pr.sum() - 1.0) < 1e-9
    np.testing.assert_allclose(pr, dense_pagerank(g), atol=1e-8)


def test_pagerank_matches_networkx_on_connected_graph():
    g = generate_ba(60, 2, 1)
    ref = nx.pagerank(to_nx(g), alpha=0.85, tol=1e-14, max_iter=1000)
    np.testing.assert_allclose(pagerank(g).values, [ref[i] for i in range(g.n)], atol=1e-9)


def test_pagerank_nonconvergence_flag():
    with pytest.warns(RuntimeWarning):
        pr = pagerank(generate_ba(50, 2, 0), tol=1e-30, max_iter=3)
    assert not pr.converged and pr.iterations == 3
    assert abs(pr.values.sum() - 1) < 1e-9


def test_pagerank_bad_teleport(k3):
    with pytest.raises(ValueError):
        pagerank(k3, teleport=1.0)


def test_coreness_examples(k4, star5, k4_pendant):
    assert coreness(k4).tolist() == [3, 3, 3, 3]
    assert coreness(star5).tolist() == [1] * 6
    assert coreness(k4_pendant).tolist() == [3, 3, 3, 3, 1]
    assert coreness(Graph(3, [(0, 1)])).tolist() == [1, 1, 0]


@settings(max_examples=60, deadline=None)
@given(graphs(max_n=14))
def test_coreness_matches_oracles(g):
    c = coreness(g)
    assert c.tolist() == naive_coreness(g).tolist()
    ref = nx.core_number(to_nx(g))
    assert c.tolist() == [ref[i] for i in range(g.n)]
    assert (c <= g.degrees).all()


@settings(max_examples=30, deadline=None)
@given(graphs(max_n=12), st.randoms(use_true_random=False))
def test_coreness_relabel_invariant(g, rnd):
    perm = list(range(g.n))
    rnd.shuffle(perm)
    h = g.relabel(perm)
    c, ch = coreness(g), coreness(h)
    assert all(c[i] == ch[perm[i]] for i in range(g.n))


def test_h_index_examples(k4):
    # centre of star K1,3 whose leaves each gain two extra neighbours -> degree 3 each
    g = Graph(10, [(0, 1), (0, 2), (0, 3), (1, 4), (1, 5), (2, 6), (2, 7), (3, 8), (3, 9)])
    assert h_index(g)[0] == 3
    assert h_index(star_graph(4))[0] == 1
    assert h_index(k4).tolist() == [3, 3, 3, 3]
    assert h_index(Graph(2)).tolist() == [0, 0]


@settings(max_examples=40, deadline=None)
@given(graphs(max_n=14))
def test_h_index_definition(g):
    h = h_index(g)
    for i in range(g.n):
        nd = g.degrees[g.neighbors(i)]
        best = max((x for x in range(len(nd) + 1) if (nd >= x).sum() >= x), default=0)
        assert h[i] == best <= g.degrees[i]


@pytest.mark.parametrize("d", [2, 3, 4])
def test_h_index_regular(d):
    g = generate_regular(12, d)
    assert h_index(g).tolist() == [d] * 12


def generate_regular(n, d):
    return Graph(n, [(i, (i + s) % n) for i in range(n) for s in range(1, d // 2 + 1)] +
                 ([(i, i + n // 2) for i in range(n // 2)] if d % 2 else []))


def test_chi2_worked_values():
    assert chi2_value(80, 100) == 4
    assert chi2_value(10, 1) == 81


def test_chi2_transform_star_center(star4):
    out = chi2_transform(star4.degrees, star4)
    assert out[0] == 9.0  # (4 - 1)^2 / 1
    assert out[1] == pytest.approx((1 - 4) ** 2 / 4)


def test_chi2_regular_is_zero():
    g = generate_regular(10, 4)
    assert chi2_transform(g.degrees, g).tolist() == [0.0] * 10


def test_chi2_degenerate_cases():
    g = Graph(4, [(0, 1)])
    obs = np.array([2.0, 0.0, 1.0, 0.0])
    out = chi2_transform(obs, g)
    assert out[0] == 2.0  # e = 0, o > 0 -> o
    assert out[1] == pytest.approx((0 - 2) ** 2 / 2)
    assert out[2] == 0.0 and out[3] == 0.0  # isolated
    g2 = Graph(2, [(0, 1)])
    assert chi2_transform([0.0, 0.0], g2).tolist() == [0.0, 0.0]
    with pytest.raises(ValueError):
        chi2_transform([-1.0, 0.0], g2)


@settings(max_examples=30, deadline=None)
@given(graphs(min_n=2, max_n=12))
def test_chi2_zero_where_observed_equals_neighbor_mean(g):
    deg = g.degrees.astype(float)
    out = chi2_transform(deg, g)
    for i in range(g.n):
        nb = g.neighbors(i)
        if nb.size and deg[nb].mean() == deg[i]:
            assert out[i] == 0.0


def test_feature_matrix_triangle(k3):
    F = feature_matrix(k3)
    expected = [1.0, 0.0, 1.0, 0.0, 1 / 3, 2.0]
    for row in F:
        np.testing.assert_allclose(row, expected, atol=1e-12)


def test_feature_matrix_star_center(star4):
    assert feature_matrix(star4)[0, 1] == 9.0


@pytest.mark.parametrize("seed", range(5))
def test_feature_matrix_invariants(seed):
    g = generate_er(25, 0.15, seed)
    F = feature_matrix(g)
    assert F.shape == (25, 6) and np.isfinite(F).all()
    assert abs(F[:, 4].sum() - 1) < 1e-9
    assert ((0 <= F[:, 0]) & (F[:, 0] <= 1)).all()
    assert ((0 <= F[:, 2]) & (F[:, 2] <= 1)).all()
    assert (F[:, 5] == np.round(F[:, 5])).all() and (F[:, 5] >= 0).all()


def test_feature_minmax_scaling():
    F = feature_matrix(generate_ba(30, 2, 0), scaling="minmax")
    assert F.min() >= 0 and F.max() <= 1
    with pytest.raises(ValueError):
        feature_matrix(generate_ba(30, 2, 0), scaling="zscore")


def test_feature_csv_roundtrip():
    g = generate_er(12, 0.3, 2)
    F = feature_matrix(g)
    labels = np.linspace(0, 1, 12)
    text = features_to_csv(F, labels)
    assert text.splitlines()[0] == ",".join(["node_id", *FEATURE_COLUMNS, "label"])
    F2, l2 = features_from_csv(text)
    assert np.array_equal(F, F2) and np.array_equal(labels, l2)


def test_rank_examples():
    assert rank([0.2, 0.9, 0.2]).order.tolist() == [1, 0, 2]
    assert rank([1.0] * 5).order.tolist() == [0, 1, 2, 3, 4]
    assert rank([5, 4, 3, 2]).order.tolist() == [0, 1, 2, 3]
    with pytest.raises(ValueError):
        rank([0.1, float("nan")])


def test_rank_csv():
    text = rank([0.2, 0.9]).to_csv().splitlines()
    assert text == ["node_id,score,rank", "1,0.9,1", "0,0.2,2"]


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=30, unique=True), st.randoms(use_true_random=False))
def test_rank_permutation_equivariant(scores, rnd):
    perm = list(range(len(scores)))
    rnd.shuffle(perm)
    permuted = [0.0] * len(scores)
    for i, p in enumerate(perm):
        permuted[p] = scores[i]
    a, b = rank(scores).order, rank(permuted).order
    assert [perm[i] for i in a] == b.tolist()
    s = np.asarray(scores)[a]
    assert (np.diff(s) <= 0).all()
