import json
import math

import numpy as np
import pytest

from averkit.components import condense, is_connected
from averkit.core import build_graph, classify, derive_matrices, read_edge_list
from averkit.dynamics import centrality
from averkit.generators import (
    community_tilde_graph,
    er_probability,
    erdos_renyi,
    matched_communities,
    modified_tilde_graph,
    torus,
    write_generated,
)
from averkit.regimes import build_two_community


def test_er_probability_clamped():
    assert er_probability(2, 10.0) == 1.0
    g = erdos_renyi(2, 10.0, seed=0).graph
    assert g.weights[0, 1] == g.weights[1, 0] == 1


def test_er_mean_edge_count():
    n, c = 100, 2.0
    p = er_probability(n, c)
    counts = [np.count_nonzero(np.triu(erdos_renyi(n, c, s).graph.weights)) for s in range(50)]
    expected = math.comb(n, 2) * p
    assert abs(np.mean(counts) - expected) <= 0.05 * expected


def test_er_deterministic():
    a, b = erdos_renyi(40, 1.5, 9), erdos_renyi(40, 1.5, 9)
    assert a.graph.edges() == b.graph.edges()
    assert erdos_renyi(40, 1.5, 10).graph != a.graph
    assert classify(a.graph).undirected


def test_er_rejects_bad_parameters():
    with pytest.raises(ValueError):
        erdos_renyi(1, 1.0, 0)
    with pytest.raises(ValueError):
        erdos_renyi(10, 0.0, 0)


@pytest.mark.parametrize("d,side,degree", [(1, 4, 2), (2, 3, 4), (3, 3, 6), (2, 5, 4)])
def test_torus_degrees(d, side, degree):
    g = torus(d, side).graph
    n = side**d
    assert g.n == n
    assert np.all(np.count_nonzero(g.weights, axis=1) == degree)
    assert np.count_nonzero(np.triu(g.weights)) == n * d
    assert is_connected(g) and classify(g).undirected


def test_four_cycle():
    g = torus(1, 4).graph
    assert sorted((i, j) for i, j, _ in g.edges() if i < j) == [(0, 1), (0, 3), (1, 2), (2, 3)]


@pytest.mark.parametrize("matching", ["identity", "random"])
def test_matched_structure(matching):
    inst = matched_communities(64, 2.0, 0.7, 0.3, seed=1, matching=matching)
    g, m = inst.graph, 64
    assert g.n == 2 * m + 2
    assert condense(g).sink_sets == [(0,), (2 * m + 1,)]
    U0, U1 = inst.community(0), inst.community(1)
    cross = g.weights[np.ix_(U0, U1)]
    assert np.all(np.count_nonzero(cross, axis=1) == 1)
    assert np.all(np.count_nonzero(cross, axis=0) == 1)
    assert np.allclose(cross.sum(axis=1), 0.7)
    inst.spec.validate()
    assert build_two_community(inst.spec) == g
    assert np.all(g.weights[U0, 0] == 0.3) and np.all(g.weights[U1, 2 * m + 1] == 0.3)
    for h, U in ((0, U0), (1, U1)):
        sub = g.weights[np.ix_(U, U)]
        assert is_connected(build_graph([(i, j, 1.0) for i, j in zip(*np.nonzero(sub))], m))
        assert np.count_nonzero(np.triu(sub)) == inst.internal_edges[h]


def test_matched_deterministic():
    a = matched_communities(32, 2.0, 1.0, 0.01, seed=5, matching="random")
    b = matched_communities(32, 2.0, 1.0, 0.01, seed=5, matching="random")
    assert a.graph == b.graph and a.attempts == b.attempts


def test_matched_identity_default():
    inst = matched_communities(16, 2.0, 1.0, 1.0, seed=0)
    assert np.array_equal(inst.graph.weights[np.ix_(inst.community(0), inst.community(1))], np.eye(16))


def test_tilde_of_path(path4):
    t = modified_tilde_graph(path4, condense(path4))
    assert classify(t).undirected
    assert t == build_graph([(0, 1, 1), (1, 0, 1), (1, 2, 1), (2, 1, 1), (2, 3, 1), (3, 2, 1)])


def test_tilde_isolates_unreached_sink():
    g = build_graph([(0, 0, 1), (1, 0, 1), (1, 2, 1), (2, 1, 1), (3, 3, 1)])
    t = modified_tilde_graph(g, condense(g))
    assert not is_connected(t)


def test_tilde_stubborn_degree():
    inst = matched_communities(32, 2.0, 1.0, 0.25, seed=2)
    t = modified_tilde_graph(inst.graph, condense(inst.graph))
    assert t.out_degree[0] == pytest.approx(32 * 0.25)
    assert t.out_degree[-1] == pytest.approx(32 * 0.25)


@pytest.mark.parametrize("h", [0, 1])
def test_community_tilde_centrality(h):
    gamma, beta, m = 0.01, 1.0, 32
    inst = matched_communities(m, 2.0, beta, gamma, seed=3)
    ct = community_tilde_graph(inst, h)
    assert classify(ct.graph).undirected and is_connected(ct.graph)
    assert ct.graph.out_degree[ct.stubborn[0]] == pytest.approx(m * gamma)
    pi = centrality(derive_matrices(ct.graph))
    ell = ct.internal_edges
    expected = (gamma + beta) * m / (2 * (gamma + beta) * m + 2 * ell)
    assert pi[ct.stubborn].sum() == pytest.approx(expected, abs=1e-10)


def test_write_generated(tmp_path):
    gen = erdos_renyi(12, 2.0, 4)
    side = write_generated(gen.graph, gen.config, tmp_path / "er.txt")
    assert read_edge_list(tmp_path / "er.txt") == gen.graph
    cfg = json.loads(side.read_text())
    assert cfg == {"family": "erdos_renyi", "seed": 4, "params": {"n": 12, "c": 2.0}}
