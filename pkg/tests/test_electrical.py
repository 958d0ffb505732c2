import itertools

import numpy as np
import pytest
from scipy.optimize import minimize

from averkit.components import condense
from averkit.core import WeightedDigraph, build_graph, derive_matrices
from averkit.electrical import (
    apply_modification,
    check_rayleigh,
    check_undirected_restriction,
    cut_flow,
    effective_resistance,
    electrical_network,
    energy,
    equilibrium_via_resistances,
    glue,
    green_matrix,
    link_flows,
    resistance_influence,
    resistance_via_green,
    restriction_violation,
    set_key,
    thompson_flow,
    unit_voltage,
)
from averkit.equilibrium import equilibrium_profile, influence_matrix
from averkit.errors import Disconnected, NotUndirected, OverlappingGroups
from conftest import undirected_path
from corpus import connected_undirected, undirected_interior


def complete(n, w=1.0):
    return build_graph([(i, j, w) for i in range(n) for j in range(n) if i != j])


# --- gate -------------------------------------------------------------------

def test_gate_examples(path4):
    assert check_undirected_restriction(path4, condense(path4))
    asym = build_graph([(0, 0, 1), (1, 0, 1), (1, 2, 1), (2, 1, 2), (2, 3, 1), (3, 3, 1)])
    assert restriction_violation(asym, condense(asym)) == (1, 2)
    split = build_graph([(0, 0, 1), (1, 0, 1), (2, 0, 1)])
    assert restriction_violation(split, condense(split)) == "disconnected"


def test_resistance_influence_rejects_directed_interior():
    g = build_graph([(0, 0, 1), (1, 0, 1), (1, 2, 1), (2, 1, 2), (2, 3, 1), (3, 3, 1)])
    with pytest.raises(NotUndirected) as exc:
        resistance_influence(g, condense(g))
    assert exc.value.pair == (1, 2)


# --- glue -------------------------------------------------------------------

def test_glue_adds_parallel_weights():
    g = build_graph([(0, 2, 1), (1, 2, 2), (2, 0, 1), (2, 1, 2)])
    net, mapping = glue(g, [[0, 1]])
    assert list(mapping) == [0, 0, 1]
    assert net.weights[0, 1] == 3 and net.weights[1, 0] == 3


def test_glue_singleton_is_identity(k3):
    net, mapping = glue(k3, [[1]])
    assert net == k3 and list(mapping) == [0, 1, 2]


def test_glue_sinks_of_path(path4):
    net, mapping = glue(path4, [[0], [3]], bidirectional=True)
    assert net.n == 4
    assert net.weights[0, 1] == net.weights[1, 0] == 1
    assert net.weights[3, 2] == net.weights[2, 3] == 1


def test_glue_overlap():
    with pytest.raises(OverlappingGroups):
        glue(complete(3), [[0, 1], [1, 2]])


# --- resistance -------------------------------------------------------------

def test_series_and_parallel():
    assert effective_resistance(undirected_path(4), [0], [3]) == pytest.approx(3.0, abs=1e-12)
    assert effective_resistance(complete(3), [0], [1]) == pytest.approx(2 / 3, abs=1e-12)
    assert effective_resistance(complete(3, 2.0), [0], [1]) == pytest.approx(1 / 3, abs=1e-12)


def test_network_preconditions():
    with pytest.raises(NotUndirected):
        effective_resistance(build_graph([(0, 1, 1), (1, 0, 2)]), [0], [1])
    with pytest.raises(Disconnected):
        effective_resistance(build_graph([(0, 1, 1), (1, 0, 1), (2, 3, 1), (3, 2, 1)]), [0], [3])


def test_thompson_examples():
    tf = thompson_flow(undirected_path(4), [0], [3])
    assert np.allclose([tf.theta[0, 1], tf.theta[1, 2], tf.theta[2, 3]], 1.0)
    assert tf.dual_energy == pytest.approx(3.0)
    tf = thompson_flow(complete(3), [0], [1])
    assert tf.theta[0, 1] == pytest.approx(2 / 3)
    assert tf.theta[0, 2] == pytest.approx(1 / 3) and tf.theta[2, 1] == pytest.approx(1 / 3)
    assert tf.net_outflow()[2] == pytest.approx(0.0, abs=1e-14)


def min_energy_oracle(g, A, B):
    """Direct numerical minimization of the energy over interior voltages."""
    interior = [i for i in range(g.n) if i not in A and i not in B]

    def full(z):
        y = np.zeros(g.n)
        y[A] = 1.0
        y[interior] = z
        return y

    W = g.weights

    def f(z):
        y = full(z)
        d = y[:, None] - y[None, :]
        grad = 2.0 * (W * d).sum(axis=1)
        return 0.5 * float((W * d**2).sum()), grad[interior]

    res = minimize(f, np.full(len(interior), 0.5), jac=True, method="BFGS", options={"gtol": 1e-12})
    return res.fun


@pytest.mark.parametrize("seed", range(10))
def test_primal_energy_matches_optimizer(seed):
    rng = np.random.default_rng(seed)
    g = connected_undirected(int(rng.integers(4, 12)), seed)
    A, B = [0], [g.n - 1]
    sol = unit_voltage(g, A, B)
    assert energy(g, sol.voltages) == pytest.approx(1 / sol.resistance, rel=1e-12)
    assert min_energy_oracle(g, A, B) == pytest.approx(1 / sol.resistance, rel=1e-7)


@pytest.mark.parametrize("seed", range(10))
def test_flow_across_cuts(seed):
    rng = np.random.default_rng(seed)
    g = connected_undirected(int(rng.integers(3, 9)), seed)
    A, B = [0], [1, g.n - 1] if g.n > 2 else [1]
    tf = thompson_flow(g, A, B)
    assert tf.dual_energy == pytest.approx(tf.resistance, rel=1e-10)
    rest = [i for i in range(g.n) if i not in A and i not in B]
    for r in range(len(rest) + 1):
        for extra in itertools.combinations(rest, r):
            assert cut_flow(tf.theta, A + list(extra)) == pytest.approx(1.0, abs=1e-10)


# --- Green matrix -----------------------------------------------------------

def test_green_examples(k3):
    G = green_matrix(undirected_path(2))
    assert np.allclose(G.G, [[0.25, -0.25], [-0.25, 0.25]])
    assert resistance_via_green(G, 0, 1) == pytest.approx(1.0)
    G = green_matrix(k3)
    assert np.allclose(G.G, (np.eye(3) - 1 / 3) / 3)
    assert resistance_via_green(G, 0, 2) == pytest.approx(2 / 3)
    assert resistance_via_green(G, 1, 1) == 0.0


@pytest.mark.parametrize("seed", range(8))
def test_green_invariants(seed):
    g = connected_undirected(int(np.random.default_rng(seed).integers(3, 20)), seed)
    G = green_matrix(g).G
    L = np.diag(g.weights.sum(axis=1)) - g.weights
    n = g.n
    assert np.allclose(G, G.T)
    assert np.allclose(G @ np.ones(n), 0.0, atol=1e-10)
    assert np.allclose(L @ G, np.eye(n) - 1 / n, atol=1e-10)


# --- resistance formula for the equilibrium ---------------------------------

def test_resistance_equilibrium_examples(path4):
    p3 = build_graph([(0, 0, 1), (1, 0, 1), (1, 2, 1), (2, 2, 1)])
    assert equilibrium_via_resistances(p3, condense(p3), [0, 1])[1] == pytest.approx(0.5)
    cond = condense(path4)
    for method in ("green", "solve"):
        x = equilibrium_via_resistances(path4, cond, [0, 1], method)
        assert np.allclose(x, [0, 1 / 3, 2 / 3, 1], atol=1e-12)
    assert np.allclose(equilibrium_via_resistances(path4, cond, [2.5, 2.5]), 2.5)


@pytest.mark.parametrize("seed", range(15))
def test_resistance_route_matches_direct(seed):
    g = undirected_interior(seed)
    cond = condense(g)
    H = influence_matrix(cond, derive_matrices(g)).H
    assert np.abs(resistance_influence(g, cond, "green") - H).max() < 1e-8
    assert np.abs(resistance_influence(g, cond, "solve") - H).max() < 1e-8


@pytest.mark.parametrize("seed", range(10))
def test_kirchhoff_at_equilibrium(seed):
    g = undirected_interior(seed + 50, singleton=True)
    cond = condense(g)
    xbar = np.linspace(0, 1, cond.sink_count)
    x0 = np.zeros(g.n)
    for k, comp in enumerate(cond.sink_sets):
        x0[list(comp)] = xbar[k]
    x = equilibrium_profile(cond, derive_matrices(g), x0).x_star
    flows = link_flows(g, x)
    assert np.abs(flows.sum(axis=1)[list(cond.regular_set)]).max() < 1e-9
    # currents into the sinks balance
    sinks = list(cond.sink_nodes)
    net, _ = electrical_network(g, cond)
    assert abs(flows[np.ix_(list(cond.regular_set), sinks)].sum()) < 1e-9
    assert net.n == g.n


def test_bias_sign():
    # a node electrically closer to sink 0 leans toward xbar_0
    g = build_graph([(0, 0, 1), (1, 0, 5), (1, 2, 1), (2, 1, 1), (2, 3, 1), (3, 3, 1)])
    x = equilibrium_via_resistances(g, condense(g), [0, 1])
    assert x[1] < 1 / 3 and x[2] < 2 / 3


# --- Rayleigh ---------------------------------------------------------------

def test_rayleigh_examples():
    p = undirected_path(4)
    chord = check_rayleigh(p, [0], [3], ("add-edge", 1, 3, 1.0))
    assert chord.after < chord.before
    assert check_rayleigh(p, [0], [3], ("increase-weight", 1, 2, 1.0))
    glued = check_rayleigh(p, [0], [3], ("glue-pair", 1, 2))
    assert glued.after == pytest.approx(2.0)


def test_modification_errors():
    p = undirected_path(4)
    with pytest.raises(ValueError):
        apply_modification(p, [0], [3], ("add-edge", 0, 1, 1.0))
    with pytest.raises(ValueError):
        apply_modification(p, [0], [3], ("glue-pair", 0, 3))
    with pytest.raises(ValueError):
        apply_modification(p, [0], [3], ("shrink", 0, 1))


def test_set_key():
    assert set_key([1, 0], [3]) == "0,1|3"


def test_weight_scaling_halves_resistance():
    g = connected_undirected(10, 4)
    double = WeightedDigraph(2 * g.weights)
    assert effective_resistance(double, [0], [9]) == pytest.approx(effective_resistance(g, [0], [9]) / 2)
