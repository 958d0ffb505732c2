"""Seeded random graph corpora shared by the unit and acceptance tests."""
from __future__ import annotations

import numpy as np

from averkit.core import WeightedDigraph


def _rng(seed):
    return np.random.default_rng(seed)


def _weight(rng, size=None):
    return rng.uniform(0.5, 2.0, size)


def sink_digraph(seed: int, n_max: int = 50, sinks: int | None = None, max_sink_size: int = 3):
    """Random digraph with a prescribed number of sink components.

    Sinks are stubborn nodes or small directed cycles; every regular node
    reaches a sink through a chain of lower-numbered regular nodes.
    Returns ``(graph, sink_sets)`` with node ids shuffled.
    """
    rng = _rng(seed)
    s = int(rng.integers(1, 5)) if sinks is None else sinks
    sizes = [int(rng.integers(1, max_sink_size + 1)) for _ in range(s)]
    n_sink = sum(sizes)
    n = int(rng.integers(n_sink + 1, max(n_sink + 2, n_max + 1)))
    n_reg = n - n_sink
    W = np.zeros((n, n))
    sink_sets = []
    start = n_reg
    for size in sizes:
        comp = list(range(start, start + size))
        start += size
        sink_sets.append(comp)
        if size == 1:
            W[comp[0], comp[0]] = _weight(rng)
        else:
            for a, b in zip(comp, comp[1:] + comp[:1]):
                W[a, b] = _weight(rng)
            if size > 2 and rng.random() < 0.5:
                W[comp[0], comp[2]] = _weight(rng)
    sink_nodes = list(range(n_reg, n))
    for i in range(n_reg):
        if i == 0 or rng.random() < 0.3:
            W[i, rng.choice(sink_nodes)] = _weight(rng)
        else:
            W[i, rng.integers(0, i)] = _weight(rng)
    # extra random arcs among regular nodes and into sinks
    p = min(1.0, 3.0 / max(n_reg, 1))
    extra = (rng.random((n_reg, n)) < p) & (W[:n_reg] == 0)
    np.fill_diagonal(extra[:, :n_reg], False)
    W[:n_reg][extra] = _weight(rng, int(extra.sum()))
    perm = rng.permutation(n)
    Wp = np.zeros_like(W)
    Wp[np.ix_(perm, perm)] = W
    return WeightedDigraph(Wp), [sorted(int(perm[i]) for i in comp) for comp in sink_sets]


def connected_undirected(n: int, seed: int, extra_p: float = 0.2) -> WeightedDigraph:
    """Random spanning tree plus Bernoulli extra edges, symmetric random weights."""
    rng = _rng(seed)
    W = np.zeros((n, n))
    order = rng.permutation(n)
    for k in range(1, n):
        a, b = order[k], order[rng.integers(0, k)]
        W[a, b] = W[b, a] = _weight(rng)
    iu, ju = np.triu_indices(n, 1)
    add = (rng.random(len(iu)) < extra_p) & (W[iu, ju] == 0)
    w = _weight(rng, int(add.sum()))
    W[iu[add], ju[add]] = w
    W[ju[add], iu[add]] = w
    return WeightedDigraph(W)


def connected_digraph(n: int, seed: int, extra_p: float = 0.2) -> WeightedDigraph:
    """Random Hamiltonian cycle plus random extra arcs: strongly connected, generally unbalanced."""
    rng = _rng(seed)
    W = np.zeros((n, n))
    order = rng.permutation(n)
    for a, b in zip(order, np.roll(order, -1)):
        W[a, b] = _weight(rng)
    add = (rng.random((n, n)) < extra_p) & (W == 0)
    np.fill_diagonal(add, False)
    W[add] = _weight(rng, int(add.sum()))
    return WeightedDigraph(W)


def connected_graph(n: int, seed: int) -> WeightedDigraph:
    """Alternates undirected and directed connected graphs by seed parity."""
    return connected_undirected(n, seed) if seed % 2 == 0 else connected_digraph(n, seed)


def undirected_interior(seed: int, n_max: int = 40, sinks: int | None = None, singleton: bool = False):
    """Sinks plus a connected undirected regular part with directed links into every sink."""
    rng = _rng(seed)
    s = int(rng.integers(2, 4)) if sinks is None else sinks
    sizes = [1 if singleton else int(rng.integers(1, 3)) for _ in range(s)]
    n_sink = sum(sizes)
    n = int(rng.integers(n_sink + 2, n_max + 1))
    n_reg = n - n_sink
    W = np.zeros((n, n))
    W[:n_reg, :n_reg] = connected_undirected(n_reg, int(rng.integers(1 << 31)), extra_p=0.15).weights
    start = n_reg
    for size in sizes:
        comp = list(range(start, start + size))
        start += size
        if size == 1:
            W[comp[0], comp[0]] = _weight(rng)
        else:
            W[comp[0], comp[1]] = _weight(rng)
            W[comp[1], comp[0]] = _weight(rng)
        # at least one link into every sink
        W[rng.integers(0, n_reg), rng.choice(comp)] = _weight(rng)
        more = rng.random(n_reg) < 0.1
        W[np.flatnonzero(more), comp[0]] = _weight(rng, int(more.sum()))
    return WeightedDigraph(W)
