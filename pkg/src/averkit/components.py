"""Strongly connected components, their reachability order, and sink detection."""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .core import WeightedDigraph


@dataclass(frozen=True)
class Condensation:
    """Partition of the nodes into connected components.

    ``components`` is sorted by smallest node id and each component lists its
    nodes in increasing order. ``order[h][k]`` is True when component ``h`` is
    reachable from component ``k`` (the relation G_h >= G_k), reflexively.
    ``sinks`` holds indices into ``components``.
    """

    components: tuple[tuple[int, ...], ...]
    order: np.ndarray
    sinks: tuple[int, ...]
    regular_set: tuple[int, ...]
    labels: np.ndarray

    @property
    def sink_count(self) -> int:
        return len(self.sinks)

    @property
    def sink_sets(self) -> list[tuple[int, ...]]:
        return [self.components[k] for k in self.sinks]

    @property
    def sink_nodes(self) -> tuple[int, ...]:
        return tuple(sorted(i for k in self.sinks for i in self.components[k]))

    def sink_label(self) -> np.ndarray:
        """Per-node sink index ``0..s-1``, or ``-1`` for regular nodes."""
        out = np.full(len(self.labels), -1, dtype=int)
        for k, comp in enumerate(self.sink_sets):
            out[list(comp)] = k
        return out

    def to_dict(self) -> dict:
        return {
            "components": [list(c) for c in self.components],
            "sinks": list(self.sinks),
            "regular": list(self.regular_set),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def condense(g: WeightedDigraph) -> Condensation:
    n = g.n
    support = csr_matrix(g.weights > 0)
    _, raw = connected_components(support, directed=True, connection="strong")

    # relabel so components are numbered by their smallest node
    first_seen: dict[int, int] = {}
    for node in range(n):
        first_seen.setdefault(int(raw[node]), len(first_seen))
    labels = np.array([first_seen[int(r)] for r in raw], dtype=int)
    c = len(first_seen)
    components = tuple(tuple(int(i) for i in np.flatnonzero(labels == k)) for k in range(c))

    # component-level adjacency: comp_adj[k, h] means an edge from V_k into V_h
    src, dst = np.nonzero(g.weights)
    comp_adj = np.zeros((c, c), dtype=bool)
    comp_adj[labels[src], labels[dst]] = True
    np.fill_diagonal(comp_adj, False)

    has_out = comp_adj.any(axis=1)
    sinks = tuple(k for k in range(c) if not has_out[k])

    # transitive closure on the DAG (c is small relative to n^3 work elsewhere)
    reach = comp_adj | np.eye(c, dtype=bool)
    for k in range(c):
        reach |= reach[:, [k]] & reach[[k], :]
    order = reach.T.copy()  # order[h, k]: h reachable from k
    order.setflags(write=False)

    sink_nodes = {i for k in sinks for i in components[k]}
    regular = tuple(i for i in range(n) if i not in sink_nodes)
    labels.setflags(write=False)
    return Condensation(components, order, sinks, regular, labels)


def is_connected(g: WeightedDigraph) -> bool:
    """True iff ``W`` is irreducible (one strongly connected component)."""
    if g.n == 0:
        return False
    support = csr_matrix(g.weights > 0)
    ncomp, _ = connected_components(support, directed=True, connection="strong")
    return ncomp == 1
