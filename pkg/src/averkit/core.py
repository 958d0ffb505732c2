"""Weighted directed graphs and the matrices that drive averaging dynamics.

Nodes are the integers ``0..n-1``. ``W[i, j] > 0`` means a link from ``i`` to
``j``: node ``i`` listens to node ``j`` when it averages. Diagonal entries are
self-loops.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DuplicateEdge, GraphInputError, NegativeWeight, NodeOutOfRange, ZeroOutDegree

# exact linear identities vs. quantities obtained from a solve
EXACT_TOL = 1e-12
SOLVE_TOL = 1e-9


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class WeightedDigraph:
    """Dense nonnegative weight matrix plus its node count."""

    weights: np.ndarray

    def __post_init__(self):
        w = _frozen(self.weights)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise GraphInputError(f"weight matrix must be square, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise GraphInputError("weights must be finite")
        if np.any(w < 0):
            raise NegativeWeight("weights must be nonnegative")
        object.__setattr__(self, "weights", w)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def out_degree(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    def edges(self) -> list[tuple[int, int, float]]:
        """Edge list in row-major order; inverse of :func:`build_graph`."""
        src, dst = np.nonzero(self.weights)
        return [(int(i), int(j), float(self.weights[i, j])) for i, j in zip(src, dst)]

    def subgraph(self, nodes: Sequence[int]) -> "WeightedDigraph":
        idx = np.asarray(nodes, dtype=int)
        return WeightedDigraph(self.weights[np.ix_(idx, idx)])

    def __eq__(self, other):
        if not isinstance(other, WeightedDigraph):
            return NotImplemented
        return self.weights.shape == other.weights.shape and np.array_equal(self.weights, other.weights)

    __hash__ = None


def build_graph(edges: Iterable[tuple[int, int, float]], n: int | None = None) -> WeightedDigraph:
    """Build a graph from ``(src, dst, weight)`` triples.

    ``n`` defaults to one more than the largest node id. No symmetrization is
    applied; an undirected link needs both directions listed.
    """
    edges = [(int(s), int(d), float(w)) for s, d, w in edges]
    if n is None:
        n = 1 + max((max(s, d) for s, d, _ in edges), default=-1)
    W = np.zeros((n, n))
    seen = set()
    for s, d, w in edges:
        if not (0 <= s < n and 0 <= d < n):
            raise NodeOutOfRange(f"edge ({s}, {d}) outside node range 0..{n - 1}")
        if not w > 0:
            raise NegativeWeight(f"edge ({s}, {d}) has non-positive weight {w}")
        if (s, d) in seen:
            raise DuplicateEdge(f"edge ({s}, {d}) listed twice")
        seen.add((s, d))
        W[s, d] = w
    return WeightedDigraph(W)


def ensure_positive_outdegree(g: WeightedDigraph, loop_weight: float = 1.0) -> WeightedDigraph:
    """Add a self-loop of ``loop_weight`` to every node with zero out-degree."""
    if not loop_weight > 0:
        raise ValueError("loop_weight must be positive")
    dangling = g.out_degree == 0
    if not dangling.any():
        return g
    W = g.weights.copy()
    idx = np.flatnonzero(dangling)
    W[idx, idx] = loop_weight
    return WeightedDigraph(W)


@dataclass(frozen=True, eq=False)
class DerivedMatrices:
    w: np.ndarray
    D: np.ndarray
    P: np.ndarray
    L: np.ndarray
    alpha: float
    P_alpha: np.ndarray

    @property
    def n(self) -> int:
        return self.P.shape[0]


def derive_matrices(g: WeightedDigraph, alpha: float = 0.5) -> DerivedMatrices:
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha}")
    W = g.weights
    w = W.sum(axis=1)
    if np.any(w <= 0):
        bad = np.flatnonzero(w <= 0).tolist()
        raise ZeroOutDegree(f"nodes {bad} have zero out-degree; call ensure_positive_outdegree first")
    P = W / w[:, None]
    # renormalize so P·1 = 1 to rounding
    P = P / P.sum(axis=1, keepdims=True)
    P_alpha = alpha * np.eye(g.n) + (1.0 - alpha) * P
    return DerivedMatrices(
        w=_frozen(w),
        D=_frozen(np.diag(w)),
        P=_frozen(P),
        L=_frozen(np.diag(w) - W),
        alpha=float(alpha),
        P_alpha=_frozen(P_alpha),
    )


@dataclass(frozen=True)
class GraphClass:
    undirected: bool
    balanced: bool
    reversible_pair_ok: bool


def classify(g: WeightedDigraph, tol: float = EXACT_TOL) -> GraphClass:
    """Undirected / balanced / detailed-balance flags.

    Detailed balance is tested on ``w_i P_ij = w_j P_ji`` using the derived
    ``P``, so nodes with zero out-degree must be fixed first.
    """
    W = g.weights
    scale = max(1.0, float(np.abs(W).max(initial=0.0)))
    undirected = bool(np.max(np.abs(W - W.T), initial=0.0) <= tol * scale)
    balanced = bool(np.max(np.abs(W.sum(axis=1) - W.sum(axis=0)), initial=0.0) <= tol * scale * max(1, g.n))
    m = derive_matrices(g, 0.0)
    flux = m.w[:, None] * m.P
    reversible = bool(np.max(np.abs(flux - flux.T), initial=0.0) <= tol * scale)
    assert not undirected or balanced, "undirected graph reported unbalanced"
    assert undirected == reversible, "detailed balance disagrees with symmetry of W"
    return GraphClass(undirected, balanced, reversible)


def symmetric_violation(W: np.ndarray, nodes: Sequence[int] | None = None, tol: float = EXACT_TOL):
    """First pair ``(i, j)`` with ``W_ij != W_ji`` among ``nodes``, or None."""
    idx = np.arange(W.shape[0]) if nodes is None else np.asarray(nodes, dtype=int)
    sub = W[np.ix_(idx, idx)]
    scale = max(1.0, float(np.abs(sub).max(initial=0.0)))
    bad = np.argwhere(np.abs(sub - sub.T) > tol * scale)
    if len(bad) == 0:
        return None
    i, j = sorted(bad.tolist())[0]
    return int(idx[i]), int(idx[j])


# --- edge-list files -------------------------------------------------------

def parse_edge_list(text: str) -> WeightedDigraph:
    """Parse ``src<TAB>dst<TAB>weight`` lines with ``#`` comments and an optional ``n=`` header."""
    n = None
    edges = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("n="):
            try:
                n = int(line[2:])
            except ValueError:
                raise GraphInputError(f"line {lineno}: bad header {line!r}") from None
            if n < 0:
                raise GraphInputError(f"line {lineno}: negative node count")
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise GraphInputError(f"line {lineno}: expected 3 tab-separated fields, got {len(parts)}")
        try:
            s, d, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise GraphInputError(f"line {lineno}: cannot parse {line!r}") from None
        if s < 0 or d < 0:
            raise NodeOutOfRange(f"line {lineno}: negative node id")
        edges.append((s, d, w))
    return build_graph(edges, n)


def read_edge_list(path: str | Path) -> WeightedDigraph:
    return parse_edge_list(Path(path).read_text(encoding="utf-8"))


def format_edge_list(g: WeightedDigraph, header: bool = True) -> str:
    lines = [f"n={g.n}"] if header else []
    # repr round-trips doubles exactly
    lines += [f"{s}\t{d}\t{w!r}" for s, d, w in g.edges()]
    return "\n".join(lines) + "\n"


def write_edge_list(g: WeightedDigraph, path: str | Path) -> None:
    Path(path).write_text(format_edge_list(g), encoding="utf-8")
