"""Seeded constructions of the graph families used in the experiments."""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .components import Condensation, is_connected
from .core import WeightedDigraph, write_edge_list
from .errors import ConnectivityRetriesExhausted
from .regimes import TwoCommunitySpec

MAX_CONNECTIVITY_ATTEMPTS = 100


@dataclass(frozen=True)
class GeneratorConfig:
    family: str
    seed: int | None
    params: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


@dataclass(frozen=True, eq=False)
class Generated:
    graph: WeightedDigraph
    config: GeneratorConfig
    connected: bool


def er_probability(n: int, c: float) -> float:
    return min(1.0, max(0.0, c * math.log(n) / n))


def _er_weights(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    iu, ju = np.triu_indices(n, 1)
    present = rng.random(len(iu)) < p
    W = np.zeros((n, n))
    W[iu[present], ju[present]] = 1.0
    W[ju[present], iu[present]] = 1.0
    return W


def erdos_renyi(n: int, c: float, seed: int) -> Generated:
    """Undirected unit-weight G(n, p) with ``p = c log(n) / n`` clamped to [0, 1]."""
    if n < 2 or c <= 0:
        raise ValueError("need n >= 2 and c > 0")
    W = _er_weights(n, er_probability(n, c), np.random.default_rng(seed))
    g = WeightedDigraph(W)
    return Generated(g, GeneratorConfig("erdos_renyi", seed, {"n": n, "c": c}), is_connected(g))


def torus(d: int, side: int, seed_unused: int | None = None) -> Generated:
    """Unit-weight nearest-neighbour lattice ``(Z/side)^d``; nodes in row-major order."""
    if d < 1 or side < 3:
        raise ValueError("need d >= 1 and side >= 3")
    n = side**d
    coords = np.array(np.unravel_index(np.arange(n), (side,) * d)).T
    W = np.zeros((n, n))
    for axis in range(d):
        shifted = coords.copy()
        shifted[:, axis] = (shifted[:, axis] + 1) % side
        nbr = np.ravel_multi_index(shifted.T, (side,) * d)
        W[np.arange(n), nbr] = 1.0
        W[nbr, np.arange(n)] = 1.0
    g = WeightedDigraph(W)
    return Generated(g, GeneratorConfig("torus", None, {"d": d, "side": side}), True)


@dataclass(frozen=True, eq=False)
class MatchedInstance:
    """Two matched ER communities with one stubborn node each.

    Node order is ``v0, U0 (1..m), U1 (m+1..2m), v1``.
    """

    graph: WeightedDigraph
    spec: TwoCommunitySpec
    config: GeneratorConfig
    attempts: int
    internal_edges: tuple[int, int]  # undirected ER links inside U0 and U1

    @property
    def m(self) -> int:
        return self.spec.n0

    def community(self, h: int) -> list[int]:
        m = self.m
        return list(range(1, m + 1)) if h == 0 else list(range(m + 1, 2 * m + 1))

    def stubborn(self, h: int) -> int:
        return 0 if h == 0 else 2 * self.m + 1


def matched_communities(
    m: int, omega: float, beta: float, gamma: float, seed: int, matching: str = "identity"
) -> MatchedInstance:
    """Match two i.i.d. connected ER graphs by weight-``beta`` links and attach stubborn nodes.

    Each ER part uses ``p = omega log(m) / m``. Parts are redrawn from fresh
    sub-seeds until both are connected.
    """
    if m < 2 or omega <= 1 or beta <= 0 or gamma <= 0:
        raise ValueError("need m >= 2, omega > 1, beta > 0, gamma > 0")
    if matching not in ("identity", "random"):
        raise ValueError(f"unknown matching {matching!r}")
    p = er_probability(m, omega)
    root = np.random.SeedSequence(seed)
    for attempt in range(1, MAX_CONNECTIVITY_ATTEMPTS + 1):
        s0, s1, s_match = root.spawn(3)
        A = _er_weights(m, p, np.random.default_rng(s0))
        D = _er_weights(m, p, np.random.default_rng(s1))
        if is_connected(WeightedDigraph(A)) and is_connected(WeightedDigraph(D)):
            break
    else:
        raise ConnectivityRetriesExhausted(
            f"no connected pair of ER graphs after {MAX_CONNECTIVITY_ATTEMPTS} attempts (m={m}, omega={omega})"
        )
    perm = np.arange(m)
    if matching == "random":
        perm = np.random.default_rng(s_match).permutation(m)
    B = np.zeros((m, m))
    B[np.arange(m), perm] = beta
    spec = TwoCommunitySpec(n0=m, n1=m, gamma=gamma, beta0=beta, beta1=beta, A=A, B=B, C=B.T.copy(), D=D)
    from .regimes import build_two_community

    cfg = GeneratorConfig(
        "matched_er", seed, {"m": m, "omega": omega, "beta": beta, "gamma": gamma, "matching": matching}
    )
    edges = (int(np.count_nonzero(np.triu(A))), int(np.count_nonzero(np.triu(D))))
    return MatchedInstance(build_two_community(spec), spec, cfg, attempt, edges)


def modified_tilde_graph(g: WeightedDigraph, cond: Condensation) -> WeightedDigraph:
    """Make every link from a regular node into a sink two-way and drop links inside the sinks.

    Rows of regular nodes are kept; a sink node ``i`` gets ``W~_ij = W_ji``
    for regular ``j`` and nothing else.
    """
    S = list(cond.sink_nodes)
    R = list(cond.regular_set)
    W = g.weights
    Wt = np.zeros_like(W)
    Wt[R, :] = W[R, :]
    if R and S:
        Wt[np.ix_(S, R)] = W[np.ix_(R, S)].T
    return WeightedDigraph(Wt)


@dataclass(frozen=True, eq=False)
class CommunityTilde:
    graph: WeightedDigraph
    kept: list[int]  # original node ids, in the order of ``graph``
    stubborn: list[int]  # positions (in ``graph``) of the stubborn set {v_h} and U_{1-h}
    internal_edges: int


def community_tilde_graph(inst: MatchedInstance, h: int) -> CommunityTilde:
    """Per-community graph ``G~_h`` with stubborn set ``{v_h}`` plus the other community.

    Drops ``v_{1-h}`` and the links inside ``U_{1-h}``, freezes ``U_{1-h}``
    as stubborn nodes, then applies :func:`modified_tilde_graph`.
    """
    from .components import condense

    other = inst.community(1 - h)
    kept = [i for i in range(inst.graph.n) if i != inst.stubborn(1 - h)]
    W = inst.graph.weights.copy()
    W[np.ix_(other, other)] = 0.0
    W[other, :] = 0.0
    W[other, other] = 1.0  # stubborn self-loops
    hat = WeightedDigraph(W[np.ix_(kept, kept)])
    tilde = modified_tilde_graph(hat, condense(hat))
    pos = {node: k for k, node in enumerate(kept)}
    stubborn = [pos[inst.stubborn(h)]] + [pos[i] for i in other]
    return CommunityTilde(tilde, kept, stubborn, inst.internal_edges[h])


def write_generated(graph: WeightedDigraph, config: GeneratorConfig, path: str | Path) -> Path:
    """Write the edge list plus a ``.json`` sidecar holding the config."""
    path = Path(path)
    write_edge_list(graph, path)
    side = path.with_suffix(path.suffix + ".json")
    side.write_text(config.to_json() + "\n", encoding="utf-8")
    return side
