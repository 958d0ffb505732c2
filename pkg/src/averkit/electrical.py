"""Electrical-network view of the equilibrium on graphs with an undirected interior.

Weights are conductances, node states are voltages and ``W_ij (x_i - x_j)``
is the current on link ``(i, j)``. Effective resistances come from
boundary-value Laplace solves; the Green matrix gives an independent
spectral route to the same numbers.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .components import Condensation
from .core import EXACT_TOL, WeightedDigraph, symmetric_violation
from .errors import Disconnected, IllConditioned, NotUndirected, OverlappingGroups


def _laplacian(W: np.ndarray) -> np.ndarray:
    return np.diag(W.sum(axis=1)) - W


def _connected_undirected(W: np.ndarray, nodes: Sequence[int] | None = None) -> bool:
    idx = np.arange(W.shape[0]) if nodes is None else np.asarray(nodes, dtype=int)
    if len(idx) == 0:
        return False
    sub = W[np.ix_(idx, idx)]
    ncomp, _ = connected_components(csr_matrix((sub + sub.T) > 0), directed=False)
    return ncomp == 1


def restriction_violation(g: WeightedDigraph, cond: Condensation):
    """Why the regular-node restriction is not connected and undirected.

    Returns None when the gate passes, an asymmetric pair ``(i, j)``, or the
    string ``"disconnected"``.
    """
    R = list(cond.regular_set)
    if not R:
        return None
    pair = symmetric_violation(g.weights, R)
    if pair is not None:
        return pair
    if not _connected_undirected(g.weights, R):
        return "disconnected"
    return None


def check_undirected_restriction(g: WeightedDigraph, cond: Condensation) -> bool:
    return restriction_violation(g, cond) is None


def glue(
    g: WeightedDigraph, groups: Iterable[Iterable[int]], bidirectional: bool = False
) -> tuple[WeightedDigraph, np.ndarray]:
    """Merge each group of nodes into one node.

    Weights of parallel links are summed and links internal to a merged group
    disappear. Nodes of the new graph are numbered by the smallest original
    id they contain; ``mapping[i]`` is the new id of original node ``i``.
    With ``bidirectional=True`` every link touching a glued node is made
    two-way, taking the larger of its two directed weights.
    """
    n = g.n
    groups = [sorted(set(int(i) for i in grp)) for grp in groups]
    owner = np.full(n, -1, dtype=int)
    for gi, grp in enumerate(groups):
        if not grp:
            raise ValueError("empty group")
        for i in grp:
            if owner[i] >= 0:
                raise OverlappingGroups(f"node {i} appears in more than one group")
            owner[i] = gi
    # representative = smallest member; classes ordered by representative
    rep = np.arange(n)
    for grp in groups:
        rep[grp] = grp[0]
    reps = sorted(set(rep.tolist()))
    new_id = {r: k for k, r in enumerate(reps)}
    mapping = np.array([new_id[int(r)] for r in rep], dtype=int)
    M = np.zeros((n, len(reps)))
    M[np.arange(n), mapping] = 1.0
    W = M.T @ g.weights @ M
    merged = [mapping[grp[0]] for grp in groups]
    for grp, u in zip(groups, merged):
        if len(grp) > 1:
            W[u, u] = 0.0
    if bidirectional:
        for u in merged:
            col = np.maximum(W[u, :], W[:, u])
            W[u, :] = col
            W[:, u] = col
    mapping.setflags(write=False)
    return WeightedDigraph(W), mapping


def _require_network(g: WeightedDigraph) -> None:
    pair = symmetric_violation(g.weights)
    if pair is not None:
        raise NotUndirected(f"link weights differ on the pair {pair}", pair)
    if not _connected_undirected(g.weights):
        raise Disconnected("electrical network must be connected")


def _as_index(nodes) -> list[int]:
    return sorted(set(int(i) for i in np.atleast_1d(nodes)))


@dataclass(frozen=True, eq=False)
class VoltageSolution:
    voltages: np.ndarray
    resistance: float
    sources: tuple[int, ...]
    targets: tuple[int, ...]


def unit_voltage(g: WeightedDigraph, A, B) -> VoltageSolution:
    """Harmonic ``y`` with ``y = 1`` on ``A`` and ``y = 0`` on ``B``, and ``R = 1 / outflow(A)``."""
    _require_network(g)
    A, B = _as_index(A), _as_index(B)
    if not A or not B:
        raise ValueError("source and target sets must be nonempty")
    if set(A) & set(B):
        raise ValueError("source and target sets overlap")
    W = g.weights
    L = _laplacian(W)
    y = np.zeros(g.n)
    y[A] = 1.0
    interior = [i for i in range(g.n) if i not in set(A) | set(B)]
    if interior:
        y[interior] = np.linalg.solve(L[np.ix_(interior, interior)], -L[np.ix_(interior, A)].sum(axis=1))
    outflow = float((L @ y)[A].sum())
    return VoltageSolution(y, 1.0 / outflow, tuple(A), tuple(B))


def effective_resistance(g: WeightedDigraph, A, B) -> float:
    return unit_voltage(g, A, B).resistance


def energy(g: WeightedDigraph, y) -> float:
    """``1/2 sum_{i,j} W_ij (y_i - y_j)^2`` over ordered pairs."""
    y = np.asarray(y, dtype=float)
    return 0.5 * float((g.weights * (y[:, None] - y[None, :]) ** 2).sum())


def flow_energy(g: WeightedDigraph, theta) -> float:
    """``1/2 sum_{i,j} theta_ij^2 / W_ij`` over links."""
    W = g.weights
    mask = W > 0
    return 0.5 * float((np.asarray(theta)[mask] ** 2 / W[mask]).sum())


def cut_flow(theta, U) -> float:
    theta = np.asarray(theta)
    inside = np.zeros(theta.shape[0], dtype=bool)
    inside[_as_index(U)] = True
    return float(theta[np.ix_(inside, ~inside)].sum())


@dataclass(frozen=True, eq=False)
class ThompsonFlow:
    theta: np.ndarray
    resistance: float
    voltages: np.ndarray
    primal_energy: float
    dual_energy: float

    def net_outflow(self) -> np.ndarray:
        return self.theta.sum(axis=1)


def thompson_flow(g: WeightedDigraph, A, B) -> ThompsonFlow:
    """Unit current from ``A`` to ``B``: ``theta_ij = W_ij (y_i - y_j) R``."""
    sol = unit_voltage(g, A, B)
    y = sol.voltages
    theta = g.weights * (y[:, None] - y[None, :]) * sol.resistance
    return ThompsonFlow(
        theta=theta,
        resistance=sol.resistance,
        voltages=y,
        primal_energy=energy(g, y),
        dual_energy=flow_energy(g, theta),
    )


@dataclass(frozen=True, eq=False)
class GreenMatrix:
    G: np.ndarray
    eigenvalues: np.ndarray  # lambda_2..lambda_n
    eigenvectors: np.ndarray  # matching columns


def green_matrix(g: WeightedDigraph, tol: float = 1e-10) -> GreenMatrix:
    """``G = sum_{l>=2} phi_l phi_l' / lambda_l`` from the Laplacian spectrum."""
    _require_network(g)
    lam, phi = np.linalg.eigh(_laplacian(g.weights))
    if g.n > 1 and lam[1] < tol:
        raise IllConditioned(f"second Laplacian eigenvalue {lam[1]:.3e} is below {tol}")
    lam, phi = lam[1:], phi[:, 1:]
    G = (phi / lam) @ phi.T
    G = 0.5 * (G + G.T)
    return GreenMatrix(G, lam, phi)


def resistance_via_green(G: GreenMatrix | np.ndarray, h: int, j: int) -> float:
    M = G.G if isinstance(G, GreenMatrix) else np.asarray(G)
    if h == j:
        return 0.0
    return float(M[h, h] - 2.0 * M[h, j] + M[j, j])


def _glued_for_sink(g: WeightedDigraph, cond: Condensation, k: int):
    sinks = cond.sink_sets
    own = list(sinks[k])
    rest = [i for kk, comp in enumerate(sinks) if kk != k for i in comp]
    net, mapping = glue(g, [own, rest], bidirectional=True)
    return net, mapping, int(mapping[own[0]]), int(mapping[rest[0]])


def resistance_influence(g: WeightedDigraph, cond: Condensation, method: str = "green") -> np.ndarray:
    """Influence matrix from effective resistances on the sink-glued graphs.

    ``H_ik = (R_{Sk<->S-k} + R_{i<->S-k} - R_{i<->Sk}) / (2 R_{Sk<->S-k})``;
    ``method`` picks the Green-matrix or the Laplace-solve route for each
    resistance.
    """
    if cond.sink_count < 2:
        raise ValueError("need at least two sink components")
    violation = restriction_violation(g, cond)
    if violation is not None:
        pair = violation if isinstance(violation, tuple) else None
        raise NotUndirected(f"regular-node restriction fails the gate: {violation}", pair)
    n, s = g.n, cond.sink_count
    H = np.zeros((n, s))
    for k in range(s):
        net, mapping, v, vbar = _glued_for_sink(g, cond, k)
        if method == "green":
            G = green_matrix(net)
            r = lambda a, b: resistance_via_green(G, a, b)  # noqa: E731
        elif method == "solve":
            r = lambda a, b: 0.0 if a == b else effective_resistance(net, [a], [b])  # noqa: E731
        else:
            raise ValueError(f"unknown resistance method {method!r}")
        r_sinks = r(v, vbar)
        for i in range(n):
            li = int(mapping[i])
            H[i, k] = (r_sinks + r(li, vbar) - r(li, v)) / (2.0 * r_sinks)
    return H


def equilibrium_via_resistances(g: WeightedDigraph, cond: Condensation, xbar, method: str = "green") -> np.ndarray:
    """``x_i = 1/2 sum_k xbar_k (1 + (R_{i<->S-k} - R_{i<->Sk}) / R_{Sk<->S-k})``."""
    return resistance_influence(g, cond, method) @ np.asarray(xbar, dtype=float)


def electrical_network(g: WeightedDigraph, cond: Condensation) -> tuple[WeightedDigraph, np.ndarray]:
    """Undirected network on which voltages are defined.

    An undirected graph is used as is. Otherwise each sink component is glued
    into one node whose incident links become two-way.
    """
    if symmetric_violation(g.weights) is None:
        return g, np.arange(g.n)
    return glue(g, cond.sink_sets, bidirectional=True)


@dataclass(frozen=True)
class RayleighCheck:
    before: float
    after: float

    @property
    def ok(self) -> bool:
        return self.after <= self.before + EXACT_TOL

    def __bool__(self) -> bool:
        return self.ok


def apply_modification(g: WeightedDigraph, A, B, modification: tuple):
    """Perturb an undirected network; returns the new graph and the remapped ``A``, ``B``.

    ``modification`` is ``("add-edge", i, j, w)``, ``("increase-weight", i, j, dw)``
    or ``("glue-pair", i, j)``.
    """
    kind, i, j, *rest = modification
    A, B = _as_index(A), _as_index(B)
    if kind in ("add-edge", "increase-weight"):
        (dw,) = rest
        if dw <= 0 or i == j:
            raise ValueError("weight change must be positive and off the diagonal")
        if kind == "add-edge" and g.weights[i, j] > 0:
            raise ValueError(f"link ({i}, {j}) already present")
        if kind == "increase-weight" and g.weights[i, j] == 0:
            raise ValueError(f"link ({i}, {j}) absent")
        W = g.weights.copy()
        W[i, j] += dw
        W[j, i] += dw
        return WeightedDigraph(W), A, B
    if kind == "glue-pair":
        if (i in A and j in B) or (i in B and j in A):
            raise ValueError("cannot glue a source to a target")
        net, mapping = glue(g, [[i, j]])
        return net, sorted(set(mapping[A].tolist())), sorted(set(mapping[B].tolist()))
    raise ValueError(f"unknown modification {kind!r}")


def check_rayleigh(g: WeightedDigraph, A, B, modification: tuple) -> RayleighCheck:
    before = effective_resistance(g, A, B)
    g2, A2, B2 = apply_modification(g, A, B, modification)
    return RayleighCheck(before, effective_resistance(g2, A2, B2))


@dataclass(frozen=True, eq=False)
class ElectricalReport:
    voltages: np.ndarray
    flows: np.ndarray
    r_eff: dict = field(default_factory=dict)

    def kirchhoff_residual(self, nodes: Sequence[int]) -> float:
        if len(nodes) == 0:
            return 0.0
        return float(np.abs(self.flows.sum(axis=1)[list(nodes)]).max())

    def to_dict(self) -> dict:
        src, dst = np.nonzero(self.flows > 0)
        return {
            "voltages": self.voltages.tolist(),
            "r_eff": dict(self.r_eff),
            "flows": [[int(i), int(j), float(self.flows[i, j])] for i, j in zip(src, dst)],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def set_key(A, B) -> str:
    return ",".join(map(str, _as_index(A))) + "|" + ",".join(map(str, _as_index(B)))


def link_flows(g: WeightedDigraph, x) -> np.ndarray:
    """Ohm's law ``f_ij = W_ij (x_i - x_j)``."""
    x = np.asarray(x, dtype=float)
    return g.weights * (x[:, None] - x[None, :])
