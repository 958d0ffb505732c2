"""Polarization versus homogeneous influence for graphs with stubborn nodes."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .components import Condensation, condense, is_connected
from .core import WeightedDigraph, derive_matrices
from .errors import InvalidBlockStructure, ModifiedGraphDisconnected

CSV_COLUMNS = (
    "gamma", "beta", "n0", "n1", "y0", "y1", "bound_h0", "bound_h1",
    "gap_bound", "polar_frac", "homog_frac", "fluidity", "thm4_bound",
)


@dataclass(frozen=True, eq=False)
class TwoCommunitySpec:
    """Weight blocks of the two-community graph ``v0, U0, U1, v1``.

    ``A`` and ``D`` are the internal weights of ``U0`` and ``U1``; ``B`` holds
    the links ``U0 -> U1`` and ``C`` the links back. Every ``U_h`` node has a
    weight-``gamma`` link to ``v_h``.
    """

    n0: int
    n1: int
    gamma: float
    beta0: float
    beta1: float
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray

    def validate(self, tol: float = 1e-12) -> None:
        A, B, C, D = (np.asarray(x, dtype=float) for x in (self.A, self.B, self.C, self.D))
        shapes = {"A": (self.n0, self.n0), "B": (self.n0, self.n1), "C": (self.n1, self.n0), "D": (self.n1, self.n1)}
        for name, blk in zip("ABCD", (A, B, C, D)):
            if blk.shape != shapes[name]:
                raise InvalidBlockStructure(f"block {name} has shape {blk.shape}, expected {shapes[name]}")
            if np.any(blk < 0):
                raise InvalidBlockStructure(f"block {name} has negative entries")
        if min(self.gamma, self.beta0, self.beta1) <= 0:
            raise InvalidBlockStructure("gamma, beta0 and beta1 must be positive")
        checks = [
            ("A = A'", np.abs(A - A.T).max(initial=0)),
            ("D = D'", np.abs(D - D.T).max(initial=0)),
            ("B = C'", np.abs(B - C.T).max(initial=0)),
            ("B 1 = beta0 1", np.abs(B.sum(axis=1) - self.beta0).max(initial=0)),
            ("C 1 = beta1 1", np.abs(C.sum(axis=1) - self.beta1).max(initial=0)),
        ]
        for label, err in checks:
            if err > tol * max(1.0, self.beta0, self.beta1, float(np.abs(A).max(initial=0)), float(np.abs(D).max(initial=0))):
                raise InvalidBlockStructure(f"{label} violated by {err:.3e}")


def build_two_community(spec: TwoCommunitySpec) -> WeightedDigraph:
    spec.validate()
    n0, n1, g = spec.n0, spec.n1, spec.gamma
    n = n0 + n1 + 2
    U0 = slice(1, n0 + 1)
    U1 = slice(n0 + 1, n0 + n1 + 1)
    W = np.zeros((n, n))
    W[0, 0] = g
    W[n - 1, n - 1] = g
    W[U0, 0] = g
    W[U1, n - 1] = g
    W[U0, U0] = spec.A
    W[U0, U1] = spec.B
    W[U1, U0] = spec.C
    W[U1, U1] = spec.D
    return WeightedDigraph(W)


def community_means(x_star, spec: TwoCommunitySpec) -> tuple[float, float]:
    x = np.asarray(x_star, dtype=float)
    return float(x[1 : spec.n0 + 1].mean()), float(x[spec.n0 + 1 : spec.n0 + spec.n1 + 1].mean())


@dataclass(frozen=True)
class CommunityBounds:
    bound_h: tuple[float, float]
    bound_gap: float

    def verify(self, y0: float, y1: float, atol: float = 1e-12) -> bool:
        return (
            abs(0.0 - y0) <= self.bound_h[0] + atol
            and abs(1.0 - y1) <= self.bound_h[1] + atol
            and y1 - y0 <= self.bound_gap + atol
        )


def proposition3_bounds(spec: TwoCommunitySpec) -> CommunityBounds:
    """Bounds on ``|h - y_h|`` and on ``y1 - y0`` for stubborn values 0 and 1."""
    n = (spec.n0, spec.n1)
    beta = (spec.beta0, spec.beta1)
    bound_h = tuple(1.0 / (1.0 + n[h] / n[1 - h] + spec.gamma / beta[h]) for h in (0, 1))
    gap = 1.0 / (1.0 + spec.beta0 / spec.gamma + spec.beta1 / spec.gamma)
    return CommunityBounds(bound_h, gap)


@dataclass(frozen=True)
class RegimeMetrics:
    epsilon: float
    homog_fraction: float
    polar_fraction: float
    homog_center: float


def homogeneous_fraction(x, epsilon: float, rtol: float = 1e-12) -> tuple[float, float]:
    """Largest fraction of entries inside one open window ``(c - eps, c + eps)``.

    Some optimal window has its left end just below a data point, so it is
    enough to count ``x_i <= x_j < x_i + 2 eps`` for every ``i``. Gaps within
    ``rtol`` of ``2 eps`` count as touching the open boundary. Returns the
    fraction and one optimal center.
    """
    xs = np.sort(np.asarray(x, dtype=float))
    n = len(xs)
    width = 2.0 * epsilon
    slack = rtol * max(1.0, width, float(np.abs(xs).max(initial=0.0)))
    hi = np.searchsorted(xs, xs + width - slack, side="left")
    lo = np.searchsorted(xs, xs, side="left")
    counts = hi - lo
    best = int(np.argmax(counts))
    right = xs[hi[best] - 1]
    # any center in (right - eps, xs[best] + eps) works; take the midpoint
    center = 0.5 * ((right - epsilon) + (xs[best] + epsilon))
    return counts[best] / n, float(center)


def polarized_fraction(x, xbar, epsilon: float) -> float:
    x = np.asarray(x, dtype=float)
    xbar = np.asarray(xbar, dtype=float)
    near = np.abs(x[:, None] - xbar[None, :]).min(axis=1) < epsilon
    return float(near.mean())


def regime_metrics(x_star, xbar, epsilon: float) -> RegimeMetrics:
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    frac, center = homogeneous_fraction(x_star, epsilon)
    return RegimeMetrics(epsilon, float(frac), polarized_fraction(x_star, xbar, epsilon), center)


def psi(y: float) -> float:
    """``y log(e^2 / y)``, extended by continuity to 0 at ``y = 0``."""
    if y <= 0:
        return 0.0
    return y * (2.0 - math.log(y))


@dataclass(frozen=True)
class FluidityBound:
    bound: float
    fluidity: float
    empirical_fraction: float
    tau_tilde: int
    pi_tilde_sinks: float
    pi_tilde_min: float
    delta: float
    center: float

    @property
    def holds(self) -> bool:
        return self.empirical_fraction <= self.bound


def theorem4_bound(g: WeightedDigraph, cond: Condensation, xbar, epsilon: float, x_star=None) -> FluidityBound:
    """Fraction of nodes at distance ``>= eps`` from ``pi~' x`` and its fluidity bound.

    The bound is ``Delta / (eps n pi~_*) psi(tau~ pi~_S)`` with ``pi~`` and
    ``tau~`` taken on the graph where links into the sinks are made two-way.
    """
    from .dynamics import centrality, mixing_time
    from .equilibrium import equilibrium_profile
    from .generators import modified_tilde_graph

    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    xbar = np.asarray(xbar, dtype=float)
    if x_star is None:
        m = derive_matrices(g, 0.5)
        x0 = np.zeros(g.n)
        # stubborn/sink values enter through x0 on each sink, uniform inside a sink
        for k, comp in enumerate(cond.sink_sets):
            x0[list(comp)] = xbar[k]
        x_star = equilibrium_profile(cond, m, x0).x_star
    x = np.asarray(x_star, dtype=float)

    tilde = modified_tilde_graph(g, cond)
    if not is_connected(tilde):
        raise ModifiedGraphDisconnected("graph with two-way sink links is not connected")
    mt = derive_matrices(tilde, 0.5)
    pi = centrality(mt)
    tau = mixing_time(mt, pi)
    pi_s = float(pi[list(cond.sink_nodes)].sum())
    pi_min = float(pi.min())
    delta = float(xbar.max() - xbar.min()) if len(xbar) else 0.0
    fluidity = tau * pi_s
    bound = delta / (epsilon * g.n * pi_min) * psi(fluidity)
    center = float(pi @ x)
    empirical = float(np.mean(np.abs(x - center) >= epsilon))
    return FluidityBound(bound, fluidity, empirical, tau, pi_s, pi_min, delta, center)


@dataclass(frozen=True)
class ConservationCheck:
    inverse_resistance: float
    flow_into_v0: float
    cross_flow: float
    flow_into_v1: float
    resistance: float
    resistance_lower_bound: float
    tol: float = 1e-8

    @property
    def identity_holds(self) -> bool:
        vals = (self.flow_into_v0, self.cross_flow, self.flow_into_v1)
        return all(abs(v - self.inverse_resistance) <= self.tol for v in vals)

    @property
    def lower_bound_holds(self) -> bool:
        return self.resistance >= self.resistance_lower_bound - self.tol

    def __bool__(self) -> bool:
        return self.identity_holds and self.lower_bound_holds


def conservation_identity_check(g: WeightedDigraph, x_star, spec: TwoCommunitySpec, tol: float = 1e-8) -> ConservationCheck:
    """Current balance of the two-community network with ``x_v0 = 0``, ``x_v1 = 1``.

    Compares ``1/R_{v0<->v1}`` with the current into ``v0``, the current
    across the ``U0``/``U1`` cut and the current out of ``v1``, and checks the
    lower bound on ``R`` obtained by gluing each community into one node.
    """
    from .electrical import effective_resistance, electrical_network, restriction_violation

    cond = condense(g)
    # the communities may only meet through the stubborn nodes; symmetry is what matters
    if isinstance(restriction_violation(g, cond), tuple):
        raise InvalidBlockStructure("links between regular nodes are not symmetric")
    x = np.asarray(x_star, dtype=float)
    n0, n1, gam = spec.n0, spec.n1, spec.gamma
    U0 = np.arange(1, n0 + 1)
    U1 = np.arange(n0 + 1, n0 + n1 + 1)
    v1 = n0 + n1 + 1
    net, mapping = electrical_network(g, cond)
    R = effective_resistance(net, [mapping[0]], [mapping[v1]])
    W = g.weights
    cross = float((W[np.ix_(U0, U1)] * (x[U1][None, :] - x[U0][:, None])).sum())
    lower = 1.0 / (gam * n0) + 1.0 / (n0 * spec.beta0) + 1.0 / (gam * n1)
    return ConservationCheck(
        inverse_resistance=1.0 / R,
        flow_into_v0=float(gam * x[U0].sum()),
        cross_flow=cross,
        flow_into_v1=float(gam * (1.0 - x[U1]).sum()),
        resistance=R,
        resistance_lower_bound=lower,
        tol=tol,
    )
