"""Averaging trajectories, centrality, mixing time and conductance."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .core import EXACT_TOL, DerivedMatrices
from .errors import MixingCapExceeded, NotConnected, TooLargeForExhaustive

MIXING_THRESHOLD = 1.0 / (2.0 * math.e)
MAX_EXHAUSTIVE_NODES = 24


@dataclass(frozen=True, eq=False)
class Trajectory:
    states: np.ndarray  # shape (T+1, n); row t is x(t)
    alpha: float
    converged_at: int | None

    def to_csv(self) -> str:
        n = self.states.shape[1]
        buf = io.StringIO()
        buf.write(",".join(["t"] + [f"x_{i}" for i in range(n)]) + "\n")
        for t, row in enumerate(self.states):
            buf.write(",".join([str(t)] + [repr(float(v)) for v in row]) + "\n")
        return buf.getvalue()


@dataclass(frozen=True, eq=False)
class SpectralSummary:
    pi: np.ndarray
    tau_alpha: int
    phi: float
    pi_star: float


def _require_connected(P: np.ndarray) -> None:
    ncomp, _ = connected_components(csr_matrix(P > 0), directed=True, connection="strong")
    if ncomp != 1:
        raise NotConnected(f"graph has {ncomp} connected components; centrality needs exactly one")


def simulate(m: DerivedMatrices, x0, t_max: int, tol: float = EXACT_TOL) -> Trajectory:
    """Iterate ``x(t+1) = P_alpha x(t)`` for at most ``t_max`` steps.

    Stops after the first step whose sup-norm change is below ``tol``; that
    step's result is the last recorded state.
    """
    x = np.asarray(x0, dtype=float)
    if x.shape != (m.n,):
        raise ValueError(f"x0 has shape {x.shape}, expected ({m.n},)")
    if t_max < 0:
        raise ValueError("t_max must be nonnegative")
    states = [x]
    converged_at = None
    for t in range(t_max):
        nxt = m.P_alpha @ x
        states.append(nxt)
        if np.max(np.abs(nxt - x)) < tol:
            converged_at = t
            break
        x = nxt
    return Trajectory(np.array(states), m.alpha, converged_at)


def relaxation_time(P: np.ndarray) -> float:
    """``1 / (1 - |lambda_2|)`` for a stochastic matrix; inf when the gap closes."""
    lam = np.sort(np.abs(np.linalg.eigvals(P)))[::-1]
    if len(lam) < 2:
        return 1.0
    gap = 1.0 - lam[1]
    return math.inf if gap <= 1e-14 else 1.0 / gap


def _centrality_direct(P: np.ndarray) -> np.ndarray:
    n = P.shape[0]
    A = P.T - np.eye(n)
    A[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    pi = np.linalg.solve(A, b)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def _centrality_power(P: np.ndarray, tol: float, cap: int) -> np.ndarray | None:
    n = P.shape[0]
    lazy = 0.5 * (np.eye(n) + P)
    v = np.full(n, 1.0 / n)
    for _ in range(cap):
        nxt = v @ lazy
        nxt /= nxt.sum()
        if np.abs(nxt - v).sum() < tol:
            return nxt
        v = nxt
    return None


def centrality(m: DerivedMatrices, method: str = "power", tol: float = EXACT_TOL) -> np.ndarray:
    """Normalized left fixed point of ``P``.

    ``method="power"`` iterates on the lazy chain ``(I + P)/2`` and falls back
    to the direct solve when the iteration cap ``10 n ceil(t_rel)`` is hit;
    ``method="direct"`` solves ``(P' - I) pi = 0`` with ``1' pi = 1``.
    """
    P = np.asarray(m.P)
    _require_connected(P)
    if method == "direct":
        return _centrality_direct(P)
    if method != "power":
        raise ValueError(f"unknown centrality method {method!r}")
    n = P.shape[0]
    t_rel = relaxation_time(0.5 * (np.eye(n) + P))
    cap = int(10 * n * math.ceil(min(t_rel, 1e6)))
    # the l1 step size underestimates the error by a factor ~t_rel
    pi = _centrality_power(P, tol / max(1.0, t_rel), max(cap, 100))
    if pi is None:
        return _centrality_direct(P)
    return pi


def consensus_value(pi, x0) -> float:
    return float(np.dot(np.asarray(pi, dtype=float), np.asarray(x0, dtype=float)))


def _is_periodic(P_alpha: np.ndarray) -> bool:
    lam = np.linalg.eigvals(P_alpha)
    unit = np.abs(np.abs(lam) - 1.0) < 1e-9
    return bool(np.any(unit & (np.abs(lam - 1.0) > 1e-6)))


def mixing_time(m: DerivedMatrices, pi, t_max: int = 10**6) -> int:
    """Smallest ``t`` with ``max_i sum_j |(P_alpha^t)_ij - limit_ij| <= 1/(2e)``.

    ``pi`` is either the centrality vector (limit ``1 pi'``, graph must be
    connected) or an explicit ``n x n`` limit matrix, which lets the same
    definition measure convergence on graphs with several sinks.
    """
    pi = np.asarray(pi, dtype=float)
    Pa = np.asarray(m.P_alpha)
    n = m.n
    if pi.ndim == 1:
        _require_connected(np.asarray(m.P))
        limit = np.broadcast_to(pi, (n, n))
        # periodic chains never mix; the eigenvalue test only short-circuits the loop
        if _is_periodic(Pa):
            raise MixingCapExceeded("P_alpha is periodic; the chain has no finite mixing time")
    else:
        limit = pi
    power = np.eye(n)
    for t in range(t_max + 1):
        if np.abs(power - limit).sum(axis=1).max() <= MIXING_THRESHOLD:
            return t
        power = power @ Pa
    raise MixingCapExceeded(f"mixing time exceeds cap {t_max}")


def conductance(m: DerivedMatrices, pi, chunk: int = 1 << 15) -> tuple[float, tuple[int, ...]]:
    """Exhaustive minimum of the normalized boundary flux over proper subsets.

    Returns the value and the lexicographically smallest minimizing subset.
    """
    n = m.n
    if n > MAX_EXHAUSTIVE_NODES:
        raise TooLargeForExhaustive(f"n={n} exceeds exhaustive limit {MAX_EXHAUSTIVE_NODES}")
    if n < 2:
        raise ValueError("conductance needs at least two nodes")
    _require_connected(np.asarray(m.P))
    pi = np.asarray(pi, dtype=float)
    flux = pi[:, None] * np.asarray(m.P)
    shifts = np.arange(n)
    best = math.inf
    best_masks: list[int] = []
    total = (1 << n) - 1
    for start in range(1, total, chunk):
        masks = np.arange(start, min(start + chunk, total), dtype=np.int64)
        bits = ((masks[:, None] >> shifts) & 1).astype(float)
        inside = bits @ pi
        outside = (1.0 - bits) @ pi
        cross = ((bits @ flux) * (1.0 - bits)).sum(axis=1)
        ratio = cross / (inside * outside)
        lo = ratio.min()
        if lo < best * (1 - 1e-12):
            best = lo
            best_masks = []
        if lo <= best * (1 + 1e-12):
            best_masks.extend(int(k) for k in masks[ratio <= best * (1 + 1e-12)])
    candidates = [tuple(i for i in range(n) if (k >> i) & 1) for k in best_masks]
    return float(best), min(candidates)


@dataclass(frozen=True)
class ConductanceBoundCheck:
    lower: float
    upper: float
    tau_half: int
    lower_ok: bool
    upper_ok: bool
    upper_applicable: bool

    @property
    def holds(self) -> bool:
        return self.lower_ok and (self.upper_ok or not self.upper_applicable)

    def __bool__(self) -> bool:
        return self.holds


def check_conductance_bound(tau_half: int, phi: float, pi_star: float) -> ConductanceBoundCheck:
    """Evaluate ``(1-2/e)/phi <= tau_half <= log(e^2/pi_star)/phi^2``.

    The upper side only counts toward ``holds`` when ``phi <= 1``.
    """
    lower = (1.0 - 2.0 / math.e) / phi
    upper = math.log(math.e**2 / pi_star) / phi**2
    return ConductanceBoundCheck(
        lower=lower,
        upper=upper,
        tau_half=int(tau_half),
        lower_ok=lower <= tau_half,
        upper_ok=tau_half <= upper,
        upper_applicable=phi <= 1.0,
    )


def convergence_envelope(traj: Trajectory, pi, tau: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-step deviation from consensus and the exponential envelope it must stay under."""
    x0 = traj.states[0]
    xbar = consensus_value(pi, x0)
    dev = np.abs(traj.states - xbar).max(axis=1)
    t = np.arange(len(traj.states))
    env = np.abs(x0 - xbar).max() * np.exp(-np.floor(t / tau))
    return dev, env


def check_convergence_envelope(traj: Trajectory, pi, tau: int, atol: float = EXACT_TOL) -> bool:
    dev, env = convergence_envelope(traj, pi, tau)
    return bool(np.all(dev <= env + atol))


def spectral_summary(m_half: DerivedMatrices) -> SpectralSummary:
    """Centrality, ``tau_{1/2}``, conductance and ``pi_*`` of a small connected graph."""
    pi = centrality(m_half)
    tau = mixing_time(m_half, pi)
    phi, _ = conductance(m_half, pi)
    return SpectralSummary(pi=pi, tau_alpha=tau, phi=phi, pi_star=float(pi.min()))
