"""Asymptotic equilibrium of averaging dynamics on graphs with several sinks.

The influence matrix ``H`` (n x s) maps the consensus value reached inside
each sink component to the limit state of every node. Three independent
routes compute it: a block solve on the regular/sink partition of
``P_alpha``, a boundary-value Laplace solve on ``L``, and Monte Carlo
absorption frequencies of the random walk driven by ``P_alpha``.
"""
from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .components import Condensation
from .core import DerivedMatrices, derive_matrices, WeightedDigraph
from .dynamics import centrality
from .errors import MonteCarloCapExceeded, SingularSystem

MC_STEP_CAP = 10**6
METHODS = ("block_solve", "laplace_solve", "monte_carlo")


@dataclass(frozen=True, eq=False)
class InfluenceResult:
    H: np.ndarray
    method: str
    stderr: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class EquilibriumProfile:
    xbar: np.ndarray
    H: np.ndarray
    x_star: np.ndarray
    sink_centralities: list = field(default_factory=list)
    method: str = "block_solve"
    stderr: np.ndarray | None = None

    def to_dict(self) -> dict:
        out = {
            "xbar": self.xbar.tolist(),
            "H": self.H.tolist(),
            "x_star": self.x_star.tolist(),
            "method": self.method,
        }
        if self.stderr is not None:
            out["stderr"] = self.stderr.tolist()
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


def _sink_centralities(cond: Condensation, m: DerivedMatrices) -> list[np.ndarray]:
    out = []
    P = np.asarray(m.P)
    for comp in cond.sink_sets:
        if len(comp) == 1:
            out.append(np.ones(1))
            continue
        # no weight leaves a sink, so its block of P is already stochastic
        sub = derive_matrices(WeightedDigraph(P[np.ix_(comp, comp)]), m.alpha)
        out.append(centrality(sub))
    return out


def sink_averages(cond: Condensation, m: DerivedMatrices, x0) -> np.ndarray:
    """Consensus value reached inside each sink: ``sum_i pi^(k)_i x_i(0)``."""
    x0 = np.asarray(x0, dtype=float)
    pis = _sink_centralities(cond, m)
    return np.array([float(pi @ x0[list(comp)]) for pi, comp in zip(pis, cond.sink_sets)])


def _indicator_rows(cond: Condensation, n: int) -> np.ndarray:
    H = np.zeros((n, cond.sink_count))
    for k, comp in enumerate(cond.sink_sets):
        H[list(comp), k] = 1.0
    return H


def _block_solve(cond: Condensation, m: DerivedMatrices) -> np.ndarray:
    n = m.n
    H = _indicator_rows(cond, n)
    R = list(cond.regular_set)
    if not R:
        return H
    Pa = np.asarray(m.P_alpha)
    Q = Pa[np.ix_(R, R)]
    rhs = np.column_stack([Pa[np.ix_(R, list(comp))].sum(axis=1) for comp in cond.sink_sets])
    lu, piv = scipy.linalg.lu_factor(np.eye(len(R)) - Q)
    if np.any(np.abs(np.diag(lu)) < 1e-14):
        raise SingularSystem("I - Q is singular; some regular node cannot reach a sink")
    H[R, :] = scipy.linalg.lu_solve((lu, piv), rhs)
    return H


def _laplace_solve(cond: Condensation, m: DerivedMatrices) -> np.ndarray:
    n = m.n
    A = np.array(m.L, dtype=float)
    B = np.zeros((n, cond.sink_count))
    for k, comp in enumerate(cond.sink_sets):
        for i in comp:
            A[i, :] = 0.0
            A[i, i] = 1.0
            B[i, k] = 1.0
    try:
        return np.linalg.solve(A, B)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc


def _stream(seed: int, node: int) -> np.random.Generator:
    # one counter-based stream per start node: reproducible for any thread count
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(node,))))


def _walk_counts(flat_cum, n, sink_label, start, samples, seed, step_cap):
    rng = _stream(seed, start)
    s = sink_label.max() + 1
    counts = np.zeros(s, dtype=np.int64)
    pos = np.full(samples, start, dtype=np.int64)
    for _ in range(step_cap):
        u = rng.random(len(pos))
        idx = np.searchsorted(flat_cum, pos + u, side="right")
        pos = np.minimum(idx - pos * n, n - 1)
        hit = sink_label[pos]
        done = hit >= 0
        if done.any():
            counts += np.bincount(hit[done], minlength=s)
            pos = pos[~done]
            if len(pos) == 0:
                return counts
    raise MonteCarloCapExceeded(f"walks from node {start} not absorbed within {step_cap} steps")


def _monte_carlo(cond, m, samples, seed, step_cap=MC_STEP_CAP, workers=None):
    if samples < 1:
        raise ValueError("samples must be at least 1")
    n = m.n
    H = _indicator_rows(cond, n)
    se = np.zeros_like(H)
    R = list(cond.regular_set)
    if not R:
        return H, se
    cum = np.cumsum(np.asarray(m.P_alpha), axis=1)
    cum[:, -1] = 1.0
    flat_cum = (cum + np.arange(n)[:, None]).ravel()
    sink_label = cond.sink_label()
    if workers is None:
        workers = int(os.environ.get("AVERKIT_THREADS", "1"))

    def run(i):
        return _walk_counts(flat_cum, n, sink_label, i, samples, seed, step_cap)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(run, R))
    else:
        rows = [run(i) for i in R]
    freq = np.array(rows, dtype=float) / samples
    H[R, :] = freq
    se[R, :] = np.sqrt(freq * (1.0 - freq) / samples)
    return H, se


def influence_matrix(
    cond: Condensation,
    m: DerivedMatrices,
    method: str = "block_solve",
    samples: int = 10_000,
    seed: int = 0,
    step_cap: int = MC_STEP_CAP,
) -> InfluenceResult:
    """Influence matrix ``H``; Monte Carlo also returns binomial standard errors."""
    if cond.sink_count < 1:
        raise ValueError("graph has no sink component")
    if method == "block_solve":
        return InfluenceResult(_block_solve(cond, m), method)
    if method == "laplace_solve":
        return InfluenceResult(_laplace_solve(cond, m), method)
    if method == "monte_carlo":
        if not 0.0 < m.alpha < 1.0:
            raise ValueError("monte_carlo needs alpha strictly inside (0, 1)")
        H, se = _monte_carlo(cond, m, samples, seed, step_cap)
        return InfluenceResult(H, method, se)
    raise ValueError(f"unknown method {method!r}; choose from {METHODS}")


def equilibrium_profile(
    cond: Condensation, m: DerivedMatrices, x0, method: str = "block_solve", **kwargs
) -> EquilibriumProfile:
    pis = _sink_centralities(cond, m)
    x0 = np.asarray(x0, dtype=float)
    xbar = np.array([float(pi @ x0[list(comp)]) for pi, comp in zip(pis, cond.sink_sets)])
    if cond.sink_count == 1:
        res = InfluenceResult(np.ones((m.n, 1)), method)
    else:
        res = influence_matrix(cond, m, method, **kwargs)
    return EquilibriumProfile(
        xbar=xbar,
        H=res.H,
        x_star=res.H @ xbar,
        sink_centralities=pis,
        method=method,
        stderr=res.stderr,
    )


def limit_matrix(cond: Condensation, m: DerivedMatrices, H: np.ndarray | None = None) -> np.ndarray:
    """``lim P_alpha^t`` for ``alpha`` in (0, 1): row i is ``sum_k H_ik pi^(k)`` on ``S_k``."""
    if H is None:
        H = _block_solve(cond, m)
    Pi = np.zeros((cond.sink_count, m.n))
    for k, (pi, comp) in enumerate(zip(_sink_centralities(cond, m), cond.sink_sets)):
        Pi[k, list(comp)] = pi
    return H @ Pi


def kirchhoff_residual(cond: Condensation, m: DerivedMatrices, x: np.ndarray) -> float:
    """``||(L x)_R||_inf``; zero at an equilibrium."""
    R = list(cond.regular_set)
    if not R:
        return 0.0
    return float(np.abs((np.asarray(m.L) @ x)[R]).max())
