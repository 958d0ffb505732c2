"""Command-line front end.

stdout carries data only (JSON or CSV); logs and error reports go to stderr.
Exit codes: 0 ok, 2 parse error, 3 numerical failure, 4 precondition gate.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .components import condense
from .core import derive_matrices, ensure_positive_outdegree, read_edge_list, symmetric_violation
from .dynamics import simulate
from .electrical import (
    electrical_network,
    equilibrium_via_resistances,
    link_flows,
    restriction_violation,
    set_key,
    thompson_flow,
)
from .equilibrium import equilibrium_profile, influence_matrix, kirchhoff_residual
from .errors import GraphInputError, NotUndirected, NumericalError, PreconditionError
from .generators import erdos_renyi, matched_communities, torus, write_generated
from .regimes import (
    CSV_COLUMNS,
    community_means,
    proposition3_bounds,
    regime_metrics,
    theorem4_bound,
)

log = logging.getLogger("averkit")

EXIT_OK, EXIT_PARSE, EXIT_NUMERIC, EXIT_GATE = 0, 2, 3, 4
METHOD_NAMES = {"block": "block_solve", "laplace": "laplace_solve", "mc": "monte_carlo"}


class GateFailure(Exception):
    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


def threads() -> int:
    try:
        return max(1, int(os.environ.get("AVERKIT_THREADS", "1")))
    except ValueError:
        return 1


# --- argument helpers --------------------------------------------------------

def parse_x0(n: int, spec: str | None, fill: float, path: str | None) -> np.ndarray:
    """Initial state from a file of numbers or a ``node=value,...`` spec over a fill value."""
    if path is not None:
        try:
            vals = np.array([float(t) for t in Path(path).read_text().split()])
        except ValueError as exc:
            raise GraphInputError(f"bad x0 file: {exc}") from None
        if vals.shape != (n,):
            raise GraphInputError(f"x0 file has {len(vals)} values, graph has {n} nodes")
        return vals
    x0 = np.full(n, float(fill))
    if spec:
        for item in spec.replace(";", ",").split(","):
            item = item.strip()
            if not item:
                continue
            try:
                node, value = item.split("=")
                node, value = int(node), float(value)
            except ValueError:
                raise GraphInputError(f"bad x0 entry {item!r}; expected node=value") from None
            if not 0 <= node < n:
                raise GraphInputError(f"x0 entry for node {node} outside 0..{n - 1}")
            x0[node] = value
    return x0


def parse_nodes(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise GraphInputError(f"bad node list {text!r}") from None


def parse_floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise GraphInputError(f"bad number list {text!r}") from None


def load_graph(path: str):
    try:
        return read_edge_list(path)
    except OSError as exc:
        raise GraphInputError(str(exc)) from None


def write_manifest(path: str | None, argv: list[str], args: argparse.Namespace, seeds, started: float) -> None:
    if not path:
        return
    config = {k: v for k, v in vars(args).items() if k not in ("func", "manifest")}
    manifest = {
        "argv": argv,
        "config": config,
        "seeds": seeds,
        "version": __version__,
        "wall_time_seconds": time.perf_counter() - started,
    }
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# --- commands ----------------------------------------------------------------

def cmd_analyze(args) -> dict:
    g = ensure_positive_outdegree(load_graph(args.graph))
    x0 = parse_x0(g.n, args.x0, args.x0_fill, args.x0_file)
    m = derive_matrices(g, args.alpha)
    cond = condense(g)
    method = METHOD_NAMES[args.method]
    prof = equilibrium_profile(cond, m, x0, method=method, **_mc_kwargs(args, method))
    report = {"n": g.n, "alpha": args.alpha, "condensation": cond.to_dict()}
    report.update(prof.to_dict())
    report["kirchhoff_residual"] = kirchhoff_residual(cond, m, prof.x_star)
    if args.cross_check:
        report["cross_check"] = cross_check(cond, m, args)
    return report


def _mc_kwargs(args, method):
    return {"samples": args.samples, "seed": args.seed} if method == "monte_carlo" else {}


def cross_check(cond, m, args) -> dict:
    if cond.sink_count == 1:
        return {"max_disagreement": 0.0, "note": "single sink: H = 1"}
    block = influence_matrix(cond, m, "block_solve").H
    lap = influence_matrix(cond, m, "laplace_solve").H
    out = {"block_vs_laplace": float(np.abs(block - lap).max())}
    if 0 < m.alpha < 1:
        mc = influence_matrix(cond, m, "monte_carlo", samples=args.samples, seed=args.seed)
        se = np.sqrt(block * (1 - block) / args.samples)
        dev = np.abs(mc.H - block)
        z = np.divide(dev, se, out=np.where(dev > 0, np.inf, 0.0), where=se > 0)
        out["block_vs_monte_carlo"] = float(dev.max())
        out["monte_carlo_max_z"] = float(z.max())
        out["monte_carlo_H"] = mc.H.tolist()
        out["monte_carlo_stderr"] = mc.stderr.tolist()
    out["laplace_H"] = lap.tolist()
    out["max_disagreement"] = out["block_vs_laplace"]
    return out


def cmd_electrical(args) -> dict:
    g = ensure_positive_outdegree(load_graph(args.graph))
    cond = condense(g)
    undirected = symmetric_violation(g.weights) is None
    if not undirected:
        violation = restriction_violation(g, cond)
        if violation is None and not cond.regular_set:
            violation = symmetric_violation(g.weights)
        if violation is not None:
            if isinstance(violation, tuple):
                raise GateFailure(f"regular-node links are not symmetric: ({violation[0]}, {violation[1]})", violation)
            raise GateFailure("regular nodes do not form a connected subgraph")
    net, mapping = electrical_network(g, cond)
    A = sorted(set(int(mapping[i]) for i in _checked_nodes(parse_nodes(args.sources), g.n)))
    B = sorted(set(int(mapping[i]) for i in _checked_nodes(parse_nodes(args.targets), g.n)))
    if not A or not B or set(A) & set(B):
        raise GateFailure("sources and targets must be nonempty and map to distinct network nodes")
    flow = thompson_flow(net, A, B)
    src, dst = np.nonzero(flow.theta > 0)
    report = {
        "node_map": mapping.tolist(),
        "voltages": flow.voltages.tolist(),
        "r_eff": {set_key(parse_nodes(args.sources), parse_nodes(args.targets)): flow.resistance},
        "flows": [[int(i), int(j), float(flow.theta[i, j])] for i, j in zip(src, dst)],
        "primal_energy": flow.primal_energy,
        "dual_energy": flow.dual_energy,
        "primal_times_resistance": flow.primal_energy * flow.resistance,
    }
    if args.theorem3:
        report["theorem3"] = resistance_rebuild_report(g, cond, args)
    return report


def _checked_nodes(nodes, n):
    for i in nodes:
        if not 0 <= i < n:
            raise GraphInputError(f"node {i} outside 0..{n - 1}")
    return nodes


def resistance_rebuild_report(g, cond, args) -> dict:
    if cond.sink_count < 2:
        raise GateFailure("the resistance formula needs at least two sink components")
    violation = restriction_violation(g, cond)
    if violation is not None:
        raise GateFailure(f"regular-node restriction fails the gate: {violation}",
                          violation if isinstance(violation, tuple) else None)
    m = derive_matrices(g, args.alpha)
    if args.x0 or args.x0_file:
        x0 = parse_x0(g.n, args.x0, args.x0_fill, args.x0_file)
    else:
        x0 = np.zeros(g.n)
        for k, comp in enumerate(cond.sink_sets):
            x0[list(comp)] = k / (cond.sink_count - 1)
    prof = equilibrium_profile(cond, m, x0)
    x_res = equilibrium_via_resistances(g, cond, prof.xbar)
    flows = link_flows(g, prof.x_star)
    return {
        "xbar": prof.xbar.tolist(),
        "x_direct": prof.x_star.tolist(),
        "x_resistance": x_res.tolist(),
        "deviation": float(np.abs(x_res - prof.x_star).max()),
        "kirchhoff_residual": float(np.abs(flows.sum(axis=1)[list(cond.regular_set)]).max(initial=0.0)),
    }


def sweep_row(m, omega, beta, gamma, seed, epsilon, matching) -> dict:
    inst = matched_communities(m, omega, beta, gamma, seed, matching=matching)
    g = inst.graph
    cond = condense(g)
    x0 = np.zeros(g.n)
    x0[inst.stubborn(1)] = 1.0
    prof = equilibrium_profile(cond, derive_matrices(g, 0.5), x0)
    y0, y1 = community_means(prof.x_star, inst.spec)
    bounds = proposition3_bounds(inst.spec)
    metrics = regime_metrics(prof.x_star, prof.xbar, epsilon)
    t4 = theorem4_bound(g, cond, prof.xbar, epsilon, x_star=prof.x_star)
    return {
        "gamma": gamma, "beta": beta, "n0": inst.spec.n0, "n1": inst.spec.n1,
        "y0": y0, "y1": y1, "bound_h0": bounds.bound_h[0], "bound_h1": bounds.bound_h[1],
        "gap_bound": bounds.bound_gap, "polar_frac": metrics.polar_fraction,
        "homog_frac": metrics.homog_fraction, "fluidity": t4.fluidity, "thm4_bound": t4.bound,
    }


def sweep_grid(args) -> list[tuple]:
    seeds = [args.seed + k for k in range(args.seeds)]
    return [
        (m, args.omega, beta, gamma, seed, args.epsilon, args.matching)
        for gamma in parse_floats(args.gamma)
        for beta in parse_floats(args.beta)
        for m in [int(v) for v in parse_floats(args.m)]
        for seed in seeds
    ]


def cmd_simulate(args) -> str:
    g = ensure_positive_outdegree(load_graph(args.graph))
    x0 = parse_x0(g.n, args.x0, args.x0_fill, args.x0_file)
    traj = simulate(derive_matrices(g, args.alpha), x0, args.steps, tol=args.tol)
    return traj.to_csv()


def analyze_csv(report: dict) -> str:
    H = np.asarray(report["H"])
    lines = [",".join(["node", "x_star"] + [f"H_{k}" for k in range(H.shape[1])])]
    for i, x in enumerate(report["x_star"]):
        lines.append(",".join([str(i), repr(x)] + [repr(float(h)) for h in H[i]]))
    return "\n".join(lines) + "\n"


def cmd_sweep(args) -> list[dict]:
    if args.family != "matched_er":
        raise GraphInputError(f"unsupported family {args.family!r}")
    grid = sweep_grid(args)
    log.info("sweep: %d grid points on %d thread(s)", len(grid), threads())
    with ThreadPoolExecutor(max_workers=threads()) as ex:
        # map preserves grid order regardless of completion order
        return list(ex.map(lambda p: sweep_row(*p), grid))


def format_csv(rows: list[dict]) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(repr(row[c]) if isinstance(row[c], float) else str(row[c]) for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def cmd_generate(args) -> dict:
    if args.family == "er":
        gen = erdos_renyi(args.n, args.c, args.seed)
        graph, config, extra = gen.graph, gen.config, {"connected": gen.connected}
    elif args.family == "torus":
        gen = torus(args.d, args.side)
        graph, config, extra = gen.graph, gen.config, {"connected": True}
    else:
        inst = matched_communities(args.m, args.omega, args.beta, args.gamma, args.seed, matching=args.matching)
        graph, config, extra = inst.graph, inst.config, {"attempts": inst.attempts}
    side = write_generated(graph, config, args.out)
    return {"graph": str(args.out), "sidecar": str(side), "n": graph.n, **extra}


def cmd_replay(args):
    manifest = json.loads(Path(args.manifest_file).read_text(encoding="utf-8"))
    return main(manifest["argv"])


# --- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="averkit", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def x0_args(sp):
        sp.add_argument("--x0", help="node=value pairs, e.g. '0=0,3=1'")
        sp.add_argument("--x0-fill", type=float, default=0.0, help="value for nodes not listed in --x0")
        sp.add_argument("--x0-file", help="whitespace-separated initial values, one per node")

    def common(sp):
        sp.add_argument("--alpha", type=float, default=0.5)
        sp.add_argument("--samples", type=int, default=10_000)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--manifest", help="write a run manifest JSON here")
        sp.add_argument("--format", choices=["json", "csv"], default="json")

    a = sub.add_parser("analyze", help="condensation, sink averages and influence matrix")
    a.add_argument("graph")
    x0_args(a)
    common(a)
    a.add_argument("--method", choices=sorted(METHOD_NAMES), default="block")
    a.add_argument("--cross-check", action="store_true", help="run all three H methods and report disagreement")
    a.set_defaults(func=cmd_analyze)

    e = sub.add_parser("electrical", help="effective resistance, voltages and unit current")
    e.add_argument("graph")
    e.add_argument("--sources", required=True, help="comma-separated node ids")
    e.add_argument("--targets", required=True, help="comma-separated node ids")
    e.add_argument("--theorem3", action="store_true", help="rebuild the equilibrium from resistances")
    x0_args(e)
    common(e)
    e.set_defaults(func=cmd_electrical)

    s = sub.add_parser("sweep", help="polarization / homogeneity sweep over matched-ER instances")
    s.add_argument("--family", default="matched_er")
    s.add_argument("--gamma", default="0.01,1,100")
    s.add_argument("--beta", default="1")
    s.add_argument("--m", default="64")
    s.add_argument("--omega", type=float, default=2.0)
    s.add_argument("--seeds", type=int, default=5, help="number of seeds, starting at --seed")
    s.add_argument("--epsilon", type=float, default=0.1)
    s.add_argument("--matching", choices=["identity", "random"], default="identity")
    s.add_argument("--out", help="write CSV here instead of stdout")
    common(s)
    s.set_defaults(func=cmd_sweep, format="csv")

    gsp = sub.add_parser("generate", help="write a generated graph and its config sidecar")
    gsp.add_argument("family", choices=["er", "torus", "matched_er"])
    gsp.add_argument("--out", required=True)
    gsp.add_argument("--seed", type=int, default=0)
    gsp.add_argument("--n", type=int, default=100)
    gsp.add_argument("--c", type=float, default=2.0)
    gsp.add_argument("--d", type=int, default=2)
    gsp.add_argument("--side", type=int, default=8)
    gsp.add_argument("--m", type=int, default=64)
    gsp.add_argument("--omega", type=float, default=2.0)
    gsp.add_argument("--beta", type=float, default=1.0)
    gsp.add_argument("--gamma", type=float, default=0.01)
    gsp.add_argument("--matching", choices=["identity", "random"], default="identity")
    gsp.add_argument("--manifest")
    gsp.set_defaults(func=cmd_generate)

    t = sub.add_parser("simulate", help="trajectory CSV of the averaging update")
    t.add_argument("graph")
    t.add_argument("--steps", type=int, default=100)
    t.add_argument("--tol", type=float, default=0.0, help="stop once a step changes no entry by this much")
    t.add_argument("--alpha", type=float, default=0.5)
    t.add_argument("--manifest")
    x0_args(t)
    t.set_defaults(func=cmd_simulate)

    r = sub.add_parser("replay", help="re-run the command recorded in a manifest")
    r.add_argument("manifest_file")
    r.set_defaults(func=cmd_replay)
    return p


def _fail(code: int, exc: Exception, pair=None) -> int:
    err = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    if pair is not None:
        err["pair"] = list(pair)
    sys.stderr.write(json.dumps(err) + "\n")
    return code


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "replay":
        return cmd_replay(args)
    started = time.perf_counter()
    try:
        result = args.func(args)
    except GateFailure as exc:
        return _fail(EXIT_GATE, exc, exc.pair)
    except NotUndirected as exc:
        return _fail(EXIT_GATE, exc, exc.pair)
    except PreconditionError as exc:
        return _fail(EXIT_GATE, exc)
    except (NumericalError, np.linalg.LinAlgError) as exc:
        return _fail(EXIT_NUMERIC, exc)
    except ValueError as exc:
        # GraphInputError and rejected parameter values
        return _fail(EXIT_PARSE, exc)

    if args.command == "sweep":
        text = format_csv(result) if args.format == "csv" else json.dumps(result) + "\n"
        if args.out:
            Path(args.out).write_text(text, encoding="utf-8")
            manifest = args.manifest or args.out + ".manifest.json"
        else:
            sys.stdout.write(text)
            manifest = args.manifest
        seeds = [args.seed + k for k in range(args.seeds)]
    else:
        if isinstance(result, str):
            sys.stdout.write(result)
        elif args.command == "analyze" and args.format == "csv":
            sys.stdout.write(analyze_csv(result))
        else:
            sys.stdout.write(json.dumps(result) + "\n")
        manifest = args.manifest
        seeds = [args.seed] if hasattr(args, "seed") else []
    write_manifest(manifest, argv, args, seeds, started)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
