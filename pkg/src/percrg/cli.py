"""Command-line front end.

Thin adapters around the library: every subcommand parses flags, calls one
or two library functions, and serializes the result.  No numerical logic
lives here.  Long-form flags only; all floats are printed with 12
significant digits; every run that writes at least one real file also
writes a manifest (parameters, seed, tool version, sha256 of each output)
next to its first output.

Exit codes: 0 success, 1 usage or input error, 2 analysis error (degenerate
map, unreachable target, grid too narrow, unroutable template).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from percrg import __version__


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on usage errors; the contract wants 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _round12(obj):
    """Round every float in a JSON-style structure to 12 significant digits."""
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, float):
        return float(_fmt(obj))
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    return obj


def _json_text(obj) -> str:
    return json.dumps(_round12(obj), sort_keys=True, separators=(",", ":")) + "\n"


def _csv_text(header: str, rows) -> str:
    lines = [header]
    for row in rows:
        lines.append(",".join(_fmt(c) if isinstance(c, float) else str(c) for c in row))
    return "\n".join(lines) + "\n"


def _float_list(text: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in text.split(",") if part != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {text!r}")


def _emit(args: argparse.Namespace, outputs: list[tuple[str, str]]) -> None:
    """Write (path, text) outputs; '-' is stdout.  File outputs get a manifest."""
    records = []
    for path, text in outputs:
        data = text.encode()
        if path == "-":
            sys.stdout.write(text)
        else:
            Path(path).write_bytes(data)
            records.append({"path": path, "sha256": hashlib.sha256(data).hexdigest()})
    if not records:
        return
    skip = {"func", "group", "command"}
    params = {}
    for key, value in vars(args).items():
        if key in skip:
            continue
        params[key] = list(value) if isinstance(value, tuple) else value
    manifest = {
        "tool": "percrg",
        "version": __version__,
        "subcommand": f"{args.group} {args.command}",
        "parameters": params,
        "seed": getattr(args, "seed", None),
        "outputs": records,
    }
    Path(records[0]["path"] + ".manifest.json").write_text(
        json.dumps(_round12(manifest), sort_keys=True, separators=(",", ":")) + "\n")


def _read_text(path: str) -> str:
    return Path(path).read_text()


# ── graph ───────────────────────────────────────────────────────────────────


def _cmd_graph_build(args) -> None:
    from percrg.circuit import parse_circuit
    from percrg.graph import build_interaction_graph, dump_graph

    circuit = parse_circuit(_read_text(args.circuit), max_arity=args.max_arity)
    _emit(args, [(args.out, dump_graph(build_interaction_graph(circuit)))])


def _cmd_graph_stats(args) -> None:
    from percrg.graph import graph_stats, load_graph

    stats = graph_stats(load_graph(_read_text(args.graph)), root=args.root, n_max=args.nmax)
    report = {
        "n_vertices": stats.n_vertices,
        "n_edges": stats.n_edges,
        "max_degree": stats.max_degree,
        "n_components": stats.n_components,
        "root": stats.root,
        "ball_sizes": list(stats.ball_sizes),
    }
    _emit(args, [(args.out, _json_text(report))])


# ── perc ────────────────────────────────────────────────────────────────────

_OBS_HEADER = "eta,trials,mean_cluster_size,se_mcs,largest_fraction,se_lf,crossing_prob,se_cp"


def _cmd_perc_run(args) -> None:
    from percrg.graph import load_graph
    from percrg.percolation import percolation_observables

    graph = load_graph(_read_text(args.graph))
    rows = []
    for eta in args.etas:
        obs = percolation_observables(graph, eta, args.trials, args.seed, threads=args.threads)
        rows.append((obs.eta, obs.trials, obs.mean_cluster_size, obs.se_mcs,
                     obs.largest_fraction, obs.se_lf, obs.crossing_prob, obs.se_cp))
    _emit(args, [(args.out, _csv_text(_OBS_HEADER, rows))])


def _cmd_perc_eta_star(args) -> None:
    from percrg.circuit import generate_lattice_circuit, generate_random_circuit
    from percrg.percolation import estimate_eta_star

    if args.family == "lattice":
        def family(size: int):
            return generate_lattice_circuit(size, size, args.seed)
    else:  # chain: one qubit, `size` steps; its interaction graph is a path
        def family(size: int):
            return generate_random_circuit(1, size, 1, args.seed)

    est = estimate_eta_star(family, args.sizes, args.etas, args.trials, args.seed,
                            threads=args.threads)
    rows = [(p.size, p.eta, p.crossing_prob, p.se) for p in est.curve]
    outputs = [(args.out, _csv_text("size,eta,crossing_prob,se", rows))]
    if args.report is not None:
        outputs.append((args.report, _json_text({"eta_star": est.eta_star, "note": est.note})))
    _emit(args, outputs)


# ── rg ──────────────────────────────────────────────────────────────────────

_CURVE_HEADER = "eta,R_exact,R_bound,R_prime,lower_bound_eq1,upper_bound_eq1"


def _cmd_rg_analyze(args) -> None:
    import math

    from percrg.rgmap import RGParams, find_threshold, r_bound, r_derivative, r_exact

    params = RGParams(A=args.A, k=args.k, alpha=args.alpha)
    rows = []
    for i in range(1, args.grid + 1):
        eta = i / (args.grid + 1)
        r = r_exact(eta, params)
        denom = eta * (1.0 - eta)
        rows.append((eta, r, r_bound(eta, params), r_derivative(eta, params),
                     r * (1.0 - r) / denom, math.sqrt(params.alpha / denom)))
    report = find_threshold(params, tol=args.tol)
    _emit(args, [(args.out, _csv_text(_CURVE_HEADER, rows)),
                 (args.report, _json_text(report.to_json_dict()))])


def _cmd_rg_iterate(args) -> None:
    from percrg.rgmap import RGParams, iterate_bound, iterate_map

    params = RGParams(A=args.A, k=args.k)
    exact = iterate_map(args.eta, params, args.levels)
    rows = [(r, exact[r], iterate_bound(args.eta, params, r))
            for r in range(args.levels + 1)]
    _emit(args, [(args.out, _csv_text("level,iterate_exact,iterate_bound", rows))])


def _cmd_rg_levels(args) -> None:
    from percrg.rgmap import RGParams, find_threshold, levels_linearized, levels_needed

    params = RGParams(A=args.A, k=args.k)
    count = levels_needed(args.eta, params, args.epsilon, args.N)
    report = {
        "A": args.A, "k": args.k, "eta": args.eta,
        "epsilon": args.epsilon, "N": args.N, "target": count.target,
        "r_min": count.r_min, "r_bound_estimate": count.r_bound_estimate,
    }
    if args.delta is not None:
        threshold = find_threshold(params)
        report["eta_c"] = threshold.eta_c
        report["lambda"] = threshold.lam
        report["r_linearized"] = levels_linearized(threshold, args.delta, args.epsilon)
    _emit(args, [(args.out, _json_text(report))])


def _cmd_rg_tradeoff(args) -> None:
    from percrg.rgmap import RGParams, find_threshold, tradeoff

    params = RGParams(A=args.A, k=args.k, alpha=args.alpha)
    result = tradeoff(find_threshold(params), args.delta, args.epsilon, args.r)
    report = {
        "A": args.A, "k": args.k, "alpha": result.alpha, "eta_c": result.eta_c,
        "epsilon": result.epsilon, "delta": result.delta, "r": result.r,
        "lhs": result.lhs, "rhs": result.rhs, "holds": result.holds,
    }
    _emit(args, [(args.out, _json_text(report))])


# ── concat ──────────────────────────────────────────────────────────────────


def _load_template(args):
    from percrg.concat import GadgetTemplate, load_template

    if args.template is not None:
        return load_template(_read_text(args.template))
    return GadgetTemplate.path(args.A)


def _cmd_concat_expand(args) -> None:
    from percrg.concat import expand_graph
    from percrg.graph import graph_to_json_dict, load_graph

    base = load_graph(_read_text(args.graph))
    expanded = expand_graph(base, _load_template(args), args.levels)
    payload = graph_to_json_dict(expanded.graph)
    payload["partition"] = list(expanded.partition)
    payload["level"] = expanded.level
    _emit(args, [(args.out, json.dumps(payload, sort_keys=True, separators=(",", ":")) + "\n")])


def _cmd_concat_mc(args) -> None:
    from percrg.concat import empirical_renormalized_density
    from percrg.graph import load_graph

    base = load_graph(_read_text(args.graph))
    mc = empirical_renormalized_density(base, _load_template(args), args.eta, args.k,
                                        args.trials, args.seed, threads=args.threads)
    report = {
        "eta": mc.eta, "k": mc.k, "trials": mc.trials, "n_blocks": mc.n_blocks,
        "density": mc.density, "se": mc.se, "predicted": mc.predicted,
        "abs_error": abs(mc.density - mc.predicted),
        "max_abs_correlation": mc.max_abs_correlation,
    }
    _emit(args, [(args.out, _json_text(report))])


# ── parser assembly ─────────────────────────────────────────────────────────


def _add_mc_flags(p: _Parser) -> None:
    p.add_argument("--trials", type=int, required=True, help="Monte Carlo trials")
    p.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads; never changes the output, only the wall time")


def build_parser() -> _Parser:
    parser = _Parser(prog="percrg", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"percrg {__version__}")
    groups = parser.add_subparsers(dest="group", required=True, parser_class=_Parser)

    graph = groups.add_parser("graph", help="build and inspect interaction graphs")
    graph_sub = graph.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = graph_sub.add_parser("build", help="circuit text -> interaction graph JSON")
    p.add_argument("--circuit", required=True, help="circuit text file")
    p.add_argument("--max-arity", type=int, default=3, dest="max_arity")
    p.add_argument("--out", default="-", help="graph JSON path, or - for stdout")
    p.set_defaults(func=_cmd_graph_build)
    p = graph_sub.add_parser("stats", help="order, size, components, ball sizes")
    p.add_argument("--graph", required=True, help="graph JSON file")
    p.add_argument("--root", type=int, default=0, help="ball center (default 0)")
    p.add_argument("--nmax", type=int, default=10, help="largest ball radius (default 10)")
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_graph_stats)

    perc = groups.add_parser("perc", help="site percolation Monte Carlo")
    perc_sub = perc.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = perc_sub.add_parser("run", help="observables over an eta grid")
    p.add_argument("--graph", required=True)
    p.add_argument("--etas", type=_float_list, required=True,
                   help="comma-separated occupation probabilities")
    _add_mc_flags(p)
    p.add_argument("--out", default="-", help="observables CSV path, or -")
    p.set_defaults(func=_cmd_perc_run)
    p = perc_sub.add_parser("eta-star", help="finite-size percolation onset")
    p.add_argument("--family", choices=("lattice", "chain"), required=True)
    p.add_argument("--sizes", type=_int_list, required=True,
                   help="comma-separated family sizes, largest last")
    p.add_argument("--etas", type=_float_list, required=True)
    _add_mc_flags(p)
    p.add_argument("--out", default="-", help="sweep CSV path, or -")
    p.add_argument("--report", default=None, help="optional eta_star JSON path")
    p.set_defaults(func=_cmd_perc_eta_star)

    rg = groups.add_parser("rg", help="renormalization map analysis")
    rg_sub = rg.add_subparsers(dest="command", required=True, parser_class=_Parser)
    p = rg_sub.add_parser("analyze", help="map curve and fixed-point report")
    p.add_argument("--A", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--grid", type=int, default=99, help="interior grid points (default 99)")
    p.add_argument("--tol", type=float, default=1e-12)
    p.add_argument("--out", default="-", help="curve CSV path, or -")
    p.add_argument("--report", default="-", help="threshold JSON path, or -")
    p.set_defaults(func=_cmd_rg_analyze)
    p = rg_sub.add_parser("iterate", help="exact iterates beside the closed-form bound")
    p.add_argument("--A", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--levels", type=int, required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_rg_iterate)
    p = rg_sub.add_parser("levels", help="coarse-graining depth for a target density")
    p.add_argument("--A", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--N", type=int, required=True, help="circuit size the target divides")
    p.add_argument("--delta", type=float, default=None,
                   help="also report the linearized estimate for this gap")
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_rg_levels)
    p = rg_sub.add_parser("tradeoff", help="accuracy/overhead consistency check")
    p.add_argument("--A", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_rg_tradeoff)

    concat = groups.add_parser("concat", help="gadget expansion and renormalization MC")
    concat_sub = concat.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, helptext in (("expand", "expand a graph through gadget templates"),
                           ("mc", "empirical coarse density vs the map")):
        p = concat_sub.add_parser(name, help=helptext)
        p.add_argument("--graph", required=True)
        tgroup = p.add_mutually_exclusive_group(required=True)
        tgroup.add_argument("--template", default=None, help="template JSON file")
        tgroup.add_argument("--A", type=int, default=None,
                            help="use the default path template of this size")
        if name == "expand":
            p.add_argument("--levels", type=int, required=True)
            p.add_argument("--out", default="-")
            p.set_defaults(func=_cmd_concat_expand)
        else:
            p.add_argument("--k", type=int, required=True)
            p.add_argument("--eta", type=float, required=True)
            _add_mc_flags(p)
            p.add_argument("--out", default="-")
            p.set_defaults(func=_cmd_concat_mc)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except SystemExit:
        raise
    except Exception as exc:  # classify: analysis failures exit 2, bad input 1
        from percrg.percolation import ThresholdGridError
        from percrg.rgmap import DegenerateMapError, SupercriticalError

        analysis: tuple[type, ...] = (DegenerateMapError, SupercriticalError, ThresholdGridError)
        try:
            from percrg.concat import RoutingError
        except ImportError:  # pragma: no cover
            pass
        else:
            analysis = analysis + (RoutingError,)
        if isinstance(exc, analysis):
            sys.stderr.write(f"analysis error: {exc}\n")
            return 2
        if isinstance(exc, (ValueError, OSError, KeyError, json.JSONDecodeError)):
            sys.stderr.write(f"error: {exc}\n")
            return 1
        raise
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
