"""Command-line entry point: ``boundtree <command> [options]``.

Exit codes: 0 success, 1 a hypothesis or precondition of the requested
computation fails, 2 an I/O or configuration error.  JSON is the canonical
report format; csv and text are flat projections of it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import time
from pathlib import Path
from typing import Any, Callable

from . import __version__
from .constructions import (
    HypothesisError,
    bipartite_counterexample,
    constants,
    no_bounded_tree_certificate,
    theorem_bound,
    tight_regular_construction,
)
from .counting import count_bounded, count_spanning_trees, log_count
from .graph import (
    Graph,
    GraphError,
    complete_bipartite,
    complete_graph,
    cycle_graph,
    format_edge_list,
    path_graph,
    random_regular,
    read_edge_list,
    star_graph,
)
from .montecarlo import component_expectation_check, default_workers, estimate_P, exact_P
from .nibble import DEFAULT_EPS, default_stages, run_nibble
from .orientation import StagePlan, default_ell, default_s
from .repair import PreconditionError, generate_many

SCHEMA = "boundtree.report/1"


class ConfigError(Exception):
    """Bad flags, unreadable input or an impossible configuration (exit 2)."""


class Rejection(Exception):
    """A mathematical precondition of the command fails (exit 1)."""


# -- graph sources --------------------------------------------------------------


def _kv(spec: str) -> dict[str, int]:
    out = {}
    for part in filter(None, spec.split(",")):
        key, _, val = part.partition("=")
        try:
            out[key.strip()] = int(val)
        except ValueError:
            raise ConfigError(f"generator parameter {part!r} is not key=integer") from None
    return out


_GENERATORS: dict[str, Callable[..., Graph]] = {
    "regular": lambda n, r, seed=0: random_regular(n, r, seed),
    "complete": lambda n: complete_graph(n),
    "cycle": lambda n: cycle_graph(n),
    "path": lambda n: path_graph(n),
    "star": lambda leaves: star_graph(leaves),
    "bipartite": lambda a, b: complete_bipartite(a, b),
    "tight": lambda k, t: tight_regular_construction(k, t).graph,
    "counterexample": lambda n, k: bipartite_counterexample(n, k),
}


def generate_graph(spec: str) -> Graph:
    """Build a graph from ``name:key=value,...`` (e.g. ``regular:n=60,r=12,seed=1``)."""
    name, _, rest = spec.partition(":")
    if name not in _GENERATORS:
        raise ConfigError(f"unknown generator {name!r}; choose from {', '.join(sorted(_GENERATORS))}")
    try:
        return _GENERATORS[name](**_kv(rest))
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {name!r}: {exc}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_graph(args: argparse.Namespace) -> Graph:
    if bool(args.graph) == bool(args.gen):
        raise ConfigError("give exactly one of --graph PATH or --gen SPEC")
    if args.gen:
        return generate_graph(args.gen)
    path = Path(args.graph)
    if not path.is_file():
        raise ConfigError(f"file not found: {path}")
    try:
        return read_edge_list(path)
    except (OSError, GraphError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None


def _plan(args: argparse.Namespace) -> StagePlan | None:
    try:
        if args.probs:
            plan = StagePlan.parse(args.probs)
            if args.K is not None and args.K != plan.K:
                raise ConfigError(f"--K {args.K} disagrees with {plan.K} probabilities")
            return plan
        if args.K is not None:
            if args.K < 1:
                raise ConfigError("--K must be at least 1")
            return StagePlan.uniform(args.K)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return None


def _need_k(args: argparse.Namespace) -> int:
    if args.k is None:
        raise ConfigError("--k is required")
    return args.k


def _positive(name: str, value: int) -> int:
    if value < 1:
        raise ConfigError(f"{name} must be positive, got {value}")
    return value


def _workers(args: argparse.Namespace) -> int:
    return args.threads if args.threads else default_workers()


# -- commands -------------------------------------------------------------------


def cmd_count(args: argparse.Namespace) -> dict[str, Any]:
    g = load_graph(args)
    c = count_spanning_trees(g)
    out: dict[str, Any] = {"graph": g.summary(), "c": str(c), "log_c": log_count(c)}
    if args.k is not None:
        if args.k < 1:
            raise ConfigError("--k must be at least 1")
        ck = count_bounded(g, args.k)
        out.update(
            c_k=str(ck),
            log_c_k=log_count(ck),
            normalized_c_k=math.exp(log_count(ck) / g.n) if ck else 0.0,
            ratio=ck / c if c else None,
        )
    return out


def cmd_estimate(args: argparse.Namespace) -> dict[str, Any]:
    g = load_graph(args)
    k = _need_k(args)
    trials = _positive("--trials", args.trials)
    if args.components:
        try:
            rep = component_expectation_check(g, k, trials, args.seed, _workers(args), args.exact_cap)
        except ValueError as exc:
            raise Rejection(str(exc)) from None
        return rep.to_dict()
    if min(g.degrees, default=0) < 1:
        raise Rejection("orientations need a graph without isolated vertices")
    rep = estimate_P(g, k, args.s, args.ell, trials, args.seed, _plan(args), _workers(args), args.exact_cap)
    out = rep.to_dict()
    if args.exact:
        try:
            out["exact"] = exact_P(g, k, rep.s, rep.ell, cap=args.exact_limit)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
    return out


def cmd_generate(args: argparse.Namespace) -> dict[str, Any]:
    g = load_graph(args)
    k = _need_k(args)
    runs = _positive("--trials", args.trials)
    summary, trees = generate_many(
        g, k, runs, args.seed, _plan(args), args.mode, args.s, args.ell, _workers(args)
    )
    out: dict[str, Any] = {
        "graph": g.summary(),
        "k": k,
        "s": default_s(g.n, k) if args.s is None else args.s,
        "ell": default_ell(g.n) if args.ell is None else args.ell,
        "hypotheses_hold": g.min_degree * (k + 1) >= g.n,
        **summary.to_dict(),
    }
    if args.certify:
        out["certificate_vertex"] = no_bounded_tree_certificate(g, k)
    if args.trees_out:
        folder = Path(args.trees_out)
        folder.mkdir(parents=True, exist_ok=True)
        for h, tree in zip(summary.hashes, trees):
            rows = [f"{g.n} {len(tree)}"] + [f"{u} {v}" for u, v in tree]
            (folder / f"tree_{h[:16]}.edges").write_text("\n".join(rows) + "\n")
    return out


def cmd_nibble(args: argparse.Namespace) -> dict[str, Any]:
    g = load_graph(args)
    k = _need_k(args)
    runs = _positive("--trials", args.trials)
    if g.regular_degree is None:
        raise Rejection("the staged construction needs a regular graph")
    if k < 3:
        raise Rejection("k >= 3 required")
    K = default_stages(k) if args.K is None else args.K
    if K < 2:
        raise ConfigError("--K must be at least 2")
    reports = [run_nibble(g, k, K, args.seed + j, args.eps).to_dict() for j in range(runs)]
    return {
        "graph": g.summary(),
        "k": k,
        "K": K,
        "runs": runs,
        "successful_runs": sum(r["all_successful"] for r in reports),
        "accepted_runs": sum(r["accepted"] for r in reports),
        "trees": sum(r["tree_status"] == "tree" for r in reports),
        "reports": reports,
    }


def cmd_construct(args: argparse.Namespace) -> dict[str, Any]:
    k = _need_k(args)
    try:
        if args.variant == "bipartite":
            if args.n is None:
                raise ConfigError("--n is required for the bipartite counterexample")
            g = bipartite_counterexample(args.n, k)
            info: dict[str, Any] = {"variant": "bipartite", "parts": [(args.n - 2) // k, args.n - (args.n - 2) // k]}
        else:
            if args.t is None:
                raise ConfigError("--t is required for the tight construction")
            tc = tight_regular_construction(k, args.t, args.shape)
            g = tc.graph
            info = {"variant": tc.variant, "t": tc.t, "r": tc.r, "witness": tc.witness}
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    info.update(graph=g.summary(), certificate_vertex=no_bounded_tree_certificate(g, k))
    text = format_edge_list(g)
    if args.out:
        Path(args.out).write_text(text)
        info["written"] = str(args.out)
    else:
        info["edge_list"] = text
    return info


def _k_range(text: str) -> list[int]:
    try:
        if ".." in text:
            a, b = text.split("..")
            return list(range(int(a), int(b) + 1))
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse k range {text!r}") from None


def cmd_constants(args: argparse.Namespace) -> dict[str, Any]:
    ks = _k_range(args.k or "3..11")
    if not ks or min(ks) < 3:
        raise ConfigError("constants are defined for k >= 3")
    out: dict[str, Any] = {"rows": [constants(k).to_dict() for k in ks]}
    if args.n is not None and args.r is not None:
        try:
            out["bounds"] = [theorem_bound(args.n, args.r, k).to_dict() for k in ks]
        except HypothesisError as exc:
            raise Rejection(str(exc)) from None
    return out


COMMANDS = {
    "count": cmd_count,
    "estimate": cmd_estimate,
    "generate": cmd_generate,
    "nibble": cmd_nibble,
    "construct": cmd_construct,
    "constants": cmd_constants,
}


# -- output ---------------------------------------------------------------------


def _flatten(obj: Any, prefix: str = "") -> list[tuple[str, Any]]:
    if isinstance(obj, dict):
        rows = []
        for key, val in obj.items():
            rows += _flatten(val, f"{prefix}.{key}" if prefix else str(key))
        return rows
    if isinstance(obj, list) and obj and isinstance(obj[0], (dict, list)):
        rows = []
        for i, val in enumerate(obj):
            rows += _flatten(val, f"{prefix}[{i}]")
        return rows
    return [(prefix, obj)]


def render(report: dict[str, Any], fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    result = report.get("result", {})
    buf = io.StringIO()
    if fmt == "csv":
        writer = csv.writer(buf, lineterminator="\n")
        rows = result.get("rows") if isinstance(result, dict) else None
        if rows and report.get("command") == "constants":
            writer.writerow(list(rows[0]))
            writer.writerows([list(r.values()) for r in rows])
        else:
            writer.writerow(["key", "value"])
            writer.writerows(_flatten(result))
        return buf.getvalue()
    for key, val in _flatten(result):
        buf.write(f"{key}: {val}\n")
    return buf.getvalue()


def _config(args: argparse.Namespace) -> dict[str, Any]:
    # worker count never changes results, so it stays out of the report
    skip = {"func", "timing", "format", "out", "threads"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="boundtree", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser, graph: bool = True) -> None:
        if graph:
            sp.add_argument("--graph", help="edge-list file ('n m' header, then 'u v' lines)")
            sp.add_argument("--gen", help="generator spec, e.g. regular:n=60,r=12,seed=1")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--format", choices=["json", "csv", "text"], default="json")
        sp.add_argument("--out", help="write the report (or edge list) here instead of stdout")
        sp.add_argument("--timing", action="store_true", help="include wall time in the report")

    def sampling(sp: argparse.ArgumentParser, trials: int) -> None:
        sp.add_argument("--k", type=int)
        sp.add_argument("--s", type=int, help="default floor(n/(7k))")
        sp.add_argument("--ell", type=int, help="default ceil(ln n)")
        sp.add_argument("--K", type=int, help="number of stages (uniform probabilities)")
        sp.add_argument("--probs", help="stage probabilities p1,...,pK")
        sp.add_argument("--trials", type=int, default=trials)
        sp.add_argument("--threads", type=int, default=0, help="worker processes (default: all cores)")

    sp = sub.add_parser("count", help="exact c(G) and c_k(G)")
    common(sp)
    sp.add_argument("--k", type=int)

    sp = sub.add_parser("estimate", help="Monte-Carlo / exhaustive orientation-class probability")
    common(sp)
    sampling(sp, 10_000)
    sp.add_argument("--exact", action="store_true", help="also enumerate all d(G) orientations")
    sp.add_argument("--exact-limit", type=int, default=10**6)
    sp.add_argument("--exact-cap", type=int, default=0, help="attach the exhaustive value when d(G) <= cap")
    sp.add_argument("--components", action="store_true", help="mean component count against (k+1) ln n")

    sp = sub.add_parser("generate", help="orientation -> forest -> spanning tree pipeline over many trials")
    common(sp)
    sampling(sp, 100)
    sp.add_argument("--mode", choices=["cycles", "general", "regular"], default="cycles")
    sp.add_argument("--trees-out", help="directory for the distinct trees")
    sp.add_argument("--certify", action="store_true", help="search for a cut-vertex certificate of c_k = 0")

    sp = sub.add_parser("nibble", help="staged construction for regular graphs")
    common(sp)
    sp.add_argument("--k", type=int)
    sp.add_argument("--K", type=int)
    sp.add_argument("--eps", type=float, default=DEFAULT_EPS)
    sp.add_argument("--trials", type=int, default=1, help="independent runs with seeds seed, seed+1, ...")

    sp = sub.add_parser("construct", help="graphs with no spanning tree of max degree k")
    common(sp, graph=False)
    sp.add_argument("--variant", choices=["tight", "bipartite"], default="tight")
    sp.add_argument("--shape", choices=["auto", "odd-general", "even-k"], default="auto")
    sp.add_argument("--k", type=int)
    sp.add_argument("--t", type=int)
    sp.add_argument("--n", type=int)

    sp = sub.add_parser("constants", help="f_k, g_k, z_k, z*_k for a range of k")
    common(sp, graph=False)
    sp.add_argument("--k", help="e.g. 5..11 or 3,4,5")
    sp.add_argument("--n", type=int, help="with --r, evaluate r * z_k")
    sp.add_argument("--r", type=int)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    start = time.perf_counter()
    code = 0
    try:
        result = COMMANDS[args.command](args)
    except ConfigError as exc:
        code, result = 2, {"error": str(exc)}
    except (Rejection, PreconditionError, HypothesisError, GraphError) as exc:
        code, result = 1, {"error": str(exc)}
    elapsed = time.perf_counter() - start
    report: dict[str, Any] = {
        "schema": SCHEMA,
        "tool": "boundtree",
        "version": __version__,
        "command": args.command,
        "config": _config(args),
        "exit_code": code,
        "result": result,
    }
    if args.timing:
        report["wall_time_s"] = elapsed
    text = render(report, args.format)
    if args.out and args.command != "construct" and code == 0:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    print(f"boundtree {args.command}: exit {code}, {elapsed:.3f}s", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
