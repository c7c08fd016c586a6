"""Command-line interface.

Exit codes: 0 = ran to completion, 1 = usage error, 2 = an assertion-grade
property was violated (a generated artifact failed its own audit).
Results go to stdout or --out, as JSON or CSV per --format.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

import numpy as np

from . import assign, expansion, walks
from .digraph import (GraphFormatError, complete_digraph, directed_cycle,
                      extremal_construction, longest_antidirected_path,
                      min_semidegree, parse_digraph, random_oriented_digraph,
                      random_tournament, regular_tournament, serialize_digraph)
from .embed import brute_force_embed, verify_embedding
from .expansion import (ExpansionParams, eps_regular_exact,
                        has_cherry_property, is_robust_in_expander_exact,
                        is_robust_out_expander_exact)
from .pipeline import (PipelineConfig, TheoremConfig, pipeline_run,
                       theorem_desk_check)
from .trees import (TreeFormatError, antidirected_path, balanced_binary_tree,
                    directed_path, parse_tree, random_tree, serialize_tree,
                    split_tree, star)
from .walks import mixing_report, random_pattern

USAGE_ERROR = 1
PROPERTY_VIOLATION = 2


class CliParser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        sys.exit(USAGE_ERROR)


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_json(obj, out):
    _emit(json.dumps(obj, indent=2, default=str) + "\n", out)


def _emit_csv(rows: list[dict], out):
    if not rows:
        _emit("", out)
        return
    cols = list(rows[0].keys())
    lines = [",".join(cols)]
    for row in rows:
        lines.append(",".join(str(row.get(c, "")) for c in cols))
    _emit("\n".join(lines) + "\n", out)


def _read(path: str) -> str:
    with open(path) as fh:
        return fh.read()


def _load_graph(path: str):
    try:
        return parse_digraph(_read(path))
    except (OSError, GraphFormatError) as exc:
        sys.stderr.write(f"error: cannot load graph: {exc}\n")
        sys.exit(USAGE_ERROR)


def _load_tree(path: str):
    try:
        return parse_tree(_read(path))
    except (OSError, TreeFormatError) as exc:
        sys.stderr.write(f"error: cannot load tree: {exc}\n")
        sys.exit(USAGE_ERROR)


# -- subcommands ---------------------------------------------------------------

def cmd_gen(args) -> int:
    if args.what == "graph":
        makers = {
            "complete": lambda: complete_digraph(args.n),
            "cycle": lambda: directed_cycle(args.n),
            "tournament": lambda: regular_tournament(args.n),
            "random-tournament": lambda: random_tournament(args.n, args.seed),
            "random-oriented": lambda: random_oriented_digraph(args.n, args.p,
                                                               args.seed),
            "extremal": lambda: extremal_construction(args.k),
        }
        if args.kind not in makers:
            sys.stderr.write(f"error: unknown graph kind {args.kind!r}\n")
            return USAGE_ERROR
        _emit(serialize_digraph(makers[args.kind]()), args.out)
        return 0
    makers = {
        "random": lambda: random_tree(args.n, args.delta, args.seed),
        "directed-path": lambda: directed_path(args.n),
        "antidirected-path": lambda: antidirected_path(args.n),
        "out-star": lambda: star(args.n, "+"),
        "in-star": lambda: star(args.n, "-"),
        "binary": lambda: balanced_binary_tree(args.depth, args.seed),
    }
    if args.kind not in makers:
        sys.stderr.write(f"error: unknown tree kind {args.kind!r}\n")
        return USAGE_ERROR
    _emit(serialize_tree(makers[args.kind]()), args.out)
    return 0


def cmd_check(args) -> int:
    g = _load_graph(args.graph)
    if args.property == "semidegree":
        result = {"n": g.n, "m": g.m, "oriented": g.is_oriented,
                  "min_semidegree": min_semidegree(g)}
    elif args.property == "expander":
        params = ExpansionParams(args.nu, args.tau if args.tau else args.nu)
        if g.n <= expansion.EXACT_EXPANDER_MAX_N:
            out_v = is_robust_out_expander_exact(g, params)
            in_v = is_robust_in_expander_exact(g, params)
            result = {"certified": True,
                      "out_expander": out_v.is_expander,
                      "in_expander": in_v.is_expander,
                      "worst_out_margin": out_v.worst_margin,
                      "worst_in_margin": in_v.worst_margin,
                      "witness": sorted(out_v.witness or ())}
        else:
            v = expansion.expander_margin_sampled(g, params, args.trials,
                                                  args.seed)
            result = {"certified": False, "sampled_margin": v.worst_margin,
                      "violated": not v.is_expander}
    elif args.property == "cherry":
        rep = has_cherry_property(g)
        result = {"has_plus": rep.has_plus, "has_minus": rep.has_minus,
                  "alpha_star": str(rep.alpha_star),
                  "alpha_exact": rep.alpha_exact,
                  "witness": sorted(rep.witness) if rep.witness else None}
    elif args.property == "regularity":
        xs = [int(x) for x in args.x.split(",")]
        ys = [int(x) for x in args.y.split(",")]
        rep = expansion.densities(g, xs, ys)
        result = {"d_plus": str(rep.d_plus), "d_minus": str(rep.d_minus),
                  "regular": eps_regular_exact(g, xs, ys, args.eps,
                                               args.direction)}
    else:
        sys.stderr.write(f"error: unknown property {args.property!r}\n")
        return USAGE_ERROR
    _emit_json(result, args.out)
    return 0


def cmd_walk(args) -> int:
    g = _load_graph(args.graph)
    pattern = args.pattern or random_pattern(args.length, args.seed)
    report = mixing_report(g, pattern, args.start)
    rows = [{"step": r.step, "deviation": r.deviation, "m_value": r.m_value,
             "bound": r.bound, "ratio": "" if r.ratio is None else r.ratio}
            for r in report.rows]
    if args.format == "csv":
        _emit_csv(rows, args.out)
    else:
        _emit_json({"k": report.k, "regular": report.regular,
                    "cherry": report.cherry, "asserted": report.asserted,
                    "deviation_ok": report.deviation_ok,
                    "contraction_ok": report.contraction_ok,
                    "rows": rows, "warnings": report.warnings}, args.out)
    if report.asserted and not (report.deviation_ok and report.contraction_ok):
        return PROPERTY_VIOLATION
    return 0


def cmd_split(args) -> int:
    t = _load_tree(args.tree)
    res = split_tree(t, args.k, args.delta)
    result = {
        "edge": list(res.edge), "case": res.case, "t_bound": res.t_bound,
        "side_a": len(res.side_a), "side_b": len(res.side_b),
        "leaves": [len(res.census_a.leaves), len(res.census_b.leaves)],
        "directed_paths": [len(res.census_a.directed), len(res.census_b.directed)],
    }
    _emit_json(result, args.out)
    return 0


def cmd_assign(args) -> int:
    config = PipelineConfig(kind=args.kind, n=args.n, k=args.k, u0=args.u0,
                            seed=args.seed, gamma=args.gamma,
                            delta=args.delta, ell=args.ell,
                            declaration_mode=args.declarations)
    result = pipeline_run(config, stop_after="balance")
    _emit_json(result.to_json(), args.out)
    if result.error:
        return 0 if "SupplyError" in result.error else PROPERTY_VIOLATION
    balance = result.stages.get("balance", {})
    if not balance.get("valid") or not balance.get("perfectly_balanced"):
        return PROPERTY_VIOLATION
    return 0


def cmd_embed(args) -> int:
    if args.method == "brute":
        t = _load_tree(args.tree)
        g = _load_graph(args.graph)
        res = brute_force_embed(t, g, args.budget)
        result = {"status": res.status, "nodes": res.nodes,
                  "mapping": res.mapping}
        _emit_json(result, args.out)
        if res.status == "found" and not verify_embedding(t, g, res.mapping):
            return PROPERTY_VIOLATION
        return 0
    config = PipelineConfig(kind=args.kind, n=args.n, k=args.k, u0=args.u0,
                            seed=args.seed, gamma=args.gamma, delta=args.delta,
                            ell=args.ell, density=args.density,
                            embed_stage=True)
    result = pipeline_run(config, stop_after="embed")
    _emit_json(result.to_json(), args.out)
    return 0 if result.ok or "SupplyError" in (result.error or "") \
        else PROPERTY_VIOLATION


def cmd_theorem(args) -> int:
    config = TheoremConfig(sizes=tuple(int(s) for s in args.sizes.split(",")),
                           gamma=args.gamma, delta=args.delta,
                           trees_per_host=args.trees, seed=args.seed,
                           budget=args.budget)
    report = theorem_desk_check(config)
    rows = [asdict(r) for r in report.rows]
    rows.append({"host": report.extremal_row["host"],
                 "n": report.extremal_row["n"], "threshold": "",
                 "trials": 1,
                 "embedded": int(report.extremal_row["status"] == "found"),
                 "none": int(report.extremal_row["status"] == "none"),
                 "budget_hits": int(report.extremal_row["status"] == "budget")})
    if args.format == "csv":
        _emit_csv(rows, args.out)
    else:
        _emit_json({"rows": rows, "empty_hosts": report.empty_hosts}, args.out)
    if not report.all_embedded() or report.extremal_row["status"] != "none":
        return PROPERTY_VIOLATION
    return 0


def cmd_extremal(args) -> int:
    g = extremal_construction(args.k)
    expected = 3 * args.k + 1
    semi = min_semidegree(g)
    result = {"k": args.k, "n": g.n, "oriented": g.is_oriented,
              "min_semidegree": semi, "expected_semidegree": expected}
    ok = semi == expected and g.is_oriented
    if g.n <= 24:
        longest = longest_antidirected_path(g)
        result["longest_antidirected_path"] = longest
        result["three_quarters_bound"] = 3 * g.n // 4
        ok = ok and longest <= 3 * g.n // 4
    _emit_json(result, args.out)
    return 0 if ok else PROPERTY_VIOLATION


# -- parser ---------------------------------------------------------------------

def build_parser() -> CliParser:
    p = CliParser(prog="spanembed",
                  description="desk-scale oriented spanning-tree toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=None)
        sp.add_argument("--format", choices=("json", "csv"), default="json")

    g = sub.add_parser("gen", help="generate graphs and trees to files")
    g.add_argument("what", choices=("graph", "tree"))
    g.add_argument("--kind", required=True)
    g.add_argument("--n", type=int, default=12)
    g.add_argument("--k", type=int, default=1)
    g.add_argument("--p", type=float, default=0.5)
    g.add_argument("--delta", type=int, default=3)
    g.add_argument("--depth", type=int, default=4)
    common(g)
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("check", help="semidegree | expander | cherry | regularity")
    c.add_argument("property",
                   choices=("semidegree", "expander", "cherry", "regularity"))
    c.add_argument("--graph", required=True)
    c.add_argument("--nu", type=float, default=0.1)
    c.add_argument("--tau", type=float, default=None)
    c.add_argument("--trials", type=int, default=400)
    c.add_argument("--eps", type=float, default=0.1)
    c.add_argument("--x", default="")
    c.add_argument("--y", default="")
    c.add_argument("--direction", choices=("+", "-"), default="+")
    common(c)
    c.set_defaults(func=cmd_check)

    w = sub.add_parser("walk", help="mixing report for a pattern walk")
    w.add_argument("--graph", required=True)
    w.add_argument("--pattern", default=None)
    w.add_argument("--length", type=int, default=50)
    w.add_argument("--start", type=int, default=0)
    common(w)
    w.set_defaults(func=cmd_walk)

    s = sub.add_parser("split", help="tree splitting report")
    s.add_argument("--tree", required=True)
    s.add_argument("-k", "--k", type=int, default=4)
    s.add_argument("--delta", type=int, default=None)
    common(s)
    s.set_defaults(func=cmd_split)

    def pipeline_flags(sp):
        sp.add_argument("--kind", choices=("leafy", "bare", "switchy"),
                        default="leafy")
        sp.add_argument("--n", type=int, default=2000)
        sp.add_argument("--k", type=int, default=8)
        sp.add_argument("--u0", type=int, default=3)
        sp.add_argument("--gamma", type=float, default=0.9)
        sp.add_argument("--delta", type=int, default=3)
        sp.add_argument("--ell", type=int, default=None)
        sp.add_argument("--declarations", choices=("supplied", "uniform"),
                        default="supplied")

    a = sub.add_parser("assign", help="pipeline through balancing, as JSON")
    pipeline_flags(a)
    common(a)
    a.set_defaults(func=cmd_assign)

    e = sub.add_parser("embed", help="brute-force or greedy embedding")
    e.add_argument("--method", choices=("brute", "greedy"), default="brute")
    e.add_argument("--tree", default=None)
    e.add_argument("--graph", default=None)
    e.add_argument("--budget", type=int, default=5_000_000)
    e.add_argument("--density", type=float, default=0.5)
    pipeline_flags(e)
    common(e)
    e.set_defaults(func=cmd_embed)

    th = sub.add_parser("theorem", help="desk check of the embedding statement")
    th.add_argument("--sizes", default="9,11,13")
    th.add_argument("--gamma", type=float, default=0.05)
    th.add_argument("--delta", type=int, default=3)
    th.add_argument("--trees", type=int, default=200)
    th.add_argument("--budget", type=int, default=5_000_000)
    common(th)
    th.set_defaults(func=cmd_theorem)

    x = sub.add_parser("extremal", help="sharpness construction and audit")
    x.add_argument("-k", "--k", type=int, default=1)
    common(x)
    x.set_defaults(func=cmd_extremal)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "embed" and args.method == "brute" and \
            (not args.tree or not args.graph):
        parser.error("embed --method brute needs --tree and --graph")
    try:
        return args.func(args)
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    sys.exit(main())
