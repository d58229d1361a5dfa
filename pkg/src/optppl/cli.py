"""Command-line drivers: solve, gen, bench, dot.

Exit codes: 0 ok, 1 usage, 2 input error (parsing, typing, malformed
network), 3 solve error.  Errors are reported as a JSON object on stdout.
All output is plain text; NO_COLOR needs no special handling.
"""

from __future__ import annotations

import argparse
import json
import sys

from .bdd import BddManager
from . import dappl, pineappl
from .gen import GenError, gen_bn, gen_dr, gen_gridworld, gen_ladder, gen_nested_mmap

USAGE_EXIT = 1
INPUT_EXIT = 2
SOLVE_EXIT = 3

_INPUT_ERRORS = (
    dappl.DapplSyntaxError,
    dappl.DapplTypeError,
    dappl.DapplDesugarError,
    pineappl.PineapplSyntaxError,
    pineappl.PineapplExpandError,
    GenError,
    FileNotFoundError,
    json.JSONDecodeError,
)


def _emit(payload):
    json.dump(payload, sys.stdout, indent=2, default=str)
    sys.stdout.write("\n")


def _fail(code, kind, message):
    _emit({"error": {"kind": kind, "message": str(message)}})
    return code


def _load_order(mgr: BddManager, path):
    with open(path) as fh:
        for line in fh:
            label = line.strip()
            if label and not label.startswith("#"):
                mgr.new_var(label)


def _detect_lang(path, override):
    if override:
        return override
    if path.endswith(".dappl"):
        return "dappl"
    if path.endswith(".pineappl"):
        return "pineappl"
    raise ValueError(f"cannot infer the language of {path!r}; pass --lang")


def cmd_solve(args) -> int:
    try:
        lang = _detect_lang(args.file, args.lang)
        with open(args.file) as fh:
            source = fh.read()
    except (ValueError, FileNotFoundError) as exc:
        return _fail(INPUT_EXIT, "input", exc)
    mgr = BddManager()
    if args.order:
        try:
            _load_order(mgr, args.order)
        except OSError as exc:
            return _fail(INPUT_EXIT, "input", exc)
    try:
        if lang == "dappl":
            return _solve_dappl(args, source, mgr)
        return _solve_pineappl(args, source, mgr)
    except _INPUT_ERRORS as exc:
        return _fail(INPUT_EXIT, "input", exc)
    except Exception as exc:
        return _fail(SOLVE_EXIT, "solve", exc)


def _solve_dappl(args, source, mgr) -> int:
    out = dappl.solve_meu(source, prune=not args.no_prune, heuristic=args.heuristic, mgr=mgr)
    internal = out.pop("_internal")
    if not args.stats:
        out.pop("stats", None)
    if args.oracle:
        from .oracle import dappl_meu_enum

        eu, policy = dappl_meu_enum(internal["core"], internal["sites"])
        out["oracle"] = {"meu": eu, "policy": {f"c{s}": n for s, n in policy.items()}}
        out["delta"] = abs(out["meu"] - eu) if eu != float("-inf") else 0.0
    if args.dot:
        compiled = internal["compiled"]
        problem = internal["bbir"]
        text = mgr.to_dot(problem.formulas, names=["phi", "gamma"])
        with open(args.dot, "w") as fh:
            fh.write(text)
        out["dot"] = args.dot
    _emit(out)
    return 0


def _solve_pineappl(args, source, mgr) -> int:
    out = pineappl.run_program(source, mgr=mgr)
    internal = out.pop("_internal")
    if not args.stats:
        out.pop("stats", None)
    if args.oracle:
        from .oracle import pineappl_interp

        vals, decisions = pineappl_interp(internal["program"])
        oracle_queries = []
        deltas = []
        for q, want in zip(out["queries"], vals):
            if isinstance(want, tuple):
                oracle_queries.append({"assignment": want[0], "value": want[1]})
                deltas.append(abs(q["value"] - want[1]))
            else:
                oracle_queries.append({"value": want})
                deltas.append(abs(q["value"] - want))
        out["oracle"] = {"queries": oracle_queries, "decisions": decisions}
        out["delta"] = max(deltas) if deltas else 0.0
    if args.dot:
        compiler = internal["compiler"]
        with open(args.dot, "w") as fh:
            fh.write(mgr.to_dot([compiler.constraint], names=["defs"]))
        out["dot"] = args.dot
    _emit(out)
    return 0


def cmd_dot(args) -> int:
    args.oracle = False
    args.stats = False
    args.no_prune = False
    args.heuristic = "static"
    args.dot = args.out
    return cmd_solve(args)


def cmd_gen(args) -> int:
    try:
        if args.family == "bn":
            text = gen_bn(args.bn, args.strategy, args.seed)
        elif args.family == "dr":
            text = gen_dr(args.n, seed=args.seed)
        elif args.family == "ladder":
            text = gen_ladder(args.n, args.k, seed=args.seed)
        elif args.family == "gridworld":
            text = gen_gridworld(args.dim, args.horizon, args.slip, seed=args.seed)
        elif args.family == "nested-mmap":
            text = gen_nested_mmap(args.n)
        else:
            return _fail(USAGE_EXIT, "usage", f"unknown family {args.family!r}")
    except _INPUT_ERRORS as exc:
        return _fail(INPUT_EXIT, "input", exc)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        sys.stdout.write(text + "\n")
    return 0


def cmd_bench(args) -> int:
    from .bench import run_bench

    try:
        lo, hi = _parse_range(args.params)
    except ValueError as exc:
        return _fail(USAGE_EXIT, "usage", exc)
    try:
        rows = run_bench(
            args.family,
            range(lo, hi + 1),
            csv_path=args.csv,
            seed=args.seed,
            timeout_ms=args.timeout,
            bn=args.bn,
            strategy=args.strategy,
            jobs=args.jobs,
        )
    except _INPUT_ERRORS as exc:
        return _fail(INPUT_EXIT, "input", exc)
    _emit({"rows": len(rows), "csv": args.csv})
    return 0


def _parse_range(text):
    if ".." in text:
        lo, hi = text.split("..", 1)
        return int(lo), int(hi)
    value = int(text)
    return value, value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optppl",
        description="Exact decision and marginal-MAP solving for discrete "
        "probabilistic programs via weighted decision diagrams.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="solve a .dappl or .pineappl program")
    solve.add_argument("file")
    solve.add_argument("--lang", choices=["dappl", "pineappl"])
    solve.add_argument("--dot", metavar="PATH", help="write the compiled diagram")
    solve.add_argument("--oracle", action="store_true", help="also run brute force")
    solve.add_argument("--order", metavar="FILE", help="explicit variable order")
    solve.add_argument("--no-prune", action="store_true", help="disable pruning")
    solve.add_argument("--stats", action="store_true", help="include statistics")
    solve.add_argument("--heuristic", choices=["static", "gap"], default="static")
    solve.set_defaults(run=cmd_solve)

    dot = sub.add_parser("dot", help="compile a program and write GraphViz text")
    dot.add_argument("file")
    dot.add_argument("--lang", choices=["dappl", "pineappl"])
    dot.add_argument("--order", metavar="FILE")
    dot.add_argument("-o", "--out", required=True)
    dot.set_defaults(run=cmd_dot)

    gen = sub.add_parser("gen", help="emit a benchmark-family program")
    gensub = gen.add_subparsers(dest="family", required=True)
    g_bn = gensub.add_parser("bn")
    g_bn.add_argument("--bn", required=True, help="network JSON file")
    g_bn.add_argument("--strategy", choices=["existing", "new_nodes"], default="existing")
    g_bn.add_argument("--seed", type=int, default=0)
    g_dr = gensub.add_parser("dr")
    g_dr.add_argument("--n", type=int, required=True)
    g_dr.add_argument("--seed", type=int, default=0)
    g_ladder = gensub.add_parser("ladder")
    g_ladder.add_argument("--n", type=int, required=True)
    g_ladder.add_argument("--k", type=int, default=1)
    g_ladder.add_argument("--seed", type=int, default=0)
    g_grid = gensub.add_parser("gridworld")
    g_grid.add_argument("--dim", type=int, required=True)
    g_grid.add_argument("--horizon", type=int, required=True)
    g_grid.add_argument("--slip", type=float, default=0.1)
    g_grid.add_argument("--seed", type=int, default=0)
    g_nested = gensub.add_parser("nested-mmap")
    g_nested.add_argument("--n", type=int, required=True)
    for g in (g_bn, g_dr, g_ladder, g_grid, g_nested):
        g.add_argument("-o", "--out")
        g.set_defaults(run=cmd_gen)

    bench = sub.add_parser("bench", help="run a family over a parameter range")
    bench.add_argument("family", choices=["dr", "ladder", "gridworld", "nested-mmap", "bn"])
    bench.add_argument("--params", required=True, help="N or LO..HI")
    bench.add_argument("--csv", required=True)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--timeout", type=int, default=60000, metavar="MS")
    bench.add_argument("--jobs", type=int, default=1, help="worker processes")
    bench.add_argument("--bn", help="network JSON (family bn)")
    bench.add_argument("--strategy", choices=["existing", "new_nodes"], default="existing")
    bench.set_defaults(run=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else USAGE_EXIT
    return args.run(args)


if __name__ == "__main__":
    sys.exit(main())
