"""Command-line entry point: ``controlplan {solve,compile,validate,gen,bench}``."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .bench import coverage, run_benchmark
from .compilation import CompilationTooLarge, FragmentViolation, compile_stats, optimistic_compile, signature_compile
from .generators import RandomSpec, counters_suite, example1, gen_counters, gen_random
from .heuristics import HEURISTICS, INFINITY, make_heuristic
from .io import ParseError, dump_plan, dump_problem, load_plan, load_problem
from .model import ModelError, UnknownAction, validate_plan
from .search import ConfigInvalid, SearchConfig, dpex

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _default_seed() -> int:
    return int(os.environ.get("CONTROLPLAN_SEED", "1"))


def _add_search_flags(p: argparse.ArgumentParser):
    p.add_argument("--samples", type=int, default=5, help="successors sampled per partial expansion")
    p.add_argument("--seed", type=int, default=_default_seed())
    p.add_argument("--timeout", type=float, default=None, help="seconds")
    p.add_argument("--max-nodes", type=int, default=None)
    p.add_argument("--max-rejections", type=int, default=100)
    p.add_argument("--no-duplicate-pruning", action="store_true")


def _config(args) -> SearchConfig:
    return SearchConfig(
        samples=args.samples, seed=args.seed, max_rejections=args.max_rejections,
        timeout=args.timeout, max_nodes=args.max_nodes, duplicate_pruning=not args.no_duplicate_pruning,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="controlplan", description="Numeric planning with control variables")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="search for a plan")
    p.add_argument("problem")
    p.add_argument("--heuristic", choices=HEURISTICS, default="hadd")
    p.add_argument("--plan-out")
    _add_search_flags(p)

    p = sub.add_parser("compile", help="compile to a simple numeric problem")
    p.add_argument("problem")
    p.add_argument("--mode", choices=("optimistic", "signature"), default="signature")
    p.add_argument("--out")
    p.add_argument("--stats", action="store_true")

    p = sub.add_parser("validate", help="check a plan against a problem")
    p.add_argument("problem")
    p.add_argument("plan")

    p = sub.add_parser("gen", help="generate instances")
    p.add_argument("domain", choices=("counters", "random", "example1"))
    p.add_argument("--n", type=int, default=4, help="counters: number of counters")
    p.add_argument("--lo", default="0")
    p.add_argument("--hi", default="4")
    p.add_argument("--kind", choices=("discrete", "continuous"), default="discrete")
    p.add_argument("--step", default="1")
    p.add_argument("--seed", type=int, default=_default_seed(), help="random: instance seed")
    p.add_argument("--count", type=int, default=None, help="write a suite of this many instances")
    p.add_argument("--out", help="output file, or directory with --count")

    p = sub.add_parser("bench", help="run heuristics over a directory of problems")
    p.add_argument("suite_dir")
    p.add_argument("--heuristics", default=",".join(HEURISTICS))
    p.add_argument("--csv-out")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--domain", default=None, help="domain tag for the CSV (default: directory name)")
    _add_search_flags(p)
    return parser


def _solve(args) -> int:
    problem = load_problem(args.problem)
    result = dpex(problem, make_heuristic(args.heuristic, problem), _config(args))
    st = result.stats
    if result.h_init == INFINITY:
        print("dead end at initial state")
    print(
        f"status={result.status} plan_length={st.plan_length} expansions={st.expansions} "
        f"partial_expansions={st.partial_expansions} nodes={st.nodes_generated} "
        f"samples={st.samples_drawn} time={st.wall_time:.3f}s"
    )
    if not result.solved:
        return EXIT_FAIL
    for i, step in enumerate(result.plan):
        mu = ", ".join(f"{k}={v}" for k, v in sorted(step.mu.items()))
        print(f"{i}: {step.action}({mu})")
    if args.plan_out:
        dump_plan(result.plan, args.plan_out, problem.name)
    return EXIT_OK


def _compile(args) -> int:
    problem = load_problem(args.problem)
    compiled = optimistic_compile(problem) if args.mode == "optimistic" else signature_compile(problem)
    if args.out:
        dump_problem(compiled, args.out)
    elif not args.stats:
        sys.stdout.write(dump_problem(compiled))
    if args.stats:
        print(compile_stats(problem).line())
    return EXIT_OK


def _validate(args) -> int:
    problem = load_problem(args.problem)
    report = validate_plan(problem, load_plan(args.plan))
    if report.solution:
        print("plan is a solution")
        return EXIT_OK
    where = "" if report.failed_step is None else f" at step {report.failed_step}"
    print(f"plan is not a solution: {report.reason}{where}: {report.detail}")
    return EXIT_FAIL


def _generate(args, seed_offset=0):
    if args.domain == "example1":
        return example1()
    if args.domain == "counters":
        return gen_counters(args.n + seed_offset, args.lo, args.hi, args.kind, args.step)
    return gen_random(args.seed + seed_offset, RandomSpec(kind=args.kind))


def _gen(args) -> int:
    if args.count is None:
        text = dump_problem(_generate(args))
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
        return EXIT_OK
    if not args.out:
        raise ConfigInvalid("--count needs --out DIR")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.domain == "counters":
        problems = counters_suite(args.count, args.kind, args.hi)
    else:
        problems = [_generate(args, i) for i in range(args.count)]
    for i, problem in enumerate(problems):
        dump_problem(problem, out / f"{i:03d}-{problem.name}.json")
    print(f"wrote {len(problems)} problems to {out}")
    return EXIT_OK


def _bench(args) -> int:
    files = sorted(Path(args.suite_dir).glob("*.json"))
    if not files:
        raise ConfigInvalid(f"no *.json problems in {args.suite_dir}")
    heuristics = [h.strip() for h in args.heuristics.split(",") if h.strip()]
    for h in heuristics:
        if h not in HEURISTICS:
            raise ConfigInvalid(f"unknown heuristic {h!r}")
    domain = args.domain or Path(args.suite_dir).name
    suite = [(f.stem, domain, f.read_text()) for f in files]
    records = run_benchmark(suite, heuristics, _config(args), args.csv_out, args.workers)
    cov = coverage(records)
    for h in heuristics:
        print(f"coverage {h}: {cov.get(h, 0)}/{len(files)}")
    errors = [r for r in records if r.status == "Error"]
    for r in errors:
        print(f"error {r.instance} {r.heuristic}: {r.error}", file=sys.stderr)
    return EXIT_OK


COMMANDS = {"solve": _solve, "compile": _compile, "validate": _validate, "gen": _gen, "bench": _bench}


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except (ParseError, FragmentViolation, UnknownAction, ConfigInvalid, CompilationTooLarge, ModelError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_USAGE


def main():
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
