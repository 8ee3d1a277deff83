"""Command-line entry points: parse, solve, verify, translate, bench.

Exit codes: 0 success/solved/verified, 1 parse or analysis error,
2 search exhausted or budget/memory cap hit, 3 timeout, 4 inconclusive,
5 candidate refuted, 6 not in the translatable fragment.
"""

from __future__ import annotations

import argparse
import csv
import os
import statistics
import sys
import time
from dataclasses import dataclass

from .analyzer import load_problem, print_semgus
from .enumerators import STRATEGIES, SolveLimits, solve
from .errors import IncompleteTermError, SemgusError
from .evaluator import Evaluator, split_spec
from .jsonio import problem_to_events, problem_to_json_text
from .operational import operationalize_all, plan_to_text
from .sexpr import SList, Symbol, print_sexpr, read_sexprs
from .terms import is_complete, print_term, term_from_sexpr
from .verify import (
    Inconclusive,
    Refuted,
    SolverConfig,
    Verified,
    default_solver_config,
    verify_logical,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_EXHAUSTED = 2
EXIT_TIMEOUT = 3
EXIT_INCONCLUSIVE = 4
EXIT_REFUTED = 5
EXIT_NOT_IN_FRAGMENT = 6

_STATUS_EXIT = {
    "solved": EXIT_OK,
    "exhausted": EXIT_EXHAUSTED,
    "budget": EXIT_EXHAUSTED,
    "memout": EXIT_EXHAUSTED,
    "timeout": EXIT_TIMEOUT,
    "inconclusive": EXIT_INCONCLUSIVE,
}


@dataclass
class BenchRecord:
    benchmark_path: str
    strategy: str
    status: str
    wall_time_seconds: float
    candidates_enumerated: int
    evaluations_per_second: float
    counterexample_count: int
    solution_text: str | None = None


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SemgusError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_ERROR
    except BrokenPipeError:
        return EXIT_ERROR
    except Exception as err:  # never crash with a traceback
        print(f"internal error: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_ERROR


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="semgus",
        description="Parse, solve, verify and translate SemGuS synthesis problems.")
    sub = parser.add_subparsers(required=True)

    p = sub.add_parser("parse", help="analyze a problem and print its IR")
    p.add_argument("file")
    p.add_argument("--format", choices=("json", "sexpr"), default="json")
    p.add_argument("--dump-plans", action="store_true",
                   help="print evaluation plans to stderr")
    p.set_defaults(func=cmd_parse)

    s = sub.add_parser("solve", help="run an enumerative solver")
    s.add_argument("file")
    s.add_argument("--solver", choices=STRATEGIES, default="top-down")
    s.add_argument("--timeout", type=float, default=None, metavar="S")
    s.add_argument("--fuel", type=int, default=10**6)
    s.add_argument("--max-candidates", type=int, default=None)
    s.add_argument("--max-size", type=int, default=None)
    s.add_argument("--memory-mb", type=float, default=4096.0,
                   help="soft memory cap for queues and banks (0 disables)")
    s.add_argument("--smt-solver", default=None, metavar="PATH")
    s.add_argument("--smt-timeout", type=float, default=10.0, metavar="S")
    s.add_argument("--strict-eval", action="store_true",
                   help="flag CHC alternatives with overlapping guards")
    s.add_argument("--dump-plans", action="store_true")
    s.set_defaults(func=cmd_solve)

    v = sub.add_parser("verify", help="check a candidate term against the spec")
    v.add_argument("file")
    v.add_argument("--candidate", required=True, metavar="TERMFILE")
    v.add_argument("--mode", choices=("examples", "logical"), default="examples")
    v.add_argument("--fuel", type=int, default=10**6)
    v.add_argument("--smt-solver", default=None, metavar="PATH")
    v.add_argument("--smt-timeout", type=float, default=10.0, metavar="S")
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("translate", help="translate between SyGuS and SemGuS")
    t.add_argument("file")
    t.add_argument("--direction", choices=("sygus2semgus", "semgus2sygus"),
                   required=True)
    t.add_argument("--out", default=None)
    t.set_defaults(func=cmd_translate)

    b = sub.add_parser("bench", help="run every problem in a directory")
    b.add_argument("dir")
    b.add_argument("--solver", choices=STRATEGIES, default="top-down")
    b.add_argument("--timeout", type=float, default=10.0, metavar="S")
    b.add_argument("--repeat", type=int, default=1, metavar="K")
    b.add_argument("--out", default="report.csv")
    b.add_argument("--fuel", type=int, default=10**6)
    b.add_argument("--max-size", type=int, default=None)
    b.add_argument("--memory-mb", type=float, default=4096.0)
    b.add_argument("--smt-solver", default=None, metavar="PATH")
    b.add_argument("--smt-timeout", type=float, default=10.0, metavar="S")
    b.set_defaults(func=cmd_bench)
    return parser


def _solver_config(args) -> SolverConfig | None:
    path = getattr(args, "smt_solver", None)
    limit = getattr(args, "smt_timeout", 10.0)
    if path:
        base = os.path.basename(path)
        return SolverConfig(path, ["-in"] if base.startswith("z3") else [], limit)
    return default_solver_config(limit)


def _limits(args) -> SolveLimits:
    return SolveLimits(
        max_candidates=getattr(args, "max_candidates", None),
        max_size=getattr(args, "max_size", None),
        timeout_s=getattr(args, "timeout", None),
        fuel=getattr(args, "fuel", 10**6),
        memory_mb=(args.memory_mb or None) if hasattr(args, "memory_mb") else None,
        strict=getattr(args, "strict_eval", False),
    )


def _dump_plans(problem, out=sys.stderr) -> None:
    res = operationalize_all(problem)
    for plans in res.plans.values():
        for plan in plans:
            print(plan_to_text(plan), file=out)
    for err in res.errors:
        print(f"not executable: {err}", file=out)


def cmd_parse(args) -> int:
    problem = load_problem(args.file)
    if args.format == "json":
        print(problem_to_json_text(problem))
    else:
        for event in problem_to_events(problem):
            print(print_sexpr(event))
    if args.dump_plans:
        _dump_plans(problem)
    return EXIT_OK


def _solution_text(problem, term) -> str:
    return (f"((define-fun {problem.target.name} () "
            f"{problem.target.term_type} {print_term(term)}))")


def cmd_solve(args) -> int:
    problem = load_problem(args.file)
    if args.dump_plans:
        _dump_plans(problem)
    outcome = solve(problem, args.solver, _limits(args),
                    solver_config=_solver_config(args))
    if outcome.status == "solved":
        print(_solution_text(problem, outcome.term))
    else:
        print(f"{outcome.status}: {outcome.message or ''} "
              f"({outcome.candidates} candidates in "
              f"{outcome.wall_seconds:.2f}s)", file=sys.stderr)
    return _STATUS_EXIT[outcome.status]


def _read_candidate(path: str, problem):
    exprs = read_sexprs(open(path, encoding="utf-8").read(), filename=path)
    if len(exprs) != 1:
        raise SemgusError(f"{path}: expected exactly one term, found {len(exprs)}")
    expr = exprs[0]
    # accept ((define-fun name () TT term)) and (define-fun name () TT term)
    if isinstance(expr, SList) and len(expr) == 1 and isinstance(expr[0], SList):
        inner = expr[0]
        if inner.items and inner.items[0] == Symbol("define-fun"):
            expr = inner
    if (isinstance(expr, SList) and len(expr) == 5
            and expr.items[0] == Symbol("define-fun")):
        expr = expr[4]
    return term_from_sexpr(expr, problem, problem.target.term_type)


def cmd_verify(args) -> int:
    problem = load_problem(args.file)
    term = _read_candidate(args.candidate, problem)
    if not is_complete(term):
        raise IncompleteTermError(f"candidate in {args.candidate} contains holes")
    if args.mode == "examples":
        evaluator = Evaluator(problem, default_fuel=args.fuel)
        spec = split_spec(problem)
        result = evaluator.run_examples(term, spec.direct, fuel=args.fuel)
        if not result.passed:
            print(f"refuted: example {result.failing_index} fails "
                  f"({result.reason})", file=sys.stderr)
            return EXIT_REFUTED
        for g in spec.ground:
            try:
                ok = evaluator.check_formula(term, g, fuel=args.fuel)
            except SemgusError:
                continue  # needs the logical verifier
            if not ok:
                print(f"refuted: constraint {print_sexpr(g)} fails", file=sys.stderr)
                return EXIT_REFUTED
        print(f"pass: {len(spec.direct)} examples, "
              f"{len(spec.ground)} ground constraints")
        return EXIT_OK
    config = _solver_config(args)
    result = verify_logical(term, problem, config)
    if isinstance(result, Verified):
        print("verified")
        return EXIT_OK
    if isinstance(result, Refuted):
        cex = " ".join(f"{k}={v}" for k, v in result.counterexample.items())
        print(f"refuted: {cex or 'ground constraints violated'}")
        return EXIT_REFUTED
    print(f"inconclusive: {result.reason}", file=sys.stderr)
    return EXIT_INCONCLUSIVE


def cmd_translate(args) -> int:
    from .sygus import (NotInFragment, load_sygus, print_sygus, semgus_to_sygus,
                        sygus_commands)

    if args.direction == "sygus2semgus":
        sp = load_sygus(args.file)
        text = "\n".join(print_sexpr(c) for c in sygus_commands(sp)) + "\n"
    else:
        problem = load_problem(args.file)
        result = semgus_to_sygus(problem)
        if isinstance(result, NotInFragment):
            print(f"not in fragment: {result.reason}", file=sys.stderr)
            return EXIT_NOT_IN_FRAGMENT
        text = print_sygus(result)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return EXIT_OK


def cmd_bench(args) -> int:
    paths = sorted(
        os.path.join(root, name)
        for root, _dirs, files in os.walk(args.dir)
        for name in files if name.endswith(".sem"))
    records: list[BenchRecord] = []
    config = _solver_config(args)
    for path in paths:
        records.append(_bench_one(path, args, config))
    _write_report(records, args.out)
    return EXIT_OK


def _bench_one(path: str, args, config) -> BenchRecord:
    times: list[float] = []
    last = None
    try:
        for _ in range(max(1, args.repeat)):
            problem = load_problem(path)
            t0 = time.monotonic()
            last = solve(problem, args.solver, _limits(args), solver_config=config)
            times.append(time.monotonic() - t0)
        solution = None
        if last.status == "solved":
            solution = _solution_text(problem, last.term)
        return BenchRecord(path, args.solver, last.status,
                           statistics.median(times), last.candidates,
                           last.evals_per_second, last.cex_count, solution)
    except SemgusError as err:
        print(f"{path}: {err}", file=sys.stderr)
        return BenchRecord(path, args.solver, "error",
                           statistics.median(times) if times else 0.0, 0, 0.0, 0)


def _write_report(records: list[BenchRecord], out_path: str) -> None:
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["path", "strategy", "status", "median_seconds",
                         "candidates", "evals_per_sec", "cex_count"])
        for r in records:
            writer.writerow([r.benchmark_path, r.strategy, r.status,
                             f"{r.wall_time_seconds:.6f}", r.candidates_enumerated,
                             f"{r.evaluations_per_second:.1f}",
                             r.counterexample_count])
    solved = sorted(r.wall_time_seconds for r in records if r.status == "solved")
    cactus = os.path.join(os.path.dirname(os.path.abspath(out_path)), "cactus.dat")
    with open(cactus, "w", encoding="utf-8") as fh:
        for i, t in enumerate(solved, start=1):
            fh.write(f"{i} {t:.6f}\n")


if __name__ == "__main__":
    sys.exit(main())
