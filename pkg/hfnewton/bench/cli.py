"""
Command-line entry points.

``bench`` runs the experiments and builds profiles; ``solve`` runs a single
solver on a problem described by a JSON spec. Exit codes: 0 success, 1 usage
or configuration error, 2 data error, 3 solver stalled.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from loguru import logger
from pydantic import ValidationError

from hfnewton.bench.experiments import (
    DATASETS,
    DESK_BETAS,
    DESK_SIZES,
    PAPER_SIZES,
    run_experiment_1,
    run_experiment_2,
)
from hfnewton.bench.plotting import plot_profile
from hfnewton.bench.profiles import (
    GRID_POINTS,
    performance_profile,
    read_times_csv,
    write_profile_tsv,
)
from hfnewton.errors import DataError
from hfnewton.factory import SOLVER_NAMES, BenchParams, ProblemFactory, SolverFactory
from hfnewton.logging_utils import setup_logging
from hfnewton.problems.libsvm import LIBSVM_FILES, LIBSVM_REPOSITORY
from hfnewton.schemas import ProblemSpec
from hfnewton.settings import settings
from hfnewton.solvers.trace import write_summary_json, write_trace_csv
from hfnewton.utils import run_file_stem

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_STALLED = 3


class UsageError(Exception):
    """Bad command-line input detected after parsing."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_sizes(text: str) -> list[tuple[int, int]]:
    """``"100x1000,200x2000"`` → [(100, 1000), (200, 2000)]."""
    sizes = []
    for item in text.split(","):
        try:
            n, m = (int(v) for v in item.lower().split("x"))
        except ValueError:
            raise UsageError(f"Invalid size '{item}', expected NxM") from None
        if n < 1 or m < 1:
            raise UsageError(f"Invalid size '{item}', both dimensions must be positive")
        sizes.append((n, m))
    return sizes


def _add_logging_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--log-level", default=None, help="Override LOG_LEVEL")
    parser.add_argument("--log-file", type=Path, default=None, help="Also log to this file")


def build_bench_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bench", description="Benchmarks for adaptive regularized Newton solvers")
    _add_logging_args(parser)
    sub = parser.add_subparsers(dest="command", required=True)

    exp1 = sub.add_parser("exp1", help="Log-sum-exp performance profiles")
    exp1.add_argument("--sizes", default=None, help="Comma-separated NxM list")
    exp1.add_argument("--solvers", default="fd", help="fd, exact, or comma-separated solver names")
    exp1.add_argument("--betas", type=int, default=None, help="Number of β values")
    exp1.add_argument("--eps", type=float, default=1e-6)
    exp1.add_argument("--max-outer", type=int, default=None)
    exp1.add_argument("--seed", type=int, default=0)
    exp1.add_argument("--out", type=Path, default=None)
    exp1.add_argument("--paper-scale", action="store_true", help="Full sizes, 50 betas, k > 4000")
    exp1.add_argument("--jobs", type=int, default=1)

    exp2 = sub.add_parser("exp2", help="Logistic regression on a LIBSVM dataset")
    exp2.add_argument("--dataset", required=True, choices=sorted(DATASETS))
    exp2.add_argument("--data", type=Path, default=None, help="Path to the LIBSVM file")
    exp2.add_argument("--out", type=Path, default=None)
    exp2.add_argument("--max-outer", type=int, default=None)

    profile = sub.add_parser("profile", help="Performance profile from a times CSV")
    profile.add_argument("--times", type=Path, required=True)
    profile.add_argument("--out", type=Path, required=True)
    profile.add_argument("--label", default="custom")

    sub.add_parser("datasets", help="Print the LIBSVM dataset names used by exp2")
    return parser


def build_solve_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="solve", description="Run one solver on one problem")
    _add_logging_args(parser)
    parser.add_argument("--problem", type=Path, required=True, help="Problem spec JSON")
    parser.add_argument("--solver", required=True, choices=SOLVER_NAMES)
    parser.add_argument("--config", type=Path, default=None, help="Solver config JSON")
    parser.add_argument("--seed", type=int, default=0, help="Seed for the starting points")
    parser.add_argument("--out", type=Path, default=None, help="Directory for trace and summary")
    return parser


def _read_json(path: Path) -> dict:
    if not path.is_file():
        raise DataError(f"File not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise UsageError(f"{path} is not valid JSON: {e}") from None


def _cmd_exp1(args) -> int:
    if args.sizes:
        sizes = parse_sizes(args.sizes)
    else:
        sizes = list(PAPER_SIZES if args.paper_scale else DESK_SIZES)
    betas = args.betas or (GRID_POINTS if args.paper_scale else DESK_BETAS)
    max_outer = args.max_outer
    if max_outer is None:
        max_outer = settings.PAPER_MAX_OUTER if args.paper_scale else settings.DESK_MAX_OUTER
    out_dir = args.out or settings.OUTPUT_ROOT / "exp1"
    tables = run_experiment_1(
        sizes=sizes,
        solver_set=args.solvers,
        out_dir=out_dir,
        betas=betas,
        eps=args.eps,
        max_outer=max_outer,
        seed=args.seed,
        jobs=args.jobs,
    )
    for table in tables:
        print(f"{table.label}: profile written to {out_dir / f'profile_{table.label}.tsv'}")
    return EXIT_OK


def _cmd_exp2(args) -> int:
    out_dir = args.out or settings.OUTPUT_ROOT / f"exp2_{args.dataset}"
    rows = run_experiment_2(args.dataset, args.data, out_dir, max_outer=args.max_outer)
    print(f"{'solver':<12} {'status':<10} {'time(s)':>10} {'global':>7} {'total':>7} {'|g|':>10}")
    for row in rows:
        print(
            f"{row.solver:<12} {row.status:<10} {row.cpu_time:>10.3f} {row.global_iterations:>7} "
            f"{row.total_iterations:>7} {row.final_gnorm:>10.3e}"
        )
    return EXIT_STALLED if any(row.status == "stalled" for row in rows) else EXIT_OK


def _cmd_profile(args) -> int:
    if not args.times.is_file():
        raise DataError(f"File not found: {args.times}")
    problems, solvers, times = read_times_csv(args.times)
    table = performance_profile(times, solvers=solvers, problems=problems, label=args.label)
    path = write_profile_tsv(table, args.out / f"profile_{args.label}.tsv")
    plot_profile(table, args.out / f"profile_{args.label}.svg")
    print(f"profile written to {path}")
    return EXIT_OK


def _cmd_datasets(args) -> int:
    print(f"LIBSVM binary datasets: {LIBSVM_REPOSITORY}")
    for name, file_name in LIBSVM_FILES.items():
        print(f"  {name:<10} file '{file_name}' -> expected at {settings.DATA_DIR / file_name}")
    return EXIT_OK


COMMANDS = {
    "exp1": _cmd_exp1,
    "exp2": _cmd_exp2,
    "profile": _cmd_profile,
    "datasets": _cmd_datasets,
}


def _dispatch(func, args) -> int:
    setup_logging(args.log_level, args.log_file)
    try:
        return func(args)
    except (DataError, FileNotFoundError) as e:
        logger.error(f"Data Error: {e}")
        return EXIT_DATA
    except (UsageError, ValidationError, ValueError) as e:
        logger.error(f"Configuration Error: {e}")
        return EXIT_USAGE


def bench_main(argv: list[str] | None = None) -> int:
    args = build_bench_parser().parse_args(argv)
    return _dispatch(COMMANDS[args.command], args)


def _cmd_solve(args) -> int:
    spec = ProblemSpec(**_read_json(args.problem))
    overrides = _read_json(args.config) if args.config else {}
    runner = SolverFactory.create(args.solver, BenchParams(seed=args.seed), overrides)
    problem = ProblemFactory.from_spec(spec)
    x0, x1 = ProblemFactory.initial_points(problem.n, args.seed)
    result = runner(problem, x1, x0=x0)
    result.problem = spec.problem_id
    if args.out is not None:
        stem = run_file_stem(spec.problem_id, args.solver)
        write_trace_csv(result.trace, args.out / f"{stem}.csv")
        write_summary_json(result, args.out / f"{stem}.json")
    print(result.summary().model_dump_json(indent=2))
    return EXIT_STALLED if result.status == "stalled" else EXIT_OK


def solve_main(argv: list[str] | None = None) -> int:
    args = build_solve_parser().parse_args(argv)
    return _dispatch(_cmd_solve, args)


if __name__ == "__main__":
    sys.exit(bench_main())
