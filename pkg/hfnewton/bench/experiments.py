"""
The two benchmark experiments.

Experiment 1 compares solver sets on log-sum-exp instances across a grid of
smoothing parameters β and summarizes run times as performance profiles.
Experiment 2 runs all six solvers on ℓ2-regularized logistic regression over
a LIBSVM dataset and tabulates iteration counts and final gradient norms.
"""
from __future__ import annotations

import csv
import itertools
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from loguru import logger

from hfnewton.bench.plotting import plot_gradient_curves, plot_profile
from hfnewton.bench.profiles import (
    FAILURE_TIME,
    betas_grid,
    performance_profile,
    write_profile_tsv,
    write_times_csv,
)
from hfnewton.factory import (
    EXACT_SET,
    FD_SET,
    SOLVER_NAMES,
    BenchParams,
    ProblemFactory,
    SolverFactory,
)
from hfnewton.problems.base import ObjectiveProblem
from hfnewton.problems.logistic import LogisticRegressionProblem
from hfnewton.schemas import ExperimentRow, ProblemSpec, ProfileTable
from hfnewton.settings import settings
from hfnewton.solvers.trace import RunResult, write_summary_json, write_trace_csv
from hfnewton.utils import prepare_output_dir, run_file_stem

PROBLEM1_PARAMS = BenchParams(
    alpha=0.95, zeta=2.01, theta=1e-6, eps=1e-6, gamma=3.37, theta_bar=2.23, sigma_divisor=2.0
)
MUSHROOMS_PARAMS = BenchParams(
    alpha=1.0,
    zeta=3.0,
    theta=1e-11,
    eps=1e-11,
    gamma=4.5,
    theta_bar=2.7,
    sigma_divisor=1e4,
    max_outer=1000,
)
W8A_PARAMS = BenchParams(
    alpha=1.0,
    zeta=3.0,
    theta=1e-8,
    eps=1e-6,
    gamma=4.5,
    theta_bar=0.1,
    sigma_divisor=1e4,
    max_outer=1000,
)
LOGISTIC_ELL = 1e-10
DATASETS = {"mushrooms": MUSHROOMS_PARAMS, "w8a": W8A_PARAMS}

PAPER_SIZES = ((100, 1000), (200, 2000), (300, 3000))
DESK_SIZES = ((20, 200), (40, 400))
DESK_BETAS = 10

SOLVER_SETS = {"fd": FD_SET, "exact": EXACT_SET}


def resolve_solvers(solver_set: str | Sequence[str]) -> tuple[str, ...]:
    if isinstance(solver_set, str):
        if solver_set in SOLVER_SETS:
            return SOLVER_SETS[solver_set]
        solver_set = [s.strip() for s in solver_set.split(",") if s.strip()]
    unknown = [s for s in solver_set if s not in SOLVER_NAMES]
    if unknown or not solver_set:
        raise ValueError(
            f"Unknown solver set {solver_set!r}; use fd, exact or names from {SOLVER_NAMES}"
        )
    return tuple(solver_set)


def _record(result: RunResult, problem_id: str, out_dir: Path) -> ExperimentRow:
    stem = run_file_stem(problem_id, result.solver)
    result.problem = problem_id
    trace_path = write_trace_csv(result.trace, out_dir / "traces" / f"{stem}.csv")
    write_summary_json(result, out_dir / "summaries" / f"{stem}.json")
    return ExperimentRow(
        solver=result.solver,
        problem=problem_id,
        status=result.status,
        cpu_time=result.wall_time,
        global_iterations=result.iterations,
        total_iterations=result.total_trials,
        final_gnorm=result.final_gnorm,
        trace_path=str(trace_path),
    )


def solve_and_record(
    problem: ObjectiveProblem, problem_id: str, solver: str, params: BenchParams, out_dir: Path
) -> tuple[ExperimentRow, RunResult | None]:
    """Run one solver and persist its trace; failures become an ``error`` row."""
    try:
        x0, x1 = ProblemFactory.initial_points(problem.n, params.seed)
        result = SolverFactory.create(solver, params)(problem, x1, x0=x0)
        return _record(result, problem_id, out_dir), result
    except Exception as e:
        logger.exception(f"Run {solver} on {problem_id} failed")
        row = ExperimentRow(
            solver=solver,
            problem=problem_id,
            status="error",
            cpu_time=FAILURE_TIME,
            global_iterations=0,
            total_iterations=0,
            final_gnorm=float("nan"),
            error=f"{type(e).__name__}: {e}",
        )
        return row, None


def run_cell(spec: ProblemSpec, solver: str, params: BenchParams, out_dir: Path) -> ExperimentRow:
    """One (problem, solver) grid cell; builds the problem itself so it can run in a worker."""
    try:
        problem = ProblemFactory.from_spec(spec)
    except Exception as e:
        logger.exception(f"Building {spec.problem_id} failed")
        return ExperimentRow(
            solver=solver,
            problem=spec.problem_id,
            status="error",
            cpu_time=FAILURE_TIME,
            global_iterations=0,
            total_iterations=0,
            final_gnorm=float("nan"),
            error=f"{type(e).__name__}: {e}",
        )
    row, _ = solve_and_record(problem, spec.problem_id, solver, params, Path(out_dir))
    return row


def profile_time(row: ExperimentRow) -> float:
    return row.cpu_time if row.status == "converged" else FAILURE_TIME


def run_grid(
    specs: Sequence[ProblemSpec],
    solvers: Sequence[str],
    params: BenchParams,
    out_dir: Path,
    jobs: int = 1,
) -> list[ExperimentRow]:
    """Every (problem, solver) cell, in row-major order; ``jobs > 1`` uses worker processes."""
    cells = list(itertools.product(specs, solvers))
    if jobs > 1 and len(cells) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                pool.submit(run_cell, spec, solver, params, out_dir) for spec, solver in cells
            ]
            return [future.result() for future in futures]
    return [run_cell(spec, solver, params, out_dir) for spec, solver in cells]


def run_experiment_1(
    sizes: Sequence[tuple[int, int]] = DESK_SIZES,
    solver_set: str | Sequence[str] = "fd",
    out_dir: Path | None = None,
    betas: int | Sequence[float] = DESK_BETAS,
    eps: float = 1e-6,
    max_outer: int | None = None,
    seed: int = 0,
    jobs: int = 1,
) -> list[ProfileTable]:
    """One performance profile per (n, m) size over the β grid."""
    solvers = resolve_solvers(solver_set)
    out_dir = prepare_output_dir(out_dir)
    beta_values = betas_grid(betas) if isinstance(betas, int) else [float(b) for b in betas]
    params = PROBLEM1_PARAMS.model_copy(
        update={
            "eps": eps,
            "theta": eps,
            "seed": seed,
            "max_outer": settings.DESK_MAX_OUTER if max_outer is None else max_outer,
        }
    )

    tables = []
    for n, m in sizes:
        label = f"n{n}_m{m}"
        logger.info(f"Experiment 1 [{label}]: {len(beta_values)} problems x {len(solvers)} solvers")
        specs = [
            ProblemSpec(kind="logsumexp", n=n, m=m, beta=beta, seed=seed) for beta in beta_values
        ]
        rows = run_grid(specs, solvers, params, out_dir, jobs=jobs)
        times = [
            [profile_time(row) for row in rows[p * len(solvers) : (p + 1) * len(solvers)]]
            for p in range(len(specs))
        ]
        table = performance_profile(
            times, solvers=list(solvers), problems=[s.problem_id for s in specs], label=label
        )
        write_profile_tsv(table, out_dir / f"profile_{label}.tsv")
        write_times_csv(table, out_dir / f"times_{label}.csv")
        plot_profile(table, out_dir / f"profile_{label}.svg", title=f"n={n}, m={m}")
        failures = sum(row.status != "converged" for row in rows)
        if failures:
            logger.warning(f"Experiment 1 [{label}]: {failures} failed runs")
        tables.append(table)
    return tables


def write_experiment_table(rows: Sequence[ExperimentRow], path: Path) -> Path:
    path = Path(path)
    fields = list(ExperimentRow.model_fields)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(fields)
        for row in rows:
            values = row.model_dump()
            writer.writerow(["" if values[k] is None else values[k] for k in fields])
    return path


def write_gradient_curves(curves: dict[str, list[float]], path: Path) -> Path:
    """``k<TAB>solver1<TAB>...``; cells past the end of a run are empty."""
    path = Path(path)
    solvers = list(curves)
    length = max((len(c) for c in curves.values()), default=0)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, delimiter="\t", lineterminator="\n")
        writer.writerow(["k"] + solvers)
        for k in range(length):
            writer.writerow(
                [k + 1] + [repr(float(curves[s][k])) if k < len(curves[s]) else "" for s in solvers]
            )
    return path


def run_logistic_comparison(
    problem: ObjectiveProblem,
    problem_id: str,
    params: BenchParams,
    out_dir: Path | None = None,
    solvers: Sequence[str] = SOLVER_NAMES,
) -> list[ExperimentRow]:
    """Run every solver on one problem; writes table.csv and the gradient-norm curves."""
    out_dir = prepare_output_dir(out_dir)
    rows = []
    curves: dict[str, list[float]] = {}
    for solver in solvers:
        row, result = solve_and_record(problem, problem_id, solver, params, out_dir)
        rows.append(row)
        if result is not None:
            curves[solver] = [record.gnorm for record in result.trace]
        logger.info(
            f"{problem_id} {solver}: status={row.status} k={row.global_iterations} "
            f"Nk={row.total_iterations} |g|={row.final_gnorm:.3e} time={row.cpu_time:.3f}s"
        )
    write_experiment_table(rows, out_dir / "table.csv")
    write_gradient_curves(curves, out_dir / "gradient_curves.tsv")
    plot_gradient_curves(curves, out_dir / "gradient_curves.svg", title=problem_id)
    return rows


def run_experiment_2(
    dataset: str,
    data_path: Path | None = None,
    out_dir: Path | None = None,
    max_outer: int | None = None,
) -> list[ExperimentRow]:
    """All six solvers on a LIBSVM logistic-regression dataset (ℓ = 1e-10)."""
    if dataset not in DATASETS:
        raise ValueError(f"Unknown dataset '{dataset}'. Choose from: {', '.join(DATASETS)}")
    params = DATASETS[dataset]
    if max_outer is not None:
        params = params.model_copy(update={"max_outer": max_outer})
    data_path = Path(data_path) if data_path is not None else settings.DATA_DIR / dataset
    problem = LogisticRegressionProblem.from_libsvm(data_path, LOGISTIC_ELL)
    return run_logistic_comparison(problem, f"logreg_{dataset}", params, out_dir)
