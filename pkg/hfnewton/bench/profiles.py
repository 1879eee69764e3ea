"""Performance profiles over a solver x problem table of run times."""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from hfnewton.schemas import ProfileTable
from hfnewton.settings import settings

FAILURE_TIME = settings.FAILURE_TIME
GRID_POINTS = 50


def betas_grid(points: int = GRID_POINTS) -> list[float]:
    """Smoothing parameters β evenly spaced over [0.01, 0.5]."""
    return np.linspace(0.01, 0.5, points).tolist()


def taus_grid(points: int = GRID_POINTS) -> list[float]:
    return np.linspace(1.0, 5.0, points).tolist()


def performance_profile(
    times,
    taus=None,
    solvers: list[str] | None = None,
    problems: list[str] | None = None,
    label: str = "",
) -> ProfileTable:
    """Ratios r[p, s] = t[p, s] / min_s t[p, s] and curves P_s(τ) = #{p : r[p, s] ≤ τ} / n_p."""
    times = np.asarray(times, dtype=float)
    if times.ndim != 2 or times.size == 0:
        raise ValueError(f"times must be a nonempty problems x solvers matrix, got {times.shape}")
    if np.any(~np.isfinite(times)) or np.any(times <= 0):
        raise ValueError("times must be positive and finite; encode failures as the failure time")
    n_p, n_s = times.shape
    solvers = list(solvers) if solvers is not None else [f"solver{j}" for j in range(n_s)]
    problems = list(problems) if problems is not None else [f"problem{p}" for p in range(n_p)]
    if len(solvers) != n_s or len(problems) != n_p:
        raise ValueError("solver and problem labels must match the times matrix")
    taus = taus_grid() if taus is None else [float(t) for t in taus]

    ratios = times / times.min(axis=1, keepdims=True)
    curves = {
        solver: [(tau, float(np.mean(ratios[:, j] <= tau))) for tau in taus]
        for j, solver in enumerate(solvers)
    }
    return ProfileTable(
        label=label,
        solvers=solvers,
        problems=problems,
        times=times.tolist(),
        ratios=ratios.tolist(),
        taus=taus,
        curves=curves,
    )


def profile_violations(table: ProfileTable) -> list[str]:
    """Ratios ≥ 1, a unit ratio on every row, monotone curves bounded by 1."""
    violations = []
    ratios = np.asarray(table.ratios)
    if np.any(ratios < 1.0):
        violations.append("ratio below 1")
    for p, row in enumerate(ratios):
        if not np.any(row == 1.0):
            violations.append(f"problem {table.problems[p]} has no best solver")
    for solver, curve in table.curves.items():
        values = np.array([v for _, v in curve])
        if np.any(np.diff(values) < 0):
            violations.append(f"curve of {solver} decreases")
        if np.any(values > 1.0) or np.any(values < 0.0):
            violations.append(f"curve of {solver} leaves [0, 1]")
    return violations


def write_profile_tsv(table: ProfileTable, path: Path) -> Path:
    """``tau<TAB>P_solver1<TAB>...`` one row per τ."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, delimiter="\t", lineterminator="\n")
        writer.writerow(["tau"] + [f"P_{s}" for s in table.solvers])
        for j, tau in enumerate(table.taus):
            writer.writerow([repr(tau)] + [repr(table.curves[s][j][1]) for s in table.solvers])
    return path


def write_times_csv(table: ProfileTable, path: Path) -> Path:
    """``problem,<solver>,...`` one row per problem."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["problem"] + table.solvers)
        for problem, row in zip(table.problems, table.times):
            writer.writerow([problem] + [repr(t) for t in row])
    return path


def read_times_csv(path: Path) -> tuple[list[str], list[str], np.ndarray]:
    """Inverse of :func:`write_times_csv`: (problems, solvers, times)."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        rows = list(csv.reader(f))
    if len(rows) < 2 or len(rows[0]) < 2 or rows[0][0] != "problem":
        raise ValueError(f"{path}: expected a 'problem,<solver>,...' header and at least one row")
    solvers = rows[0][1:]
    problems = []
    times = []
    for line_no, row in enumerate(rows[1:], start=2):
        if len(row) != len(solvers) + 1:
            expected = len(solvers) + 1
            raise ValueError(f"{path}: line {line_no} has {len(row)} fields, expected {expected}")
        problems.append(row[0])
        try:
            times.append([float(v) for v in row[1:]])
        except ValueError:
            raise ValueError(f"{path}: line {line_no} has a non-numeric time") from None
    return problems, solvers, np.asarray(times)
