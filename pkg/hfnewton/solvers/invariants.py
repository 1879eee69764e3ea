"""
Checks of the guarantees a run must satisfy, recomputed from its trace.

All checkers return a list of human-readable violation strings; an empty
list means the property holds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from hfnewton.problems.base import ObjectiveProblem
from hfnewton.schemas import IterateRecord
from hfnewton.solvers.trace import RunResult

DEFAULT_SLACK = 1e-12


def _steps(trace: list[IterateRecord]):
    for current, nxt in zip(trace, trace[1:]):
        if current.has_step:
            yield current, nxt


def acceptance_violations(trace: list[IterateRecord], slack: float = DEFAULT_SLACK) -> list[str]:
    """Sufficient decrease and gradient control on consecutive trace rows."""
    violations = []
    for row, nxt in _steps(trace):
        tol = slack * max(1.0, abs(row.f))
        bound = row.f - 0.5 * row.lambda_ * row.snorm**2
        if nxt.f > bound + tol:
            violations.append(f"k={row.k}: f_next={nxt.f!r} exceeds {bound!r}")
        if nxt.gnorm > 2.0 * row.lambda_ * row.snorm + tol:
            limit = 2.0 * row.lambda_ * row.snorm
            violations.append(f"k={row.k}: |g_next|={nxt.gnorm!r} exceeds 2*lambda*|s|={limit!r}")
    return violations


def recompute_acceptance(
    problem: ObjectiveProblem, result: RunResult, slack: float = DEFAULT_SLACK
) -> list[str]:
    """Re-evaluate both acceptance tests from the stored iterates."""
    if result.iterates is None:
        raise ValueError("Run was made with store_iterates=False")
    violations = []
    steps = [row for row in result.trace if row.has_step]
    for j, row in enumerate(steps):
        x_k, x_next = result.iterates[j], result.iterates[j + 1]
        f_k, f_next = problem.value(x_k), problem.value(x_next)
        snorm = float(np.linalg.norm(x_next - x_k))
        tol = slack * max(1.0, abs(f_k))
        if f_next > f_k - 0.5 * row.lambda_ * snorm**2 + tol:
            violations.append(f"k={row.k}: recomputed decrease test fails")
        if float(np.linalg.norm(problem.gradient(x_next))) > 2.0 * row.lambda_ * snorm + tol:
            violations.append(f"k={row.k}: recomputed gradient test fails")
    return violations


def sigma_violations(
    trace: list[IterateRecord], sigma1: float, sigma_max: float | None = None
) -> list[str]:
    violations = []
    for row in trace:
        if row.sigma_k < sigma1 * (1.0 - 1e-12):
            violations.append(f"k={row.k}: sigma_k={row.sigma_k!r} below sigma1={sigma1!r}")
        if sigma_max is not None and row.sigma_k > sigma_max * (1.0 + 1e-9):
            violations.append(f"k={row.k}: sigma_k={row.sigma_k!r} above bound {sigma_max!r}")
    return violations


@dataclass
class ComplexityLedger:
    gradient_sum: float
    decrease: float
    slack: float

    @property
    def holds(self) -> bool:
        return self.gradient_sum <= self.decrease + self.slack


def complexity_ledger(trace: list[IterateRecord], slack: float = DEFAULT_SLACK) -> ComplexityLedger:
    """Σ ‖∇f(x_{k+1})‖² / (4λ_k) against f(x₁) − f(x_T)."""
    total = sum(nxt.gnorm**2 / (4.0 * row.lambda_) for row, nxt in _steps(trace))
    first, last = trace[0], trace[-1]
    return ComplexityLedger(
        gradient_sum=total, decrease=first.f - last.f, slack=slack * max(1.0, abs(first.f))
    )


def complexity_iteration_bound(
    f1: float, f_low: float, eps: float, sigma_max: float, M: float, alpha: float
) -> float:
    """Worst-case count 1 + 18√(2σ_max M^α)(f(x₁) − f_low)/ε² of iterations with ‖∇f‖ > ε."""
    return 1.0 + 18.0 * math.sqrt(2.0 * sigma_max * M**alpha) * (f1 - f_low) / eps**2


def global_rate_slope(f_values, f_star: float, min_gap: float = 1e-13) -> float:
    """Least-squares slope of log(f(x_k) − f*) against log k, k = 1, 2, ...

    Points whose gap falls below ``min_gap`` are dropped.
    """
    f_values = np.asarray(f_values, dtype=float)
    ks = np.arange(1, f_values.size + 1, dtype=float)
    gaps = f_values - f_star
    keep = gaps > min_gap
    if keep.sum() < 2:
        raise ValueError("Need at least two iterates above the optimality gap floor")
    slope, _ = np.polyfit(np.log(ks[keep]), np.log(gaps[keep]), 1)
    return float(slope)


def local_rate_constant(sigma_max: float, mu: float) -> float:
    if mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    return 2.0 * math.sqrt(2.0 * sigma_max) / mu


def local_rate_violations(gnorms, C: float, alpha: float, last: int = 5) -> list[str]:
    """‖∇f(x_{k+1})‖ ≤ C‖∇f(x_k)‖^{(α+2)/2} over the final ``last`` transitions."""
    gnorms = np.asarray(gnorms, dtype=float)
    start = max(0, gnorms.size - 1 - last)
    exponent = (alpha + 2.0) / 2.0
    violations = []
    for k in range(start, gnorms.size - 1):
        bound = C * gnorms[k] ** exponent
        if gnorms[k + 1] > bound * (1.0 + 1e-9):
            violations.append(f"transition {k}: {gnorms[k + 1]!r} > {bound!r}")
    return violations


def local_convergence_radius(mu: float, sigma_max: float, alpha: float) -> float:
    """Gradient norm below which the local rate forces superlinear convergence."""
    return 0.5 * (mu / (2.0 * math.sqrt(2.0 * sigma_max))) ** (2.0 / alpha)


def decay_sequence(a0: float, C: float, alpha: float, t_max: int) -> np.ndarray:
    """a_{t+1} = a_t − C·a_t^{(4−α)/2} for t < t_max."""
    values = np.empty(t_max + 1)
    values[0] = a0
    exponent = (4.0 - alpha) / 2.0
    for t in range(t_max):
        values[t + 1] = values[t] - C * values[t] ** exponent
    return values


def decay_bound(C: float, alpha: float, t) -> np.ndarray:
    p = 2.0 / (2.0 - alpha)
    return (2.0 / C) ** p * (np.asarray(t, dtype=float) + 1.0) ** (-p)


def decay_sequences(count: int, t_max: int, seed: int = 0) -> list[tuple[float, float, np.ndarray]]:
    """Random positive sequences following the decay recursion, as (C, α, values)."""
    rng = np.random.default_rng(seed)
    sequences = []
    for _ in range(count):
        C = float(10.0 ** rng.uniform(-3, 0))
        alpha = float(rng.uniform(0.05, 1.0))
        # C·a0^{(2−α)/2} ≤ 1/2 keeps every term positive
        a_cap = (0.5 / C) ** (2.0 / (2.0 - alpha))
        a0 = a_cap * float(rng.uniform(0.01, 1.0))
        sequences.append((C, alpha, decay_sequence(a0, C, alpha, t_max)))
    return sequences
