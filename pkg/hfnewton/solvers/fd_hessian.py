"""
Forward finite-difference Hessian approximation.

Column ``i`` of the raw matrix is ``(∇f(x + h eᵢ) − ∇f(x)) / h``; the result
handed to the solvers is its symmetric part. The step ``h`` shrinks with the
gradient norm and the current regularization scale so that the approximation
error stays below ``κ_B √(‖∇f(x)‖^α)``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from hfnewton.errors import DimensionError
from hfnewton.settings import settings

if TYPE_CHECKING:
    from hfnewton.problems.base import ObjectiveProblem

H_MIN = settings.H_MIN


@dataclass
class FdHessianResult:
    B: np.ndarray
    h: float
    gradient_evals: int


def fd_step_size(
    kappa_b: float,
    grad_norm: float,
    alpha: float,
    n: int,
    sigma_scaled: float,
    h_min: float = H_MIN,
) -> float:
    """h = κ_B √(‖g‖^α) / (4 √n 2ⁱσ_k), never below ``h_min``."""
    if kappa_b <= 0:
        raise ValueError(f"kappa_b must be positive in finite-difference mode, got {kappa_b}")
    if n < 1 or sigma_scaled <= 0:
        raise ValueError(f"Invalid step-size arguments: n={n}, sigma_scaled={sigma_scaled}")
    if grad_norm < 0:
        raise ValueError(f"grad_norm must be nonnegative, got {grad_norm}")
    if grad_norm == 0.0:
        return h_min
    h = kappa_b * math.sqrt(grad_norm**alpha) / (4.0 * math.sqrt(n) * sigma_scaled)
    return max(h, h_min)


def forward_diff_matrix(
    problem: ObjectiveProblem, x, grad_at_x, h: float, jobs: int = 1
) -> np.ndarray:
    """Raw (unsymmetrized) forward-difference matrix; charges n gradient calls."""
    if h <= 0:
        raise ValueError(f"Finite-difference step must be positive, got {h}")
    x = np.asarray(x, dtype=float)
    grad_at_x = np.asarray(grad_at_x, dtype=float)
    n = problem.n
    if x.shape != (n,) or grad_at_x.shape != (n,):
        raise DimensionError(
            f"Expected x and grad_at_x of shape ({n},), got {x.shape} and {grad_at_x.shape}"
        )

    def column(i: int) -> np.ndarray:
        xi = x.copy()
        xi[i] += h
        return (problem.gradient(xi) - grad_at_x) / h

    if jobs > 1 and n > 1:
        with ThreadPoolExecutor(max_workers=min(jobs, n)) as pool:
            columns = list(pool.map(column, range(n)))
    else:
        columns = [column(i) for i in range(n)]
    return np.column_stack(columns)


def symmetrize(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"symmetrize needs a square matrix, got shape {A.shape}")
    return 0.5 * (A + A.T)


def fd_hessian(
    problem: ObjectiveProblem, x, grad_at_x, h: float, jobs: int = 1
) -> FdHessianResult:
    A = forward_diff_matrix(problem, x, grad_at_x, h, jobs=jobs)
    return FdHessianResult(B=symmetrize(A), h=float(h), gradient_evals=problem.n)


def fd_error_bound(n: int, H: float, h: float) -> float:
    """Spectral-norm bound √n·H·h on ‖B − ∇²f(x)‖ under a Hessian-Lipschitz constant H."""
    return math.sqrt(n) * H * h
