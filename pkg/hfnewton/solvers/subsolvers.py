"""
Subproblem solvers.

``solve_regularized_direct`` and ``solve_regularized_cg`` compute the
regularized Newton step from ``(B + λI) s = −g``; the cubic solver minimizes
the cubic-regularized model used by the CNM-FD baseline.

Residuals are always taken as ``r = (B + λI) s + g``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from hfnewton.errors import DimensionError, FactorizationError
from hfnewton.settings import settings

EXACT_RTOL = 1e-10
CG_FLOOR = 1e-12


@dataclass
class RegularizedStepResult:
    s: np.ndarray
    residual_norm: float
    inner_iters: int
    satisfied: bool
    negative_curvature: bool = False
    # q(s_j) = gᵀs_j + ½ s_jᵀ(B + λI)s_j for s_0 = 0, s_1, ...
    model_values: list[float] = field(default_factory=list)


@dataclass
class CubicStepResult:
    y: np.ndarray
    model_value: float
    model_grad_norm: float
    iters: int
    satisfied: bool
    monotone: bool = True
    diverged: bool = False


def _check_system(B, lam: float, g) -> tuple[np.ndarray, np.ndarray]:
    B = np.asarray(B, dtype=float)
    g = np.asarray(g, dtype=float)
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    if B.ndim != 2 or B.shape != (g.size, g.size):
        raise DimensionError(f"Matrix shape {B.shape} does not match gradient of size {g.size}")
    return B, g


def cg_tolerance(theta: float, gnorm: float, snorm: float) -> float:
    """Residual level accepted by CG: θ·min{‖g‖, ‖s‖}, never below the exact-solve floor."""
    return max(theta * min(gnorm, snorm), CG_FLOOR * max(1.0, gnorm))


def solve_regularized_direct(B, lam: float, g) -> RegularizedStepResult:
    """Solve (B + λI)s = −g by Cholesky factorization."""
    B, g = _check_system(B, lam, g)
    M = B + lam * np.eye(g.size)
    try:
        factor = linalg.cho_factor(M)
        s = linalg.cho_solve(factor, -g)
    except linalg.LinAlgError as e:
        raise FactorizationError(f"B + {lam:.3e} I is not positive definite: {e}") from e
    if not np.all(np.isfinite(s)):
        raise FactorizationError(f"Non-finite solution for lambda={lam:.3e}")
    residual = float(np.linalg.norm(M @ s + g))
    gnorm = float(np.linalg.norm(g))
    return RegularizedStepResult(
        s=s,
        residual_norm=residual,
        inner_iters=0,
        satisfied=residual <= EXACT_RTOL * max(1.0, gnorm),
    )


def solve_regularized_cg(
    B, lam: float, g, theta: float, max_inner: int | None = None
) -> RegularizedStepResult:
    """Conjugate gradients on (B + λI)s = −g from s₀ = 0.

    Stops as soon as ‖(B + λI)s + g‖ ≤ θ·min{‖g‖, ‖s‖} (or the 1e-12 floor),
    checked after every iteration and confirmed on the true residual.
    Non-positive curvature returns immediately with ``negative_curvature``.
    """
    B, g = _check_system(B, lam, g)
    if not 0.0 <= theta < 1.0:
        raise ValueError(f"theta must lie in [0, 1), got {theta}")
    n = g.size
    if max_inner is None:
        max_inner = settings.CG_CAP_FACTOR * n
    gnorm = float(np.linalg.norm(g))
    s = np.zeros(n)
    if gnorm == 0.0:
        return RegularizedStepResult(
            s=s, residual_norm=0.0, inner_iters=0, satisfied=True, model_values=[0.0]
        )

    def apply(v: np.ndarray) -> np.ndarray:
        return B @ v + lam * v

    r = g.copy()
    p = -r
    rr = float(r @ r)
    model_values = [0.0]
    iters = 0
    while iters < max_inner:
        Ap = apply(p)
        curvature = float(p @ Ap)
        if curvature <= 0.0 or not np.isfinite(curvature):
            return RegularizedStepResult(
                s=s,
                residual_norm=float(np.sqrt(rr)),
                inner_iters=iters,
                satisfied=False,
                negative_curvature=True,
                model_values=model_values,
            )
        step = rr / curvature
        s = s + step * p
        r = r + step * Ap
        iters += 1
        model_values.append(0.5 * float(g @ s) + 0.5 * float(s @ r))

        rr_new = float(r @ r)
        if np.sqrt(rr_new) <= cg_tolerance(theta, gnorm, float(np.linalg.norm(s))):
            r_true = apply(s) + g
            true_norm = float(np.linalg.norm(r_true))
            if true_norm <= cg_tolerance(theta, gnorm, float(np.linalg.norm(s))):
                return RegularizedStepResult(
                    s=s,
                    residual_norm=true_norm,
                    inner_iters=iters,
                    satisfied=True,
                    model_values=model_values,
                )
            # drift: restart from the true residual
            r = r_true
            rr = float(r @ r)
            p = -r
            continue
        p = -r + (rr_new / rr) * p
        rr = rr_new

    return RegularizedStepResult(
        s=s,
        residual_norm=float(np.linalg.norm(apply(s) + g)),
        inner_iters=iters,
        satisfied=False,
        model_values=model_values,
    )


def cubic_model(f_xt: float, g, B, m_coeff: float, d) -> tuple[float, np.ndarray]:
    """Value and gradient of f + gᵀd + ½dᵀBd + (M/6)‖d‖³ at the displacement d."""
    Bd = B @ d
    dnorm = float(np.linalg.norm(d))
    value = f_xt + float(g @ d) + 0.5 * float(d @ Bd) + m_coeff / 6.0 * dnorm**3
    grad = g + Bd + 0.5 * m_coeff * dnorm * d
    return value, grad


def solve_cubic_gd(
    f_xt: float,
    g,
    B,
    m_coeff: float,
    x_t,
    theta_bar: float,
    max_inner: int | None = None,
) -> CubicStepResult:
    """Gradient descent on the cubic model from y₀ = x_t − g.

    Step size 1/(‖B‖_F + M‖y − x_t‖). Stops when M(y) ≤ f(x_t) and
    ‖∇M(y)‖ ≤ θ̄·min{‖y − x_t‖², ‖g‖}.
    """
    if m_coeff <= 0:
        raise ValueError(f"Cubic coefficient must be positive, got {m_coeff}")
    g = np.asarray(g, dtype=float)
    B = np.asarray(B, dtype=float)
    x_t = np.asarray(x_t, dtype=float)
    if max_inner is None:
        max_inner = settings.CUBIC_GD_CAP
    gnorm = float(np.linalg.norm(g))
    b_fro = float(np.linalg.norm(B, "fro"))

    d = -g.copy()
    value, grad = cubic_model(f_xt, g, B, m_coeff, d)
    monotone = True
    iters = 0
    while True:
        if not (np.isfinite(value) and np.all(np.isfinite(grad))):
            return CubicStepResult(
                y=x_t + d,
                model_value=float(value),
                model_grad_norm=float("inf"),
                iters=iters,
                satisfied=False,
                monotone=monotone,
                diverged=True,
            )
        grad_norm = float(np.linalg.norm(grad))
        dnorm = float(np.linalg.norm(d))
        if value <= f_xt and grad_norm <= theta_bar * min(dnorm**2, gnorm):
            return CubicStepResult(
                y=x_t + d,
                model_value=value,
                model_grad_norm=grad_norm,
                iters=iters,
                satisfied=True,
                monotone=monotone,
            )
        if iters >= max_inner:
            break
        denom = b_fro + m_coeff * dnorm
        step = 1.0 / denom if denom > 0 else 1.0
        d = d - step * grad
        new_value, grad = cubic_model(f_xt, g, B, m_coeff, d)
        if new_value > value + 1e-12 * max(1.0, abs(value)):
            monotone = False
        value = new_value
        iters += 1

    return CubicStepResult(
        y=x_t + d,
        model_value=value,
        model_grad_norm=float(np.linalg.norm(grad)),
        iters=iters,
        satisfied=False,
        monotone=monotone,
    )
