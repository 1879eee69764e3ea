"""
Comparison methods sharing the trace schema of :mod:`hfnewton.solvers.adn`.

* AdaN: regularized Newton with the exact Hessian and λ_k = √(H_k‖∇f(x_k)‖);
  H_k is doubled on rejection and halved after an accepted step.
* CNM-FD: cubic-regularized Newton on forward-difference Hessians. The cubic
  model is minimized by gradient descent; a step is accepted when the model
  overestimates f at the new point, after which σ is divided by γ.

Trace columns are reused: ``sigma_k`` holds H_k (AdaN) or σ_t (CNM-FD) and
``lambda`` holds λ_k (AdaN) or the cubic coefficient 2ⁱσ_t (CNM-FD).
"""
from __future__ import annotations

import math

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from hfnewton.errors import EvaluationError, FactorizationError, HessianUnavailableError
from hfnewton.logging_utils import SolverLoggingHook, default_hook
from hfnewton.problems.base import ObjectiveProblem
from hfnewton.settings import settings
from hfnewton.solvers.adn import MACHINE_EPS, SIGMA1_FLOOR, estimate_h0, reference_point
from hfnewton.solvers.fd_hessian import fd_hessian, fd_step_size
from hfnewton.solvers.subsolvers import solve_cubic_gd, solve_regularized_direct
from hfnewton.solvers.trace import RunResult, TraceRecorder


class AdaNConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    H0: float | None = Field(default=None, gt=0)
    eps: float = Field(default=1e-6, gt=0)
    max_outer: int = Field(default_factory=lambda: settings.DESK_MAX_OUTER, ge=0)
    seed: int = 0
    max_trials: int = Field(default_factory=lambda: settings.MAX_TRIALS, ge=1)
    f_rtol: float = Field(default=4 * MACHINE_EPS, ge=0)
    store_iterates: bool = True


class CnmFdConfig(BaseModel):
    """Cubic Newton with finite differences; σ₁ = H₀/``sigma_divisor`` when omitted."""

    model_config = ConfigDict(extra="forbid")

    sigma1: float | None = Field(default=None, gt=0)
    sigma_divisor: float = Field(default=2.0, gt=0)
    gamma: float = Field(default=3.37, gt=1)
    theta_bar: float = Field(default=2.23, gt=0)
    kappa_b: float = Field(default=1e-4, gt=0)
    alpha: float = Field(default=1.0, gt=0, le=1)
    eps: float = Field(default=1e-6, gt=0)
    max_outer: int = Field(default_factory=lambda: settings.DESK_MAX_OUTER, ge=0)
    seed: int = 0
    max_trials: int = Field(default_factory=lambda: settings.MAX_TRIALS, ge=1)
    max_inner: int = Field(default_factory=lambda: settings.CUBIC_GD_CAP, ge=1)
    fd_jobs: int = Field(default_factory=lambda: settings.FD_JOBS, ge=1)
    h_min: float = Field(default_factory=lambda: settings.H_MIN, gt=0)
    f_rtol: float = Field(default=4 * MACHINE_EPS, ge=0)
    store_iterates: bool = True


def run_adan(
    problem: ObjectiveProblem,
    x1,
    config: AdaNConfig,
    x0=None,
    hook: SolverLoggingHook | None = None,
) -> RunResult:
    if not problem.has_analytic_hessian:
        raise HessianUnavailableError(
            f"AdaN needs an analytic Hessian; {problem.describe()} has none"
        )
    hook = hook or default_hook
    name = "adan"
    x = problem._check_point(x1).copy()
    recorder = TraceRecorder(problem, x, config.store_iterates)

    H = config.H0
    h0 = None
    f_k = problem.value(x)
    g_k = problem.gradient(x)
    if H is None:
        x0 = reference_point(x, config.seed, x0)
        H = h0 = estimate_h0(problem, x0, x, hessian_mode="analytic", grad_x1=g_k)
        logger.debug(f"[{name}] estimated H0={h0:.6e}")
    H_start = H
    hook.on_run_start(solver=name, problem=problem, x1=x, config=config)

    k = 1
    message = ""
    while True:
        gnorm = float(np.linalg.norm(g_k))
        if gnorm < config.eps:
            status = "converged"
            break
        if k > config.max_outer:
            status = "max_outer"
            message = f"outer iteration cap {config.max_outer} reached"
            break
        try:
            hessian = problem.hessian(x)
        except EvaluationError as e:
            status, message = "stalled", str(e)
            break

        H_k = H
        accepted = None
        # doublings counts from 0 and is capped like the ADN trial index
        for doublings in range(config.max_trials + 1):
            recorder.n_trials += 1
            lam = math.sqrt(H * gnorm)
            try:
                s = solve_regularized_direct(hessian, lam, g_k).s
            except FactorizationError as e:
                hook.on_trial_rejected(solver=name, k=k, i=doublings, reason=str(e))
                H *= 2.0
                continue
            # only sufficient decrease is tested; AdaN has no gradient-control test
            x_plus = x + s
            snorm = float(np.linalg.norm(s))
            try:
                f_plus = problem.value(x_plus)
            except EvaluationError as e:
                f_plus, reason = math.inf, str(e)
            else:
                reason = f"insufficient decrease (f+={f_plus:.6e}, f={f_k:.6e})"
            if f_plus <= f_k - 0.5 * lam * snorm**2 + config.f_rtol * max(1.0, abs(f_k)):
                accepted = (doublings, lam, snorm, x_plus, f_plus)
                break
            hook.on_trial_rejected(solver=name, k=k, i=doublings, reason=reason)
            H *= 2.0
        if accepted is None:
            status = "stalled"
            message = f"no acceptable step among trials i <= {config.max_trials} at k={k}"
            break

        doublings, lam, snorm, x_plus, f_plus = accepted
        try:
            g_plus = problem.gradient(x_plus)
        except EvaluationError as e:
            status, message = "stalled", str(e)
            break
        record = recorder.step(
            k=k,
            i_k=doublings,
            sigma_k=H_k,
            lam=lam,
            f=f_k,
            gnorm=gnorm,
            snorm=snorm,
            x_next=x_plus,
        )
        hook.on_iteration(solver=name, record=record)
        x, f_k, g_k = x_plus, f_plus, g_plus
        # optimistic halving, undone by the doublings of the next iteration if needed
        H /= 2.0
        k += 1

    result = recorder.finish(
        k=k,
        sigma_k=H,
        f=f_k,
        gnorm=float(np.linalg.norm(g_k)),
        x_star=x,
        status=status,
        solver=name,
        message=message,
        sigma1=H_start,
        h0=h0,
    )
    hook.on_run_end(solver=name, result=result)
    return result


def run_cnm_fd(
    problem: ObjectiveProblem,
    x1,
    config: CnmFdConfig,
    x0=None,
    hook: SolverLoggingHook | None = None,
) -> RunResult:
    hook = hook or default_hook
    name = "cnm-fd"
    x = problem._check_point(x1).copy()
    recorder = TraceRecorder(problem, x, config.store_iterates)

    sigma1 = config.sigma1
    h0 = None
    f_k = problem.value(x)
    g_k = problem.gradient(x)
    if sigma1 is None:
        x0 = reference_point(x, config.seed, x0)
        h0 = estimate_h0(
            problem,
            x0,
            x,
            "finite_difference",
            config.kappa_b,
            config.alpha,
            config.h_min,
            grad_x1=g_k,
        )
        sigma1 = max(h0 / config.sigma_divisor, SIGMA1_FLOOR)
        logger.debug(f"[{name}] estimated H0={h0:.6e}, sigma1={sigma1:.6e}")
    hook.on_run_start(solver=name, problem=problem, x1=x, config=config)

    flags: list[str] = []
    sigma = sigma1
    k = 1
    message = ""
    while True:
        gnorm = float(np.linalg.norm(g_k))
        if gnorm < config.eps:
            status = "converged"
            break
        if k > config.max_outer:
            status = "max_outer"
            message = f"outer iteration cap {config.max_outer} reached"
            break

        accepted = None
        for i in range(config.max_trials + 1):
            recorder.n_trials += 1
            # cubic coefficient 2ⁱσ_t; the FD step shrinks as it grows
            coeff = 2.0**i * sigma
            h = fd_step_size(config.kappa_b, gnorm, config.alpha, problem.n, coeff, config.h_min)
            try:
                B = fd_hessian(problem, x, g_k, h, jobs=config.fd_jobs).B
            except EvaluationError as e:
                hook.on_trial_rejected(solver=name, k=k, i=i, reason=str(e))
                continue
            cubic = solve_cubic_gd(f_k, g_k, B, coeff, x, config.theta_bar, config.max_inner)
            recorder.inner_iters += cubic.iters
            if not cubic.monotone and "cubic_gd_nonmonotone" not in flags:
                logger.warning(f"[{name}] cubic model increased during gradient descent at k={k}")
                flags.append("cubic_gd_nonmonotone")
            if not cubic.satisfied:
                reason = "cubic model diverged" if cubic.diverged else "cubic solver cap reached"
                hook.on_trial_rejected(solver=name, k=k, i=i, reason=reason)
                continue
            try:
                f_y = problem.value(cubic.y)
            except EvaluationError as e:
                hook.on_trial_rejected(solver=name, k=k, i=i, reason=str(e))
                continue
            # accept once the model overestimates f at y
            if f_y <= cubic.model_value + config.f_rtol * max(1.0, abs(f_k)):
                accepted = (i, coeff, cubic, f_y)
                break
            reason = f"model underestimates f (f(y)={f_y:.6e} > M(y)={cubic.model_value:.6e})"
            hook.on_trial_rejected(solver=name, k=k, i=i, reason=reason)
        if accepted is None:
            status = "stalled"
            message = f"no acceptable step among trials i <= {config.max_trials} at k={k}"
            break

        i, coeff, cubic, f_y = accepted
        try:
            g_y = problem.gradient(cubic.y)
        except EvaluationError as e:
            status, message = "stalled", str(e)
            break
        record = recorder.step(
            k=k,
            i_k=i,
            sigma_k=sigma,
            lam=coeff,
            f=f_k,
            gnorm=gnorm,
            snorm=float(np.linalg.norm(cubic.y - x)),
            x_next=cubic.y,
        )
        hook.on_iteration(solver=name, record=record)
        x, f_k, g_k = cubic.y, f_y, g_y
        # shrink by γ but never below the initial estimate
        sigma = max(sigma1, coeff / config.gamma)
        k += 1

    result = recorder.finish(
        k=k,
        sigma_k=sigma,
        f=f_k,
        gnorm=float(np.linalg.norm(g_k)),
        x_star=x,
        status=status,
        solver=name,
        message=message,
        sigma1=sigma1,
        h0=h0,
        flags=flags,
    )
    hook.on_run_end(solver=name, result=result)
    return result
