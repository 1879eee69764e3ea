"""
Adaptive regularized Newton method with (optionally) finite-difference Hessians.

Each outer iteration k tries the scales 2ⁱσ_k for i = i₀, i₀+1, ... and
takes the first regularized Newton step that passes both the sufficient
decrease test and the gradient-control test. The accepted scale is then
halved for the next iteration.

Four variants come from two switches on :class:`SolverConfig`:

============  ===================  ==================
name          hessian_mode         subproblem_mode
============  ===================  ==================
adn-fd        finite_difference    direct
adn-fd-inex   finite_difference    cg
adn-h         analytic             direct
adn-h-inex    analytic             cg
============  ===================  ==================
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field, model_validator

from hfnewton.errors import EvaluationError, FactorizationError
from hfnewton.logging_utils import SolverLoggingHook, default_hook
from hfnewton.problems.base import ObjectiveProblem, estimate_assumption_a_constant
from hfnewton.settings import settings
from hfnewton.solvers.fd_hessian import fd_hessian, fd_step_size
from hfnewton.solvers.subsolvers import solve_regularized_cg, solve_regularized_direct
from hfnewton.solvers.trace import RunResult, TraceRecorder

H0_FLOOR = 1e-12
SIGMA1_FLOOR = 1e-8
MACHINE_EPS = float(np.finfo(float).eps)
SIGMA_BOUND_RTOL = 1e-9


class SolverConfig(BaseModel):
    """Parameters of one adaptive regularized Newton run.

    ``sigma1=None`` means σ₁ is estimated from a pair of points before the
    first iteration.
    """

    model_config = ConfigDict(extra="forbid")

    sigma1: float | None = Field(default=None, gt=0)
    alpha: float = Field(default=1.0, gt=0, le=1)
    theta: float = Field(default=1e-6, ge=0, lt=1)
    zeta: float = Field(default=3.0, gt=2)
    kappa_b: float = Field(default=1e-4, ge=0)
    eps: float = Field(default=1e-6, gt=0)
    max_outer: int = Field(default_factory=lambda: settings.DESK_MAX_OUTER, ge=0)
    hessian_mode: Literal["finite_difference", "analytic"] = "finite_difference"
    subproblem_mode: Literal["direct", "cg"] = "direct"
    mu_floor: float = Field(default=0.0, ge=0)
    seed: int = 0
    max_trials: int = Field(default_factory=lambda: settings.MAX_TRIALS, ge=1)
    max_inner: int | None = Field(default=None, ge=1)
    fd_jobs: int = Field(default_factory=lambda: settings.FD_JOBS, ge=1)
    h_min: float = Field(default_factory=lambda: settings.H_MIN, gt=0)
    f_rtol: float = Field(default=4 * MACHINE_EPS, ge=0)
    track_hessian_error: bool = False
    store_iterates: bool = True

    @model_validator(mode="after")
    def check_kappa(self) -> SolverConfig:
        if self.hessian_mode == "finite_difference" and self.kappa_b <= 0:
            raise ValueError("Configuration Error: finite-difference mode needs kappa_b > 0.")
        return self

    @property
    def variant_name(self) -> str:
        base = "adn-fd" if self.hessian_mode == "finite_difference" else "adn-h"
        return base + ("-inex" if self.subproblem_mode == "cg" else "")


def lambda_value(
    sigma_scaled: float,
    grad_norm: float,
    alpha: float,
    theta: float,
    zeta: float,
    mu_floor: float = 0.0,
) -> float:
    """λ = max{(2(1+θ))^{α/2} √(2ⁱσ_k ‖g‖^α), ζθ, 2(1+θ)μ}."""
    if sigma_scaled <= 0:
        raise ValueError(f"sigma_scaled must be positive, got {sigma_scaled}")
    main = (2.0 * (1.0 + theta)) ** (alpha / 2.0) * math.sqrt(sigma_scaled * grad_norm**alpha)
    return max(main, zeta * theta, 2.0 * (1.0 + theta) * mu_floor)


def initial_trial_index(sigma_k: float, sigma1: float) -> int:
    """Smallest i ≥ 0 with 2ⁱσ_k ≥ 2σ₁."""
    if sigma_k <= 0 or sigma1 <= 0:
        raise ValueError(f"sigma values must be positive, got {sigma_k} and {sigma1}")
    i = 0
    while 2.0**i * sigma_k < 2.0 * sigma1:
        i += 1
    return i


def sigma_hat_1(H: float, g: float, kappa_b: float, zeta: float, alpha: float) -> float:
    """Scale above which the gradient-control test is guaranteed."""
    inner = kappa_b**2 + 4.0 * (zeta - 1.0) / zeta * H * g ** (1.0 - alpha)
    return (zeta / (2.0 * (zeta - 1.0)) * (kappa_b + math.sqrt(inner))) ** 2


def sigma_hat_2(H: float, g: float, kappa_b: float, zeta: float, alpha: float) -> float:
    """Scale above which the sufficient decrease test is guaranteed."""
    inner = kappa_b**2 + 4.0 * H / 3.0 * g ** (1.0 - alpha) * (0.5 - 1.0 / zeta)
    return ((kappa_b + math.sqrt(inner)) / (1.0 - 2.0 / zeta)) ** 2


def sigma1_init(H0: float, g: float, kappa_b: float, zeta: float, alpha: float) -> float:
    if zeta <= 2:
        raise ValueError(f"zeta must exceed 2, got {zeta}")
    value = max(
        4.0 * kappa_b**2,
        sigma_hat_1(H0, g, kappa_b, zeta, alpha),
        sigma_hat_2(H0, g, kappa_b, zeta, alpha),
    )
    return max(value, SIGMA1_FLOOR)


def sigma_max_bound(
    sigma1: float, H: float, M_hat: float, kappa_b: float, zeta: float, alpha: float
) -> float:
    """Upper bound 2·max{4κ², σ̂₁(M̂), σ̂₂(M̂)} + σ₁ on every σ_k."""
    return 2.0 * max(
        4.0 * kappa_b**2,
        sigma_hat_1(H, M_hat, kappa_b, zeta, alpha),
        sigma_hat_2(H, M_hat, kappa_b, zeta, alpha),
    ) + sigma1


def reference_point(x1, seed: int, x0=None) -> np.ndarray:
    """Companion point for the H0 estimate.

    Drawn from a child stream of ``seed`` so it never coincides with a start
    point drawn from ``default_rng(seed)``; a draw equal to ``x1`` is redrawn.
    """
    x1 = np.asarray(x1, dtype=float)
    if x0 is not None and not np.array_equal(np.asarray(x0, dtype=float), x1):
        return np.asarray(x0, dtype=float)
    rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
    point = rng.standard_normal(x1.shape)
    while np.array_equal(point, x1):
        point = rng.standard_normal(x1.shape)
    return point


def estimate_h0(
    problem: ObjectiveProblem,
    x0,
    x1,
    hessian_mode: str = "finite_difference",
    kappa_b: float = 1e-4,
    alpha: float = 1.0,
    h_min: float | None = None,
    grad_x1: np.ndarray | None = None,
) -> float:
    """Initial Hessian-Lipschitz estimate from the pair (x0, x1), floored at 1e-12.

    Pass ``grad_x1`` when ∇f(x1) is already known.
    """
    x0 = np.asarray(x0, dtype=float)
    g0 = problem.gradient(x0)
    if hessian_mode == "analytic":
        hessian = problem.hessian(x0)
    else:
        h = fd_step_size(
            kappa_b, float(np.linalg.norm(g0)), alpha, problem.n, 1.0,
            settings.H_MIN if h_min is None else h_min,
        )
        hessian = fd_hessian(problem, x0, g0, h).B
    H0 = estimate_assumption_a_constant(
        problem, x0, x1, hessian=hessian, grad_x=g0, grad_y=grad_x1
    )
    return max(H0, H0_FLOOR)


@dataclass
class TrialOutcome:
    accepted: bool
    lam: float
    step_norm: float
    reason: str = ""
    x_plus: np.ndarray | None = None
    f_plus: float | None = None
    grad_plus: np.ndarray | None = None
    h: float | None = None
    cg_iters: int = 0
    hessian_error: float | None = None
    assumption_d_bound: float | None = None
    curvature: float = 0.0


def inner_trial(
    x_k,
    grad_k,
    sigma_k: float,
    i: int,
    config: SolverConfig,
    problem: ObjectiveProblem,
    f_k: float | None = None,
    hessian_k: np.ndarray | None = None,
) -> TrialOutcome:
    """One attempt at scale 2ⁱσ_k: build B, solve for s, run both acceptance tests.

    Numerical failures (factorization, negative curvature, CG cap, overflow)
    come back as rejections.
    """
    x_k = np.asarray(x_k, dtype=float)
    grad_k = np.asarray(grad_k, dtype=float)
    gnorm = float(np.linalg.norm(grad_k))
    sigma_scaled = 2.0**i * sigma_k
    lam = lambda_value(
        sigma_scaled, gnorm, config.alpha, config.theta, config.zeta, config.mu_floor
    )

    h = None
    if config.hessian_mode == "finite_difference":
        h = fd_step_size(config.kappa_b, gnorm, config.alpha, problem.n, sigma_scaled, config.h_min)
        try:
            B = fd_hessian(problem, x_k, grad_k, h, jobs=config.fd_jobs).B
        except EvaluationError as e:
            return TrialOutcome(False, lam, 0.0, reason=f"finite differences failed: {e}", h=h)
    else:
        B = problem.hessian(x_k) if hessian_k is None else hessian_k

    cg_iters = 0
    if config.subproblem_mode == "direct":
        try:
            step = solve_regularized_direct(B, lam, grad_k)
        except FactorizationError as e:
            return TrialOutcome(False, lam, 0.0, reason=str(e), h=h)
    else:
        step = solve_regularized_cg(B, lam, grad_k, config.theta, config.max_inner)
        cg_iters = step.inner_iters
        if step.negative_curvature:
            reason = "non-positive curvature in CG"
            return TrialOutcome(False, lam, 0.0, reason=reason, h=h, cg_iters=cg_iters)
        if not step.satisfied:
            reason = "CG iteration cap reached"
            return TrialOutcome(False, lam, 0.0, reason=reason, h=h, cg_iters=cg_iters)

    s = step.s
    snorm = float(np.linalg.norm(s))
    x_plus = x_k + s
    if f_k is None:
        f_k = problem.value(x_k)
    try:
        f_plus = problem.value(x_plus)
    except EvaluationError as e:
        return TrialOutcome(False, lam, snorm, reason=str(e), h=h, cg_iters=cg_iters)

    Bs = B @ s
    curvature = 0.0
    if snorm > 0 and math.isfinite(f_plus):
        # lower estimate of H from the cubic upper bound on f
        excess = f_plus - f_k - float(grad_k @ s) - 0.5 * float(s @ Bs)
        curvature = 3.0 * max(excess, 0.0) / snorm**3

    slack = config.f_rtol * max(1.0, abs(f_k))
    if f_plus > f_k - 0.5 * lam * snorm**2 + slack:
        reason = f"insufficient decrease (f+={f_plus:.6e}, f={f_k:.6e})"
        return TrialOutcome(
            False, lam, snorm, reason=reason, h=h, cg_iters=cg_iters, curvature=curvature
        )
    try:
        grad_plus = problem.gradient(x_plus)
    except EvaluationError as e:
        return TrialOutcome(False, lam, snorm, reason=str(e), h=h, cg_iters=cg_iters)
    gnorm_plus = float(np.linalg.norm(grad_plus))
    if snorm > 0:
        curvature = max(curvature, float(np.linalg.norm(grad_plus - grad_k - Bs)) / snorm**2)
    if gnorm_plus > 2.0 * lam * snorm:
        reason = f"gradient control failed (|g+|={gnorm_plus:.3e} > {2 * lam * snorm:.3e})"
        return TrialOutcome(
            False, lam, snorm, reason=reason, h=h, cg_iters=cg_iters, curvature=curvature
        )

    outcome = TrialOutcome(
        True,
        lam,
        snorm,
        x_plus=x_plus,
        f_plus=f_plus,
        grad_plus=grad_plus,
        h=h,
        cg_iters=cg_iters,
        curvature=curvature,
    )
    tracked = config.track_hessian_error and config.hessian_mode == "finite_difference"
    if tracked and problem.has_analytic_hessian:
        outcome.hessian_error = float(np.linalg.norm(B - problem.hessian(x_k), 2))
        outcome.assumption_d_bound = config.kappa_b * math.sqrt(gnorm**config.alpha)
    return outcome


def run(
    problem: ObjectiveProblem,
    x1,
    config: SolverConfig,
    x0=None,
    hook: SolverLoggingHook | None = None,
) -> RunResult:
    """Run the method from ``x1`` until ‖∇f(x_k)‖ < ε, the outer cap, or a stall."""
    hook = hook or default_hook
    name = config.variant_name
    x = problem._check_point(x1).copy()
    recorder = TraceRecorder(problem, x, config.store_iterates)

    h0 = None
    sigma1 = config.sigma1
    f_k = problem.value(x)
    g_k = problem.gradient(x)
    if sigma1 is None:
        x0 = reference_point(x, config.seed, x0)
        h0 = estimate_h0(
            problem,
            x0,
            x,
            config.hessian_mode,
            config.kappa_b,
            config.alpha,
            config.h_min,
            grad_x1=g_k,
        )
        g1 = float(np.linalg.norm(g_k))
        sigma1 = sigma1_init(h0, g1, config.kappa_b, config.zeta, config.alpha)
        logger.debug(f"[{name}] estimated H0={h0:.6e}, sigma1={sigma1:.6e}")
    hook.on_run_start(solver=name, problem=problem, x1=x, config=config)

    # running lower estimates of H and of max ‖∇f‖ feed the σ upper bound
    h_seen = 0.0 if h0 is None else h0
    m_seen = 0.0
    flags: list[str] = []
    sigma = sigma1
    k = 1
    message = ""
    while True:
        gnorm = float(np.linalg.norm(g_k))
        m_seen = max(m_seen, gnorm)
        if gnorm < config.eps:
            status = "converged"
            break
        if k > config.max_outer:
            status = "max_outer"
            message = f"outer iteration cap {config.max_outer} reached"
            break

        hessian_k = None
        if config.hessian_mode == "analytic":
            try:
                hessian_k = problem.hessian(x)
            except EvaluationError as e:
                status, message = "stalled", str(e)
                break

        i = initial_trial_index(sigma, sigma1)
        outcome = None
        # max_trials caps the index i itself, not the number of attempts
        while i <= config.max_trials:
            recorder.n_trials += 1
            outcome = inner_trial(x, g_k, sigma, i, config, problem, f_k=f_k, hessian_k=hessian_k)
            recorder.inner_iters += outcome.cg_iters
            h_seen = max(h_seen, outcome.curvature)
            if outcome.accepted:
                break
            hook.on_trial_rejected(solver=name, k=k, i=i, reason=outcome.reason)
            i += 1
        if outcome is None or not outcome.accepted:
            status = "stalled"
            message = f"no acceptable step among trials i <= {config.max_trials} at k={k}"
            if outcome is not None:
                message += f"; last: {outcome.reason}"
            break

        record = recorder.step(
            k=k,
            i_k=i,
            sigma_k=sigma,
            lam=outcome.lam,
            f=f_k,
            gnorm=gnorm,
            snorm=outcome.step_norm,
            x_next=outcome.x_plus,
            h=outcome.h,
            hessian_error=outcome.hessian_error,
            assumption_d_bound=outcome.assumption_d_bound,
        )
        hook.on_iteration(solver=name, record=record)

        x, f_k, g_k = outcome.x_plus, outcome.f_plus, outcome.grad_plus
        sigma = 2.0 ** (i - 1) * sigma
        k += 1
        bound = sigma_max_bound(
            sigma1, h_seen, m_seen, config.kappa_b, config.zeta, config.alpha
        )
        if sigma > bound * (1.0 + SIGMA_BOUND_RTOL):
            logger.warning(f"[{name}] sigma={sigma:.6e} exceeds its upper bound {bound:.6e}")
            flags.append("sigma_upper_bound_exceeded")
            status = "stalled"
            message = f"sigma {sigma:.6e} above upper bound {bound:.6e} at k={k}"
            break

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
        sigma_bound=sigma_max_bound(
            sigma1, h_seen, m_seen, config.kappa_b, config.zeta, config.alpha
        ),
    )
    hook.on_run_end(solver=name, result=result)
    return result
