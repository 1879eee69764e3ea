"""Builds problems from specs and solver callables from names."""
from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from hfnewton.logging_utils import SolverLoggingHook
from hfnewton.problems.base import ObjectiveProblem
from hfnewton.problems.logistic import LogisticRegressionProblem, make_logistic
from hfnewton.problems.logsumexp import make_logsumexp
from hfnewton.problems.quadratic import make_quadratic
from hfnewton.schemas import ProblemSpec
from hfnewton.settings import settings
from hfnewton.solvers.adn import SolverConfig, run
from hfnewton.solvers.baselines import AdaNConfig, CnmFdConfig, run_adan, run_cnm_fd
from hfnewton.solvers.trace import RunResult

SOLVER_NAMES = ("adn-fd", "adn-fd-inex", "adn-h", "adn-h-inex", "adan", "cnm-fd")
FD_SET = ("adn-fd", "cnm-fd", "adn-fd-inex")
EXACT_SET = ("adan", "adn-h", "adn-h-inex")


@dataclass
class SolverRunner:
    """A named solver bound to its configuration."""

    name: str
    config: SolverConfig | AdaNConfig | CnmFdConfig
    run_fn: Callable[..., RunResult]

    def __call__(
        self, problem: ObjectiveProblem, x1, x0=None, hook: SolverLoggingHook | None = None
    ) -> RunResult:
        result = self.run_fn(problem, x1, self.config, x0=x0, hook=hook)
        result.solver = self.name
        return result


class BenchParams(BaseModel):
    """Per-problem parameters shared by every solver of a comparison."""

    model_config = ConfigDict(extra="forbid")

    alpha: float = Field(default=1.0, gt=0, le=1)
    zeta: float = Field(default=3.0, gt=2)
    theta: float = Field(default=1e-6, ge=0, lt=1)
    kappa_b: float = Field(default=1e-4, gt=0)
    eps: float = Field(default=1e-6, gt=0)
    max_outer: int = Field(default_factory=lambda: settings.DESK_MAX_OUTER, ge=0)
    gamma: float = Field(default=3.37, gt=1)
    theta_bar: float = Field(default=2.23, gt=0)
    sigma_divisor: float = Field(default=2.0, gt=0)
    seed: int = 0
    fd_jobs: int = Field(default_factory=lambda: settings.FD_JOBS, ge=1)


class SolverFactory:
    @staticmethod
    def config_for(
        name: str, params: BenchParams, overrides: dict[str, Any] | None = None
    ) -> SolverConfig | AdaNConfig | CnmFdConfig:
        """Solver configuration for ``name`` wired from ``params``; ``overrides`` win."""
        overrides = dict(overrides or {})
        if name == "adan":
            data = {"eps": params.eps, "max_outer": params.max_outer, "seed": params.seed}
            return AdaNConfig(**{**data, **overrides})
        if name == "cnm-fd":
            data = {
                "sigma_divisor": params.sigma_divisor,
                "gamma": params.gamma,
                "theta_bar": params.theta_bar,
                "kappa_b": params.kappa_b,
                "alpha": params.alpha,
                "eps": params.eps,
                "max_outer": params.max_outer,
                "seed": params.seed,
                "fd_jobs": params.fd_jobs,
            }
            return CnmFdConfig(**{**data, **overrides})
        if name not in SOLVER_NAMES:
            raise ValueError(f"Unknown solver '{name}'. Choose from: {', '.join(SOLVER_NAMES)}")
        finite_difference = name.startswith("adn-fd")
        inexact = name.endswith("-inex")
        # κ_B only bounds FD Hessian error; θ only the CG residual
        data = {
            "alpha": params.alpha,
            "theta": params.theta if inexact else 0.0,
            "zeta": params.zeta,
            "kappa_b": params.kappa_b if finite_difference else 0.0,
            "eps": params.eps,
            "max_outer": params.max_outer,
            "seed": params.seed,
            "fd_jobs": params.fd_jobs,
            "hessian_mode": "finite_difference" if finite_difference else "analytic",
            "subproblem_mode": "cg" if inexact else "direct",
        }
        return SolverConfig(**{**data, **overrides})

    @staticmethod
    def create(
        name: str, params: BenchParams, overrides: dict[str, Any] | None = None
    ) -> SolverRunner:
        config = SolverFactory.config_for(name, params, overrides)
        run_fn = {AdaNConfig: run_adan, CnmFdConfig: run_cnm_fd}.get(type(config), run)
        return SolverRunner(name=name, config=config, run_fn=run_fn)


class ProblemFactory:
    @staticmethod
    def from_spec(spec: ProblemSpec) -> ObjectiveProblem:
        if spec.kind == "logsumexp":
            return make_logsumexp(spec.n, spec.m, spec.beta, spec.seed)
        if spec.kind == "logistic":
            if spec.data is not None:
                return LogisticRegressionProblem.from_libsvm(spec.data, spec.ell)
            return make_logistic(spec.n, spec.m, spec.ell, spec.seed)
        return make_quadratic(spec.n, spec.seed, spec.condition or 10.0)

    @staticmethod
    def initial_points(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
        """Seeded standard-normal (x0, x1); x0 only feeds the H0 estimate."""
        rng = np.random.default_rng(seed)
        x0 = rng.standard_normal(n)
        x1 = rng.standard_normal(n)
        return x0, x1
