"""
Objective-function abstraction shared by every solver.

An :class:`ObjectiveProblem` maps a point ``x`` of length ``n`` to the value,
gradient and (optionally) Hessian of a smooth convex function, and charges
each oracle call to thread-safe evaluation counters so finite-difference
columns may be evaluated concurrently.
"""
from __future__ import annotations

import threading
from abc import ABC, abstractmethod
from collections.abc import Callable
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from hfnewton.errors import DimensionError, EvaluationError, HessianUnavailableError
from hfnewton.schemas import ProblemSpec
from hfnewton.solvers.fd_hessian import fd_hessian


class EvaluationCounters:
    """Oracle call counters, safe to update from several threads."""

    def __init__(self):
        self._lock = threading.Lock()
        self.f_evals = 0
        self.g_evals = 0
        self.h_evals = 0

    def charge(self, order: int) -> None:
        with self._lock:
            if order == 0:
                self.f_evals += 1
            elif order == 1:
                self.g_evals += 1
            else:
                self.h_evals += 1

    def snapshot(self) -> dict[str, int]:
        with self._lock:
            return {"f_evals": self.f_evals, "g_evals": self.g_evals, "h_evals": self.h_evals}

    def reset(self) -> None:
        with self._lock:
            self.f_evals = self.g_evals = self.h_evals = 0


@dataclass
class Evaluation:
    value: float
    gradient: np.ndarray | None = None
    hessian: np.ndarray | None = None


class ObjectiveProblem(ABC):
    """Smooth convex objective with value/gradient and optional Hessian oracles."""

    kind: ClassVar[str] = "generic"
    has_analytic_hessian: ClassVar[bool] = True

    def __init__(self, n: int):
        if n < 1:
            raise DimensionError(f"Problem dimension must be positive, got {n}")
        self.n = int(n)
        self.counters = EvaluationCounters()

    @abstractmethod
    def _value(self, x: np.ndarray) -> float: ...

    @abstractmethod
    def _gradient(self, x: np.ndarray) -> np.ndarray: ...

    def _hessian(self, x: np.ndarray) -> np.ndarray:
        raise HessianUnavailableError(f"{self.describe()} has no analytic Hessian")

    def describe(self) -> str:
        return f"{self.kind}(n={self.n})"

    def spec(self) -> ProblemSpec | None:
        """Regenerating spec for synthetic instances; None for loaded data."""
        return None

    def _check_point(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.n,):
            raise DimensionError(f"Expected a point of shape ({self.n},), got {x.shape}")
        return x

    def value(self, x) -> float:
        x = self._check_point(x)
        self.counters.charge(0)
        fx = float(self._value(x))
        if not np.isfinite(fx):
            raise EvaluationError(f"Non-finite objective value at |x|={np.linalg.norm(x):.3e}")
        return fx

    def gradient(self, x) -> np.ndarray:
        x = self._check_point(x)
        self.counters.charge(1)
        gx = np.asarray(self._gradient(x), dtype=float)
        if not np.all(np.isfinite(gx)):
            raise EvaluationError(f"Non-finite gradient at |x|={np.linalg.norm(x):.3e}")
        return gx

    def hessian(self, x) -> np.ndarray:
        if not self.has_analytic_hessian:
            raise HessianUnavailableError(f"{self.describe()} has no analytic Hessian")
        x = self._check_point(x)
        self.counters.charge(2)
        hx = np.asarray(self._hessian(x), dtype=float)
        if not np.all(np.isfinite(hx)):
            raise EvaluationError(f"Non-finite Hessian at |x|={np.linalg.norm(x):.3e}")
        return hx


def evaluate(problem: ObjectiveProblem, x, order: int = 1) -> Evaluation:
    """Evaluate ``problem`` at ``x`` up to derivative ``order`` (0, 1 or 2).

    Orders are cumulative: order 1 returns the value and the gradient,
    order 2 adds the Hessian.
    """
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order}")
    if order == 2 and not problem.has_analytic_hessian:
        raise HessianUnavailableError(f"{problem.describe()} has no analytic Hessian")
    result = Evaluation(value=problem.value(x))
    if order >= 1:
        result.gradient = problem.gradient(x)
    if order == 2:
        result.hessian = problem.hessian(x)
    return result


def estimate_assumption_a_constant(
    problem: ObjectiveProblem,
    x,
    y,
    hessian: np.ndarray | None = None,
    h: float = 1e-6,
    grad_x: np.ndarray | None = None,
    grad_y: np.ndarray | None = None,
) -> float:
    """Ratio ‖∇f(y) − ∇f(x) − ∇²f(x)(y − x)‖ / ‖y − x‖².

    ``hessian`` is ∇²f(x) when the caller already has it. Otherwise the
    analytic Hessian is used, or a forward-difference one with step ``h``
    when the problem has none. Gradients already at hand can be passed in
    so they are not evaluated again.
    """
    x = problem._check_point(x)
    y = problem._check_point(y)
    d = y - x
    dist = float(np.linalg.norm(d))
    if dist == 0.0:
        raise ValueError("x and y must differ to estimate the Hessian Lipschitz constant")
    gx = problem.gradient(x) if grad_x is None else np.asarray(grad_x, dtype=float)
    if hessian is None:
        if problem.has_analytic_hessian:
            hessian = problem.hessian(x)
        else:
            hessian = fd_hessian(problem, x, gx, h).B
    gy = problem.gradient(y) if grad_y is None else np.asarray(grad_y, dtype=float)
    residual = gy - gx - hessian @ d
    return float(np.linalg.norm(residual) / dist**2)


class FunctionProblem(ObjectiveProblem):
    """Wraps plain callables, e.g. ``f(x) = x³`` in one dimension."""

    kind = "function"

    def __init__(
        self,
        n: int,
        value: Callable[[np.ndarray], float],
        gradient: Callable[[np.ndarray], np.ndarray],
        hessian: Callable[[np.ndarray], np.ndarray] | None = None,
        name: str = "function",
    ):
        super().__init__(n)
        self._value_fn = value
        self._gradient_fn = gradient
        self._hessian_fn = hessian
        self.name = name

    @property
    def has_analytic_hessian(self) -> bool:  # type: ignore[override]
        return self._hessian_fn is not None

    def describe(self) -> str:
        return f"{self.name}(n={self.n})"

    def _value(self, x):
        return self._value_fn(x)

    def _gradient(self, x):
        return np.atleast_1d(self._gradient_fn(x))

    def _hessian(self, x):
        if self._hessian_fn is None:
            return super()._hessian(x)
        return np.atleast_2d(self._hessian_fn(x))
