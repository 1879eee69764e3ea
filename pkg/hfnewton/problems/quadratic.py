from __future__ import annotations

import numpy as np

from hfnewton.errors import DimensionError
from hfnewton.problems.base import ObjectiveProblem
from hfnewton.schemas import ProblemSpec


class QuadraticProblem(ObjectiveProblem):
    """f(x) = ½xᵀQx + cᵀx with symmetric positive semidefinite Q."""

    kind = "quadratic"

    def __init__(self, Q, c=None, seed: int | None = None, condition: float | None = None):
        Q = np.asarray(Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise DimensionError(f"Q must be square, got {Q.shape}")
        super().__init__(Q.shape[0])
        self.Q = 0.5 * (Q + Q.T)
        self.c = np.zeros(self.n) if c is None else np.asarray(c, dtype=float)
        if self.c.shape != (self.n,):
            raise DimensionError(f"c must have length {self.n}, got {self.c.shape}")
        self.seed = seed
        self.condition = condition

    def spec(self) -> ProblemSpec | None:
        if self.seed is None:
            return None
        return ProblemSpec(kind="quadratic", n=self.n, seed=self.seed, condition=self.condition)

    def _value(self, x):
        return 0.5 * float(x @ self.Q @ x) + float(self.c @ x)

    def _gradient(self, x):
        return self.Q @ x + self.c

    def _hessian(self, x):
        return self.Q.copy()


def make_quadratic(n: int, seed: int = 0, condition: float = 10.0) -> QuadraticProblem:
    """Random strongly convex quadratic with eigenvalues spread over [1, condition]."""
    rng = np.random.default_rng(seed)
    basis, _ = np.linalg.qr(rng.standard_normal((n, n)))
    eigenvalues = np.geomspace(1.0, condition, n)
    Q = (basis * eigenvalues) @ basis.T
    c = rng.standard_normal(n)
    return QuadraticProblem(Q, c, seed=seed, condition=condition)
