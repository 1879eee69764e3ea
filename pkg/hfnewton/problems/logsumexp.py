"""Smoothed maximum f(x) = β·log Σᵢ exp((aᵢᵀx − bᵢ)/β)."""
from __future__ import annotations

import numpy as np
from scipy.special import logsumexp, softmax

from hfnewton.errors import DimensionError
from hfnewton.problems.base import ObjectiveProblem
from hfnewton.schemas import ProblemSpec


class LogSumExpProblem(ObjectiveProblem):
    kind = "logsumexp"

    def __init__(self, A: np.ndarray, b: np.ndarray, beta: float, seed: int | None = None):
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float)
        if A.ndim != 2 or b.shape != (A.shape[0],):
            raise DimensionError(f"A must be m x n and b of length m, got {A.shape} and {b.shape}")
        if beta <= 0:
            raise ValueError(f"beta must be positive, got {beta}")
        super().__init__(A.shape[1])
        self.A = A
        self.b = b
        self.beta = float(beta)
        self.m = A.shape[0]
        self.seed = seed

    def describe(self) -> str:
        return f"logsumexp(n={self.n}, m={self.m}, beta={self.beta:.4g})"

    def spec(self) -> ProblemSpec | None:
        if self.seed is None:
            return None
        return ProblemSpec(kind="logsumexp", n=self.n, m=self.m, beta=self.beta, seed=self.seed)

    def _scaled(self, x: np.ndarray) -> np.ndarray:
        return (self.A @ x - self.b) / self.beta

    def softmax_weights(self, x: np.ndarray) -> np.ndarray:
        """Weights p ≥ 0, Σp = 1, with ∇f(x) = Aᵀp."""
        return softmax(self._scaled(self._check_point(x)))

    def _value(self, x):
        # logsumexp subtracts the largest exponent before exponentiating
        return self.beta * logsumexp(self._scaled(x))

    def _gradient(self, x):
        return self.A.T @ softmax(self._scaled(x))

    def _hessian(self, x):
        p = softmax(self._scaled(x))
        Ap = self.A.T @ p
        H = (self.A.T * p) @ self.A - np.outer(Ap, Ap)
        H /= self.beta
        return 0.5 * (H + H.T)


def make_logsumexp(n: int, m: int, beta: float, seed: int = 0) -> LogSumExpProblem:
    """Random instance with i.i.d. standard normal A and b, reproducible from ``seed``."""
    if n < 1 or m < 1:
        raise ValueError(f"n and m must be positive, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n))
    b = rng.standard_normal(m)
    return LogSumExpProblem(A, b, beta, seed=seed)
