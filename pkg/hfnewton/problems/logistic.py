"""ℓ2-regularized binary logistic regression."""
from __future__ import annotations

from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.special import expit

from hfnewton.errors import DimensionError
from hfnewton.problems.base import ObjectiveProblem
from hfnewton.problems.libsvm import load_libsvm
from hfnewton.schemas import ProblemSpec


class LogisticRegressionProblem(ObjectiveProblem):
    """f(x) = (1/m) Σᵢ [log(1 + exp(aᵢᵀx)) − bᵢ aᵢᵀx] + (ℓ/2)‖x‖², labels bᵢ ∈ {0, 1}.

    ``A`` may be dense or a scipy sparse matrix; products stay sparse and
    only the Hessian is densified.
    """

    kind = "logistic"

    def __init__(self, A, b, ell: float, seed: int | None = None, name: str | None = None):
        if sparse.issparse(A):
            A = sparse.csr_matrix(A, dtype=float)
        else:
            A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float)
        if A.ndim != 2 or b.shape != (A.shape[0],):
            raise DimensionError(f"A must be m x n and b of length m, got {A.shape} and {b.shape}")
        if not np.all((b == 0) | (b == 1)):
            raise ValueError("Labels must be in {0, 1}")
        if ell < 0:
            raise ValueError(f"ell must be nonnegative, got {ell}")
        super().__init__(A.shape[1])
        self.A = A
        self.b = b
        self.ell = float(ell)
        self.m = A.shape[0]
        self.seed = seed
        self.name = name

    @classmethod
    def from_libsvm(cls, path: Path, ell: float) -> LogisticRegressionProblem:
        A, labels = load_libsvm(path)
        return cls(A, labels, ell, name=Path(path).stem)

    def describe(self) -> str:
        label = self.name or "synthetic"
        return f"logistic[{label}](n={self.n}, m={self.m}, ell={self.ell:.1e})"

    def spec(self) -> ProblemSpec | None:
        if self.seed is None:
            return None
        return ProblemSpec(kind="logistic", n=self.n, m=self.m, ell=self.ell, seed=self.seed)

    def _value(self, x):
        z = self.A @ x
        # logaddexp(0, z) is log(1 + exp(z)) without overflow
        loss = np.mean(np.logaddexp(0.0, z) - self.b * z)
        return loss + 0.5 * self.ell * float(x @ x)

    def _gradient(self, x):
        residual = expit(self.A @ x) - self.b
        return self.A.T @ residual / self.m + self.ell * x

    def _hessian(self, x):
        p = expit(self.A @ x)
        w = p * (1.0 - p) / self.m
        if sparse.issparse(self.A):
            H = (self.A.T @ sparse.diags(w) @ self.A).toarray()
        else:
            H = (self.A.T * w) @ self.A
        H = 0.5 * (H + H.T)
        H[np.diag_indices_from(H)] += self.ell
        return H


def make_logistic(n: int, m: int, ell: float, seed: int = 0) -> LogisticRegressionProblem:
    """Synthetic instance: standard normal features, labels ~ Bernoulli(σ(A w))."""
    if n < 1 or m < 1:
        raise ValueError(f"n and m must be positive, got n={n}, m={m}")
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n))
    w = rng.standard_normal(n)
    b = (rng.random(m) < expit(A @ w)).astype(float)
    return LogisticRegressionProblem(A, b, ell, seed=seed)
