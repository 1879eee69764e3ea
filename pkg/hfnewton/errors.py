"""Exception hierarchy shared by the problems, solvers and bench harness."""

import numpy as np


class HfNewtonError(Exception):
    """Base class for all errors raised by hfnewton."""


class DimensionError(HfNewtonError, ValueError):
    """A vector or matrix does not have the expected shape."""


class HessianUnavailableError(HfNewtonError, ValueError):
    """Second-order information was requested from a first-order oracle."""


class EvaluationError(HfNewtonError, ArithmeticError):
    """An oracle returned a non-finite value (usually overflow)."""


class FactorizationError(HfNewtonError, np.linalg.LinAlgError):
    """The regularized system could not be factorized as positive definite."""


class DataError(HfNewtonError):
    """A dataset is missing or cannot be read."""


class LibsvmParseError(DataError, ValueError):
    """Malformed LIBSVM input; ``line`` is the 1-based offending line."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
