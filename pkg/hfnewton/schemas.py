from __future__ import annotations

from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

TRACE_COLUMNS = (
    "k",
    "i_k",
    "sigma_k",
    "lambda",
    "f",
    "gnorm",
    "snorm",
    "Nk",
    "f_evals",
    "g_evals",
    "cg_iters",
    "time_ms",
)

RunStatus = Literal["converged", "max_outer", "stalled"]


class ProblemSpec(BaseModel):
    """JSON description sufficient to rebuild a benchmark instance."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["logsumexp", "logistic", "quadratic"]
    n: int | None = Field(default=None, gt=0)
    m: int | None = Field(default=None, gt=0)
    beta: float | None = Field(default=None, gt=0)
    ell: float | None = Field(default=None, ge=0)
    condition: float | None = Field(default=None, ge=1)
    seed: int = 0
    data: Path | None = None

    @model_validator(mode="after")
    def check_required_fields(self) -> ProblemSpec:
        """Each kind needs its own subset of fields."""
        if self.kind == "logsumexp" and (self.n is None or self.m is None or self.beta is None):
            raise ValueError("Configuration Error: logsumexp needs n, m and beta.")
        if self.kind == "logistic":
            if self.ell is None:
                raise ValueError("Configuration Error: logistic needs ell.")
            if self.data is None and (self.n is None or self.m is None):
                raise ValueError("Configuration Error: logistic needs data or n and m.")
        if self.kind == "quadratic" and self.n is None:
            raise ValueError("Configuration Error: quadratic needs n.")
        return self

    @property
    def problem_id(self) -> str:
        if self.kind == "logsumexp":
            return f"lse_n{self.n}_m{self.m}_b{self.beta:.4f}_s{self.seed}"
        if self.kind == "logistic" and self.data is not None:
            return f"logreg_{Path(self.data).stem}"
        if self.kind == "logistic":
            return f"logreg_n{self.n}_m{self.m}_s{self.seed}"
        return f"quad_n{self.n}_s{self.seed}"


def _csv_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(float(value))
    return repr(value)


class IterateRecord(BaseModel):
    """One trace row: the iterate x_k and the step accepted from it.

    The final row of a run describes the last iterate and has no step, so
    ``i_k``, ``lambda`` and ``snorm`` are empty there.
    """

    model_config = ConfigDict(populate_by_name=True)

    k: int
    i_k: int | None = None
    sigma_k: float
    lambda_: float | None = Field(default=None, alias="lambda")
    f: float
    gnorm: float
    snorm: float | None = None
    Nk: int
    f_evals: int
    g_evals: int
    cg_iters: int
    time_ms: float
    # diagnostics, not part of the CSV schema
    h: float | None = None
    hessian_error: float | None = None
    assumption_d_bound: float | None = None

    @property
    def has_step(self) -> bool:
        return self.lambda_ is not None and self.snorm is not None

    def csv_row(self) -> list[str]:
        values = self.model_dump(by_alias=True)
        return [_csv_value(values[c]) for c in TRACE_COLUMNS]


class RunSummary(BaseModel):
    """Summary JSON written next to every trace."""

    solver: str
    problem: str = ""
    status: RunStatus
    message: str = ""
    iterations: int
    total_trials: int
    final_f: float
    final_gnorm: float
    f_evals: int
    g_evals: int
    h_evals: int
    cg_iters: int
    wall_time_s: float
    sigma1: float | None = None
    h0: float | None = None
    sigma_max_observed: float | None = None
    sigma_max_bound: float | None = None
    flags: list[str] = Field(default_factory=list)


class ProfileTable(BaseModel):
    """Solver x problem timings with the derived performance-profile curves."""

    label: str = ""
    solvers: list[str]
    problems: list[str]
    times: list[list[float]]
    ratios: list[list[float]]
    taus: list[float]
    curves: dict[str, list[tuple[float, float]]]

    def curve_values(self, solver: str) -> list[float]:
        return [p for _, p in self.curves[solver]]


class ExperimentRow(BaseModel):
    """One line of an experiment summary table."""

    solver: str
    problem: str
    status: str
    cpu_time: float
    global_iterations: int
    total_iterations: int
    final_gnorm: float
    trace_path: str | None = None
    error: str | None = None
