"""Run results and their on-disk forms (trace CSV, summary JSON)."""
from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from hfnewton.schemas import TRACE_COLUMNS, IterateRecord, RunStatus, RunSummary


@dataclass
class RunResult:
    x_star: np.ndarray
    trace: list[IterateRecord]
    status: RunStatus
    solver: str
    problem: str = ""
    sigma1: float | None = None
    h0: float | None = None
    iterates: list[np.ndarray] | None = None
    wall_time: float = 0.0
    h_evals: int = 0
    sigma_bound: float | None = None
    flags: list[str] = field(default_factory=list)
    message: str = ""

    @property
    def iterations(self) -> int:
        """Number of accepted steps."""
        return sum(1 for r in self.trace if r.has_step)

    @property
    def total_trials(self) -> int:
        return self.trace[-1].Nk if self.trace else 0

    @property
    def final_gnorm(self) -> float:
        return self.trace[-1].gnorm

    def summary(self) -> RunSummary:
        last = self.trace[-1]
        return RunSummary(
            solver=self.solver,
            problem=self.problem,
            status=self.status,
            message=self.message,
            iterations=self.iterations,
            total_trials=last.Nk,
            final_f=last.f,
            final_gnorm=last.gnorm,
            f_evals=last.f_evals,
            g_evals=last.g_evals,
            h_evals=self.h_evals,
            cg_iters=last.cg_iters,
            wall_time_s=self.wall_time,
            sigma1=self.sigma1,
            h0=self.h0,
            sigma_max_observed=max(r.sigma_k for r in self.trace),
            sigma_max_bound=self.sigma_bound,
            flags=list(self.flags),
        )


class TraceRecorder:
    """Accumulates trace rows for one run and assembles the :class:`RunResult`.

    Evaluation counts in the rows are relative to the moment the recorder was
    created, so set-up work such as the H0 estimate is included.
    """

    def __init__(self, problem, x1: np.ndarray, store_iterates: bool = True):
        self.problem = problem
        self.start = time.perf_counter()
        self._base = problem.counters.snapshot()
        self.trace: list[IterateRecord] = []
        self.iterates = [np.array(x1, dtype=float)] if store_iterates else None
        self.n_trials = 0
        self.inner_iters = 0

    def _counts(self) -> dict[str, int]:
        now = self.problem.counters.snapshot()
        return {key: now[key] - self._base[key] for key in now}

    def _elapsed_ms(self) -> float:
        return (time.perf_counter() - self.start) * 1e3

    def step(
        self,
        *,
        k: int,
        i_k: int,
        sigma_k: float,
        lam: float,
        f: float,
        gnorm: float,
        snorm: float,
        x_next: np.ndarray,
        **diagnostics,
    ) -> IterateRecord:
        counts = self._counts()
        record = IterateRecord(
            k=k,
            i_k=i_k,
            sigma_k=sigma_k,
            lambda_=lam,
            f=f,
            gnorm=gnorm,
            snorm=snorm,
            Nk=self.n_trials,
            f_evals=counts["f_evals"],
            g_evals=counts["g_evals"],
            cg_iters=self.inner_iters,
            time_ms=self._elapsed_ms(),
            **diagnostics,
        )
        self.trace.append(record)
        if self.iterates is not None:
            self.iterates.append(np.array(x_next, dtype=float))
        return record

    def finish(
        self,
        *,
        k: int,
        sigma_k: float,
        f: float,
        gnorm: float,
        x_star: np.ndarray,
        status: RunStatus,
        solver: str,
        message: str = "",
        sigma1: float | None = None,
        h0: float | None = None,
        flags: list[str] | None = None,
        sigma_bound: float | None = None,
    ) -> RunResult:
        counts = self._counts()
        self.trace.append(
            IterateRecord(
                k=k,
                sigma_k=sigma_k,
                f=f,
                gnorm=gnorm,
                Nk=self.n_trials,
                f_evals=counts["f_evals"],
                g_evals=counts["g_evals"],
                cg_iters=self.inner_iters,
                time_ms=self._elapsed_ms(),
            )
        )
        return RunResult(
            x_star=x_star,
            trace=self.trace,
            status=status,
            solver=solver,
            problem=self.problem.describe(),
            sigma1=sigma1,
            h0=h0,
            iterates=self.iterates,
            wall_time=time.perf_counter() - self.start,
            h_evals=counts["h_evals"],
            sigma_bound=sigma_bound,
            flags=list(flags or []),
            message=message,
        )


def _write_rows(trace: list[IterateRecord], stream) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(TRACE_COLUMNS)
    for record in trace:
        writer.writerow(record.csv_row())


def trace_csv_text(trace: list[IterateRecord]) -> str:
    buffer = io.StringIO()
    _write_rows(trace, buffer)
    return buffer.getvalue()


def write_trace_csv(trace: list[IterateRecord], path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        _write_rows(trace, f)
    return path


def read_trace_csv(path: Path) -> list[IterateRecord]:
    """Parse a trace written by :func:`write_trace_csv`."""
    records = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        for row in csv.DictReader(f):
            records.append(IterateRecord(**{k: (v if v != "" else None) for k, v in row.items()}))
    return records


def write_summary_json(result: RunResult, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(result.summary().model_dump(mode="json"), f, indent=2)
    return path
