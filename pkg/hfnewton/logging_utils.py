import sys
from contextlib import contextmanager
from datetime import datetime
from pathlib import Path

from loguru import logger

from hfnewton.settings import settings

LOG_FORMAT = "{time:YYYY-MM-DD HH:mm:ss.SSS} - {level} - {name} - {message}"


def setup_logging(level: str | None = None, log_file: Path | None = None):
    """Configures the logging system.

    Replaces every loguru sink with a console sink (stderr, so CLI output on
    stdout stays clean) and, when ``LOG_TO_FILE`` is set or ``log_file`` is
    given, a file sink under the logs directory.
    """
    level = (level or settings.LOG_LEVEL).upper()
    logger.remove()
    logger.add(sys.stderr, level=level, format=LOG_FORMAT)

    if log_file is None and settings.LOG_TO_FILE:
        settings.ensure_directories()
        log_file = settings.LOGS_DIR / f"{datetime.now().strftime('%Y%m%d_%H%M%S')}.log"
    if log_file is not None:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        logger.add(log_file, level=level, format=LOG_FORMAT, encoding="utf-8")
        logger.info(f"Log file set: {log_file}")

    logger.info("Logging system initialized.")
    return logger


@contextmanager
def run_log_file(path: Path, level: str = "DEBUG"):
    """Attach a file sink for the duration of one solver run."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    sink_id = logger.add(path, level=level, format=LOG_FORMAT, encoding="utf-8")
    try:
        yield path
    finally:
        logger.remove(sink_id)


class SolverLoggingHook:
    """Receives solver lifecycle callbacks and logs them.

    Solvers call the hook at run start, after every accepted iteration, on
    every rejected inner trial and at run end. Subclass it to collect extra
    diagnostics; the base implementation only logs.
    """

    def __init__(self, name: str = "solver"):
        self.name = name

    def on_run_start(self, *, solver: str, problem, x1, config) -> None:
        logger.info(f"=== Run Start: {solver} on {problem.describe()} (n={problem.n}) ===")
        logger.debug(f"Config: {config}")

    def on_iteration(self, *, solver: str, record) -> None:
        logger.debug(
            f"[{solver}] k={record.k} i_k={record.i_k} sigma={record.sigma_k:.3e} "
            f"lambda={record.lambda_:.3e} f={record.f:.12e} |g|={record.gnorm:.3e} "
            f"|s|={record.snorm:.3e} Nk={record.Nk}"
        )

    def on_trial_rejected(self, *, solver: str, k: int, i: int, reason: str) -> None:
        logger.debug(f"[{solver}] k={k} trial i={i} rejected: {reason}")

    def on_run_end(self, *, solver: str, result) -> None:
        summary = result.summary()
        message = (
            f"=== Run End: {solver} status={summary.status} k={summary.iterations} "
            f"Nk={summary.total_trials} |g|={summary.final_gnorm:.3e} "
            f"time={summary.wall_time_s:.3f}s ==="
        )
        if summary.status == "stalled":
            logger.warning(message + f" ({result.message})")
        else:
            logger.info(message)


default_hook = SolverLoggingHook()
