"""
Filesystem helpers for benchmark output directories.
"""
import shutil
from pathlib import Path

from loguru import logger

from hfnewton.settings import settings

OUTPUT_SUBDIRS = ("traces", "summaries")


def clear_directory(path: Path) -> None:
    """
    Remove all files and subdirectories inside ``path``, keeping ``path`` itself.
    Failures are logged and skipped.
    """
    path = Path(path)
    if not path.exists():
        return
    for item in path.iterdir():
        try:
            if item.is_file() or item.is_symlink():
                item.unlink()
            elif item.is_dir():
                shutil.rmtree(item)
        except Exception:
            logger.exception(f"Failed to remove '{item}'")
    logger.info(f"Cleared directory: {path}")


def prepare_output_dir(out_dir: Path | None = None, clean: bool = False) -> Path:
    """
    Create an experiment directory with its ``traces/`` and ``summaries/``
    subdirectories. Defaults to ``settings.OUTPUT_ROOT``.
    """
    out_dir = Path(out_dir) if out_dir is not None else settings.OUTPUT_ROOT
    if clean:
        clear_directory(out_dir)
    for name in OUTPUT_SUBDIRS:
        (out_dir / name).mkdir(parents=True, exist_ok=True)
    return out_dir


def run_file_stem(problem_id: str, solver: str) -> str:
    return f"{problem_id}__{solver}"
