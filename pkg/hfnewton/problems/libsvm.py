"""
Reader and writer for the LIBSVM sparse text format.

Each nonempty line reads ``<label> <idx>:<val> <idx>:<val> ...`` with 1-based,
strictly increasing feature indices. Labels are mapped to {0, 1}: with two
distinct values the larger becomes 1 (so ±1 → {1, 0} and {1, 0} is kept);
a single distinct value maps to 1 when positive and 0 otherwise.
"""
from __future__ import annotations

from collections.abc import Iterable
from pathlib import Path
from typing import TextIO

import numpy as np
from loguru import logger
from scipy import sparse

from hfnewton.errors import DataError, LibsvmParseError

# Canonical file names in the LIBSVM binary-classification repository
LIBSVM_REPOSITORY = "https://www.csie.ntu.edu.tw/~cjlin/libsvmtools/datasets/binary.html"
LIBSVM_FILES = {
    "mushrooms": "mushrooms",
    "w8a": "w8a",
}


def _parse_float(token: str, line_no: int, what: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise LibsvmParseError(line_no, f"non-numeric {what} '{token}'") from None
    if not np.isfinite(value):
        raise LibsvmParseError(line_no, f"non-finite {what} '{token}'")
    return value


def map_labels(raw: np.ndarray) -> np.ndarray:
    """Map raw labels onto {0, 1}; more than two distinct values is an error."""
    distinct = np.unique(raw)
    if distinct.size > 2:
        raise ValueError(f"Expected binary labels, found {distinct.size} distinct values")
    if distinct.size == 2:
        return (raw == distinct[1]).astype(float)
    return (raw > 0).astype(float)


def parse_libsvm(
    source: TextIO | Iterable[str], n_features: int | None = None
) -> tuple[sparse.csr_matrix, np.ndarray]:
    """Parse LIBSVM text into a CSR matrix (m x n) and a {0, 1} label vector.

    ``n`` is the largest index seen, or ``n_features`` when given (which must
    not be smaller).
    """
    data: list[float] = []
    indices: list[int] = []
    indptr = [0]
    raw_labels: list[float] = []
    n_seen = 0

    for line_no, raw_line in enumerate(source, start=1):
        line = raw_line.strip()
        if not line:
            continue
        tokens = line.split()
        raw_labels.append(_parse_float(tokens[0], line_no, "label"))
        previous = 0
        for token in tokens[1:]:
            idx_text, sep, val_text = token.partition(":")
            if not sep:
                raise LibsvmParseError(line_no, f"malformed token '{token}'")
            try:
                idx = int(idx_text)
            except ValueError:
                raise LibsvmParseError(line_no, f"malformed token '{token}'") from None
            if idx < 1:
                raise LibsvmParseError(line_no, f"feature index {idx} is not 1-based")
            if idx <= previous:
                raise LibsvmParseError(
                    line_no, f"duplicate or non-increasing index {idx} after {previous}"
                )
            previous = idx
            indices.append(idx - 1)
            data.append(_parse_float(val_text, line_no, "value"))
        n_seen = max(n_seen, previous)
        indptr.append(len(indices))

    if not raw_labels:
        raise DataError("LIBSVM input contains no samples")
    n = n_seen if n_features is None else n_features
    if n < n_seen:
        raise DataError(f"n_features={n_features} is smaller than the largest index {n_seen}")

    try:
        labels = map_labels(np.asarray(raw_labels))
    except ValueError as e:
        raise DataError(str(e)) from None
    A = sparse.csr_matrix(
        (np.asarray(data, dtype=float), np.asarray(indices, dtype=np.int64), np.asarray(indptr)),
        shape=(len(raw_labels), n),
    )
    return A, labels


def dump_libsvm(A, labels, stream: TextIO) -> None:
    """Write rows of ``A`` with integer labels in LIBSVM format."""
    A = sparse.csr_matrix(A)
    labels = np.asarray(labels)
    for row in range(A.shape[0]):
        start, end = A.indptr[row], A.indptr[row + 1]
        features = " ".join(
            f"{j + 1}:{float(v)!r}"
            for j, v in zip(A.indices[start:end], A.data[start:end])
            if v != 0.0
        )
        label = f"{int(labels[row])}"
        stream.write(f"{label} {features}".rstrip() + "\n")


def load_libsvm(path: Path) -> tuple[sparse.csr_matrix, np.ndarray]:
    """Read a LIBSVM file from disk."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"Dataset file not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        A, labels = parse_libsvm(f)
    logger.info(
        f"Loaded {path.name}: m={A.shape[0]}, n={A.shape[1]}, "
        f"{int(labels.sum())} positive, {int(labels.size - labels.sum())} negative"
    )
    return A, labels
