"""CSV matrix I/O and dataset/config loading for the CLI.

Matrices are plain comma-separated values, one row per line, no header,
written with 17 significant digits so doubles round-trip exactly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np


class CsvFormatError(ValueError):
    """Malformed CSV; carries the 1-based line and column of the offender."""

    def __init__(self, path, line: int, column: int, detail: str):
        self.line = line
        self.column = column
        super().__init__(f"{path}:{line}:{column}: {detail}")


def write_matrix(path, A: np.ndarray) -> None:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    with open(path, "w", encoding="ascii") as fh:
        for row in A:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_matrix(path) -> np.ndarray:
    """Parse a headerless numeric CSV, reporting the exact failure position."""
    rows = []
    width: Optional[int] = None
    with open(path, "r", encoding="ascii") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if width is None:
                width = len(parts)
            elif len(parts) != width:
                raise CsvFormatError(path, lineno, len(parts), f"expected {width} fields")
            vals = []
            for colno, tok in enumerate(parts, start=1):
                try:
                    vals.append(float(tok))
                except ValueError:
                    raise CsvFormatError(path, lineno, colno, f"not a number: {tok!r}") from None
            rows.append(vals)
    if not rows:
        raise CsvFormatError(path, 1, 1, "empty matrix")
    return np.array(rows, dtype=float)


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    added_intercept: bool


def load_dataset(path, y_path=None, add_intercept: bool = True) -> Dataset:
    """y from the first column (or a separate file), covariates after.

    With ``add_intercept`` a leading all-ones column is prepended unless the
    first covariate column is already constant one.
    """
    M = read_matrix(path)
    if y_path is not None:
        y = read_matrix(y_path).ravel()
        X = M
        if y.size != X.shape[0]:
            raise ValueError("y length does not match X rows")
    else:
        if M.shape[1] < 2:
            raise ValueError("need at least one covariate column after y")
        y = M[:, 0]
        X = M[:, 1:]
    added = False
    if add_intercept and not np.allclose(X[:, 0], 1.0):
        X = np.hstack([np.ones((X.shape[0], 1)), X])
        added = True
    return Dataset(X=X, y=y, added_intercept=added)


def write_rows(path, rows, header) -> None:
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.DictWriter(fh, fieldnames=header)
        w.writeheader()
        for r in rows:
            w.writerow({k: r.get(k, "") for k in header})


def load_config(path) -> dict:
    return json.loads(Path(path).read_text())
