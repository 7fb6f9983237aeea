"""Input checks shared by the estimator wrappers."""

from __future__ import annotations

from typing import List

import numpy as np

from .harness.dataset import DatasetRecord, parse_record


def check_records(X) -> List[DatasetRecord]:
    """Accept records, dicts in the dataset schema, or a mix of both."""
    if isinstance(X, (str, bytes, dict)) or not hasattr(X, "__iter__"):
        raise TypeError("X must be a sequence of problem records")
    out = []
    for i, x in enumerate(X):
        if isinstance(x, DatasetRecord):
            out.append(x)
        elif isinstance(x, dict):
            try:
                out.append(parse_record(x))
            except ValueError as exc:
                raise ValueError(f"X[{i}]: {exc}") from None
        else:
            raise TypeError(f"X[{i}] is {type(x).__name__}, expected a DatasetRecord or dict")
    if not out:
        raise ValueError("X is empty")
    return out


def check_labels(y, n: int) -> np.ndarray:
    y = np.asarray(y, dtype=object)
    if y.ndim != 1 or len(y) != n:
        raise ValueError(f"y must be 1-d with {n} entries, got shape {y.shape}")
    for v in y:
        if not isinstance(v, (bool, np.bool_)):
            raise ValueError(f"labels must be booleans, got {v!r}")
    return y.astype(bool)


def with_labels(records: List[DatasetRecord], y) -> List[DatasetRecord]:
    """Labels passed to ``score`` take precedence over those in the records."""
    from dataclasses import replace
    return [replace(r, label=bool(v)) for r, v in zip(records, y)]
