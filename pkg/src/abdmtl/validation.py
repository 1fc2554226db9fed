"""Input validation helpers shared by the functional API and the estimators."""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, EmptySample, LengthMismatch


def check_binary_labels(labels, name: str = "labels") -> tuple[int, ...]:
    out = tuple(int(v) for v in labels)
    for v in out:
        if v not in (0, 1):
            raise ValueError(f"{name} must be binary 0/1, found {v!r}")
    return out


def check_features(X, name: str = "X") -> np.ndarray:
    """Coerce to a 2-D float array of shape (n, k) with finite entries."""
    arr = np.asarray(X, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be 2-D (n, k), got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise EmptySample(f"{name} must be non-empty, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_same_length(a_len: int, b_len: int, what: str = "sequences") -> int:
    if a_len != b_len:
        raise LengthMismatch(f"{what} have different lengths: {a_len} != {b_len}")
    return a_len


def check_unit_interval(arr, name: str = "values") -> np.ndarray:
    arr = np.asarray(arr, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ValueError(f"{name} entries must lie in [0, 1]")
    return arr
