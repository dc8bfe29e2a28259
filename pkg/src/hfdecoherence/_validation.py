"""Input checks shared by the estimators and dataset readers."""
from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array, check_consistent_length


def check_times(X, *, name="X") -> np.ndarray:
    """Accept times as shape (n,) or (n, 1) and return a flat float array."""
    arr = check_array(X, ensure_2d=False, dtype=np.float64, input_name=name)
    if arr.ndim == 2:
        if arr.shape[1] != 1:
            raise ValueError(f"{name} must have a single column of times, got shape {arr.shape}")
        arr = arr[:, 0]
    if np.any(arr < 0):
        raise ValueError(f"{name} contains negative times")
    return arr


def check_series(X, y, sample_weight=None, *, min_samples=1):
    t = check_times(X)
    y = check_array(y, ensure_2d=False, dtype=np.float64, input_name="y")
    if y.ndim != 1:
        raise ValueError(f"y must be one-dimensional, got shape {y.shape}")
    check_consistent_length(t, y)
    if t.size < min_samples:
        raise ValueError(f"need at least {min_samples} samples, got {t.size}")
    if sample_weight is None:
        w = np.ones_like(y)
    else:
        w = check_array(sample_weight, ensure_2d=False, dtype=np.float64, input_name="sample_weight")
        check_consistent_length(t, w)
        if np.any(w < 0):
            raise ValueError("sample_weight must be non-negative")
    order = np.argsort(t, kind="stable")
    return t[order], y[order], w[order]


def check_probability(p, name="p") -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p}")
    return p
