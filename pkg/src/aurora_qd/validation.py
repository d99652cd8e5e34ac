"""Small input-validation helpers shared across the package."""

from __future__ import annotations

import numpy as np
from sklearn.exceptions import NotFittedError


def as_float_array(x, name="array"):
    """Convert to a float64 ndarray and reject non-finite values."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.size and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_matrix(x, n_cols=None, min_rows=1, name="X"):
    """Validate a 2-D float matrix, optionally with a fixed column count."""
    arr = as_float_array(x, name)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if n_cols is not None and arr.shape[1] != n_cols:
        raise ValueError(f"{name} must have {n_cols} columns, got {arr.shape[1]}")
    if arr.shape[0] < min_rows:
        raise ValueError(f"{name} needs at least {min_rows} rows, got {arr.shape[0]}")
    return arr


def check_vector(x, length=None, name="x"):
    arr = as_float_array(x, name)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {arr.shape}")
    if length is not None and arr.shape[0] != length:
        raise ValueError(f"{name} must have length {length}, got {arr.shape[0]}")
    return arr


def check_in_bounds(values, lower, upper, name="values"):
    """Require every column of ``values`` to lie inside [lower, upper]."""
    arr = as_float_array(values, name)
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    if np.any(arr < lower) or np.any(arr > upper):
        raise ValueError(f"{name} outside bounds [{lower}, {upper}]")
    return arr


def check_fitted(estimator, attributes):
    """Raise NotFittedError unless all fitted attributes are present."""
    missing = [a for a in attributes if getattr(estimator, a, None) is None]
    if missing:
        raise NotFittedError(
            f"{type(estimator).__name__} is not fitted yet (missing {missing}); "
            "call fit before using this method"
        )


def check_positive(value, name="value"):
    if not value > 0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value
