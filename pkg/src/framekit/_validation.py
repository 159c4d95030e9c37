"""Input validation helpers shared by the functional API and the estimators."""

import numbers

import numpy as np

from .exceptions import InvalidInput


def check_vectors(X, *, name="vectors", allow_empty=False):
    """Return ``X`` as a 2-d complex array of shape ``(n_vectors, ambient_dim)``.

    Real input is embedded into the complex field. A 1-d input is read as a
    single vector. Non-finite entries raise :class:`InvalidInput`.
    """
    try:
        arr = np.asarray(X, dtype=np.complex128)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"{name} could not be converted to a complex array") from exc
    if arr.ndim == 1:
        arr = arr[np.newaxis, :]
    if arr.ndim != 2:
        raise InvalidInput(f"{name} must be 2-d (n_vectors, ambient_dim), got ndim={arr.ndim}")
    if arr.shape[1] < 1:
        raise InvalidInput(f"{name} must have ambient_dim >= 1")
    if arr.shape[0] < 1 and not allow_empty:
        raise InvalidInput(f"{name} must contain at least one vector")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} contains non-finite entries")
    return arr


def check_points(P, n=None, *, name="index_points"):
    """Return ``P`` as a 2-d float array of shape ``(n_points, point_dim)``."""
    try:
        arr = np.asarray(P, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise InvalidInput(f"{name} could not be converted to a float array") from exc
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr[:, np.newaxis]
    if arr.ndim != 2:
        raise InvalidInput(f"{name} must be 2-d (n_points, point_dim)")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} contains non-finite entries")
    if n is not None and arr.shape[0] != n:
        raise InvalidInput(f"{name} has {arr.shape[0]} rows, expected {n}")
    return arr


def check_positive(value, name, *, strict=True):
    if not isinstance(value, numbers.Real) or not np.isfinite(value):
        raise InvalidInput(f"{name} must be a finite real number, got {value!r}")
    if strict and value <= 0:
        raise InvalidInput(f"{name} must be > 0, got {value!r}")
    if not strict and value < 0:
        raise InvalidInput(f"{name} must be >= 0, got {value!r}")
    return float(value)


def check_epsilon(epsilon):
    eps = check_positive(epsilon, "epsilon")
    if eps > 1:
        raise InvalidInput(f"epsilon must lie in (0, 1], got {epsilon!r}")
    return eps


def check_indices(indices, n, *, name="indices"):
    """Return a duplicate-free int array of positions into ``range(n)``, order kept."""
    arr = np.asarray(list(indices) if not isinstance(indices, np.ndarray) else indices)
    if arr.size == 0:
        return np.zeros(0, dtype=np.int64)
    if not np.issubdtype(arr.dtype, np.integer):
        raise InvalidInput(f"{name} must be integers")
    arr = arr.astype(np.int64).ravel()
    if arr.min() < 0 or arr.max() >= n:
        raise InvalidInput(f"{name} out of range for {n} vectors")
    if np.unique(arr).size != arr.size:
        raise InvalidInput(f"{name} contains duplicates")
    return arr
