"""Input validation helpers shared by the public functions and estimators."""

import numbers

import numpy as np
from sklearn.utils.validation import check_array


class ConfigurationError(ValueError):
    """Raised when a parameter or input array violates its declared domain."""


def check_positive(value, name, allow_inf=False):
    if not isinstance(value, numbers.Real) or isinstance(value, bool):
        raise ConfigurationError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not value > 0 or (np.isinf(value) and not allow_inf) or np.isnan(value):
        raise ConfigurationError(f"{name} must be positive and finite, got {value!r}")
    return value


def check_int(value, name, minimum):
    if not isinstance(value, numbers.Integral) or isinstance(value, bool):
        raise ConfigurationError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigurationError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_point(x, dim, name="x"):
    """Return ``x`` as a float vector of length ``dim``."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.shape != (dim,):
        raise ConfigurationError(f"{name} must have shape ({dim},), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ConfigurationError(f"{name} must be finite")
    return arr


def check_evaluation_points(X, dim):
    """Validate an (n, 2*dim + 1) matrix of ``(x, x', tau)`` rows.

    Returns the tuple ``(x, x_prime, tau)`` of arrays with shapes
    ``(n, dim)``, ``(n, dim)`` and ``(n,)``.
    """
    X = check_array(X, ensure_2d=True, dtype=float)
    if X.shape[1] != 2 * dim + 1:
        raise ConfigurationError(
            f"expected {2 * dim + 1} columns (x, x', tau) for dimension {dim}, got {X.shape[1]}"
        )
    tau = X[:, -1]
    if np.any(tau <= 0):
        raise ConfigurationError("tau must be positive in every row")
    return X[:, :dim], X[:, dim : 2 * dim], tau


def as_points(x, dim):
    """Broadcastable (..., dim) float array view with a trailing-axis check."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] != dim:
        raise ConfigurationError(f"points must have trailing dimension {dim}, got shape {arr.shape}")
    return arr
