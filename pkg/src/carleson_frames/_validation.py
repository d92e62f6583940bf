"""Small argument checks shared across modules."""

import os
import numbers

import numpy as np

DEFAULT_TOL = float(os.environ.get("CARLESON_DEFAULT_TOL", "1e-12"))


def check_int(value, name, minimum=0):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise TypeError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_open_unit(value, name):
    value = float(value)
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must lie in (0, 1), got {value}")
    return value


def as_vector(x, name, dtype=complex):
    arr = np.asarray(x, dtype=dtype)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def wrap_angle(theta):
    """Map angles into [-pi, pi)."""
    theta = np.asarray(theta, dtype=float)
    out = np.mod(theta + np.pi, 2 * np.pi) - np.pi
    return out
