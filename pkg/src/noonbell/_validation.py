"""Input checks shared by the functional API and the estimators."""
import numbers

import numpy as np


def check_cutoff(nmax) -> int:
    if isinstance(nmax, bool) or not isinstance(nmax, numbers.Integral):
        raise TypeError(f"cutoff must be an integer, got {type(nmax).__name__}")
    if nmax < 2:
        raise ValueError(f"cutoff must be >= 2 to hold a two-photon state, got {nmax}")
    return int(nmax)


def check_unit_interval(value, name: str) -> float:
    value = float(value)
    if not (0.0 <= value <= 1.0):
        raise ValueError(f"{name} must lie in [0, 1], got {value}")
    return value


def check_threshold(x0, name: str = "x0") -> float:
    x0 = float(x0)
    if not np.isfinite(x0) or x0 < 0:
        raise ValueError(f"{name} must be a finite non-negative number, got {x0}")
    return x0


def check_photon_threshold(n0) -> int:
    if isinstance(n0, bool) or not isinstance(n0, numbers.Integral) or n0 < 0:
        raise ValueError(f"n0 must be a non-negative integer, got {n0!r}")
    return int(n0)


def check_grid(values, name: str, strictly_increasing: bool = True) -> np.ndarray:
    arr = np.asarray(values, dtype=float).ravel()
    if arr.size == 0:
        raise ValueError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    if strictly_increasing and np.any(np.diff(arr) <= 0):
        raise ValueError(f"{name} must be strictly increasing")
    return arr
