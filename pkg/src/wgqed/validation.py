"""Input checks shared by the estimator front end."""

from __future__ import annotations

import numpy as np
from sklearn.utils.validation import check_array


def check_detunings(x, name: str = "detunings") -> np.ndarray:
    """1-D finite float array of detunings in units of gamma."""
    arr = check_array(np.atleast_1d(np.asarray(x, dtype=float)), ensure_2d=False, dtype=float,
                      input_name=name)
    if arr.ndim != 1:
        arr = arr.ravel()
    if arr.size == 0:
        raise ValueError(f"{name}: frequency grid is empty")
    return arr


def check_positions(x, fiber_radius: float, rho: float, phi0: float = 0.0) -> np.ndarray:
    """Accept z positions (N,) or cylindrical (N, 3) rows; return (N, 3)."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    arr = check_array(arr, ensure_min_samples=0, dtype=float, input_name="positions")
    if arr.shape[1] == 1:
        arr = np.column_stack([np.full(len(arr), rho), np.full(len(arr), phi0), arr[:, 0]])
    elif arr.shape[1] != 3:
        raise ValueError("positions must be z values (N,) or (rho, phi, z) rows (N, 3)")
    if np.any(arr[:, 0] <= fiber_radius):
        raise ValueError("all atoms must sit outside the fiber (rho > a)")
    return arr


def check_complex_1d(y, name: str = "y") -> np.ndarray:
    arr = np.asarray(y)
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError(f"{name}: expected a non-empty 1-D array")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name}: contains NaN or inf")
    return arr
