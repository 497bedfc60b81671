"""Time-domain innovation filters with zero pre-sample values."""
from __future__ import annotations

import numpy as np
from scipy import signal

from .models import fracdiff_coeffs


def _check(x, value, bound, name):
    if not -bound < value < bound:
        raise ValueError(f"{name}={value} outside (-{bound}, {bound})")
    return np.asarray(x, dtype=float)


def ar1_residuals(x, delta: float) -> np.ndarray:
    """x(t) - delta x(t-1), with x(0) = 0."""
    x = _check(x, delta, 1.0, "delta")
    out = x.copy()
    out[1:] -= delta * x[:-1]
    return out


def ma1_residuals(x, eta: float) -> np.ndarray:
    """Invert x(t) = e(t) - eta e(t-1): e(t) = x(t) + eta e(t-1), with e(0) = 0.

    The sign matches the MA(1) spectrum |1 - eta e^{i lambda}|^2 used for
    fitting, so the filter recovers the innovations at the true eta.
    """
    x = _check(x, eta, 1.0, "eta")
    return signal.lfilter([1.0], [1.0, -eta], x)


def arfima_residuals(x, d: float) -> np.ndarray:
    """sum_{j<t} theta(j, d) x(t-j): fractional differencing truncated at the sample start."""
    x = _check(x, d, 0.5, "d")
    return np.convolve(x, fracdiff_coeffs(d, x.size))[:x.size]


RESIDUAL_FILTERS = {"ar1": ar1_residuals, "ma1": ma1_residuals, "arfima": arfima_residuals}


def innovations(x, family: str, theta) -> np.ndarray:
    """Residuals of the fitted model; white noise passes through unchanged."""
    if family == "white":
        return np.asarray(x, dtype=float)
    return RESIDUAL_FILTERS[family](x, float(np.atleast_1d(theta)[0]))
