"""Periodograms on the positive Fourier frequencies 2*pi*j/T, j = 1..T//2."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# limit of T * sum(w^4) / (sum(w^2))^2 for the full cosine taper
TAPER_P4SQ = 35.0 / 18.0
MIN_LENGTH = 8


def as_series(x, min_length: int = MIN_LENGTH) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("time series must be one-dimensional")
    if x.size < min_length:
        raise ValueError(f"time series too short: T={x.size} < {min_length}")
    if not np.all(np.isfinite(x)):
        raise ValueError("time series contains non-finite values")
    return x


@dataclass(frozen=True)
class PeriodogramGrid:
    """Ordinates I(lambda_j) for j = 1..T_tilde (Nyquist included for even T)."""

    T: int
    ordinates: np.ndarray
    tapered: bool = False

    @property
    def T_tilde(self) -> int:
        return self.T // 2

    @property
    def taper_norm(self) -> float:
        return TAPER_P4SQ if self.tapered else 1.0

    @property
    def freqs(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(1, self.T_tilde + 1) / self.T

    def scaled(self, a: float) -> "PeriodogramGrid":
        return PeriodogramGrid(self.T, self.ordinates * a, self.tapered)


def dft_direct(x, T_tilde: int | None = None) -> np.ndarray:
    """sum_t x(t) exp(i t lambda_j), t = 1..T, by explicit summation."""
    x = np.asarray(x, dtype=float)
    T = x.size
    if T_tilde is None:
        T_tilde = T // 2
    t = np.arange(1, T + 1)
    out = np.empty(T_tilde, dtype=complex)
    # chunked over frequencies to bound memory at O(T * chunk)
    chunk = max(1, 2**20 // max(T, 1))
    for start in range(0, T_tilde, chunk):
        j = np.arange(start + 1, min(T_tilde, start + chunk) + 1)
        out[start:start + j.size] = np.exp(1j * np.outer(j, t) * (2.0 * np.pi / T)) @ x
    return out


def _dft_modulus2(x: np.ndarray) -> np.ndarray:
    # |sum_{t=1}^T x_t e^{i t lam_j}| equals |fft(x)[j]|: phase and conjugation drop out
    T = x.size
    return np.abs(np.fft.rfft(x)[1:T // 2 + 1]) ** 2


def periodogram(x) -> PeriodogramGrid:
    """Raw periodogram (2 pi T)^{-1} |sum_t x(t) e^{i t lambda_j}|^2."""
    x = as_series(x)
    T = x.size
    return PeriodogramGrid(T, _dft_modulus2(x) / (2.0 * np.pi * T), tapered=False)


def cosine_taper(T: int) -> np.ndarray:
    t = np.arange(1, T + 1)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * t / T))


def tapered_periodogram(x) -> PeriodogramGrid:
    """Full-cosine-tapered periodogram |sum w x e^{i t lam}|^2 / (2 pi sum w^2)."""
    x = as_series(x)
    w = cosine_taper(x.size)
    return PeriodogramGrid(x.size, _dft_modulus2(w * x) / (2.0 * np.pi * np.sum(w * w)),
                           tapered=True)
