"""Parametric spectral shapes h_theta and their scores.

Every family is normalised so that the integral of log h over (0, pi] is
zero, which makes the innovation variance identifiable as G(pi).  New
families (Bloomfield, fractional noise, ...) plug in by subclassing
:class:`SpectralFamily` and registering under a name in ``FAMILIES``.
"""
from __future__ import annotations

import numpy as np
from scipy import integrate


class SingularityError(ValueError):
    """Raised when a spectrum or score is evaluated at its pole."""


class SpectralFamily:
    """Base class for a family lambda -> h_theta(lambda).

    Subclasses set ``name``, ``param_box`` (one closed interval per
    coordinate) and implement ``_h`` and ``_phi`` on frequencies in (0, pi].
    """

    name = "base"
    param_box: tuple[tuple[float, float], ...] = ()

    @property
    def p(self) -> int:
        return len(self.param_box)

    def check_theta(self, theta) -> np.ndarray:
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if theta.shape != (self.p,):
            raise ValueError(f"{self.name}: expected {self.p} parameters, got {theta.shape}")
        for k, (lo, hi) in enumerate(self.param_box):
            if not lo <= theta[k] <= hi:
                raise ValueError(f"{self.name}: theta[{k}]={theta[k]} outside [{lo}, {hi}]")
        return theta

    def _check_lam(self, lam, theta):
        lam = np.asarray(lam, dtype=float)
        if np.any(lam < 0) or np.any(lam > np.pi + 1e-12):
            raise ValueError("frequencies must lie in (0, pi]")
        if np.any(lam == 0):
            raise SingularityError(f"{self.name}: evaluation at frequency zero")
        return lam

    def h(self, theta, lam):
        theta = self.check_theta(theta)
        return self._h(theta, self._check_lam(lam, theta))

    def phi(self, theta, lam):
        """Score d/dtheta log h; shape ``lam.shape + (p,)``."""
        theta = self.check_theta(theta)
        lam = self._check_lam(lam, theta)
        out = self._phi(theta, lam)
        return np.asarray(out, dtype=float).reshape(lam.shape + (self.p,))

    def gamma(self, theta, lam):
        """Regressors (1, phi') stacked on the last axis."""
        ph = self.phi(theta, lam)
        return np.concatenate([np.ones(ph.shape[:-1] + (1,)), ph], axis=-1)

    def _h(self, theta, lam):
        raise NotImplementedError

    def _phi(self, theta, lam):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}()"


class WhiteNoise(SpectralFamily):
    """h = 1 with an empty parameter vector (the Up-process case)."""

    name = "white"
    param_box = ()

    def _h(self, theta, lam):
        return np.ones_like(lam)

    def _phi(self, theta, lam):
        return np.zeros(lam.shape + (0,))


class AR1(SpectralFamily):
    name = "ar1"
    param_box = ((-0.99, 0.99),)

    def _h(self, theta, lam):
        d = theta[0]
        return 1.0 / (1.0 - 2.0 * d * np.cos(lam) + d * d)

    def _phi(self, theta, lam):
        d = theta[0]
        c = np.cos(lam)
        return -2.0 * (d - c) / (1.0 - 2.0 * d * c + d * d)


class MA1(SpectralFamily):
    name = "ma1"
    param_box = ((-0.99, 0.99),)

    def _h(self, theta, lam):
        e = theta[0]
        return 1.0 - 2.0 * e * np.cos(lam) + e * e

    def _phi(self, theta, lam):
        e = theta[0]
        c = np.cos(lam)
        return 2.0 * (e - c) / (1.0 - 2.0 * e * c + e * e)


class ARFIMA(SpectralFamily):
    """ARFIMA(0, d, 0): h = |2 sin(lambda/2)|^(-2d)."""

    name = "arfima"
    param_box = ((-0.49, 0.49),)

    def _h(self, theta, lam):
        return np.abs(2.0 * np.sin(lam / 2.0)) ** (-2.0 * theta[0])

    def _phi(self, theta, lam):
        return -2.0 * np.log(np.abs(2.0 * np.sin(lam / 2.0)))


FAMILIES: dict[str, SpectralFamily] = {
    "white": WhiteNoise(),
    "ar1": AR1(),
    "ma1": MA1(),
    "arfima": ARFIMA(),
}


def get_family(family) -> SpectralFamily:
    if isinstance(family, SpectralFamily):
        return family
    try:
        return FAMILIES[family]
    except KeyError:
        raise ValueError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}") from None


def h_theta(family, theta, lam):
    return get_family(family).h(theta, lam)


def phi_theta(family, theta, lam):
    return get_family(family).phi(theta, lam)


def gamma_theta(family, theta, lam):
    return get_family(family).gamma(theta, lam)


def log_spectrum_integral(family, theta) -> float:
    """Numerical value of the integral of log h_theta over (0, pi].

    Zero for members of the normalised class; exposed so that user families
    can be checked (nothing is renormalised automatically).
    """
    fam = get_family(family)
    val, _ = integrate.quad(lambda x: np.log(fam.h(theta, x)), 0.0, np.pi,
                            limit=200, points=[1e-8])
    return float(val)


def fracdiff_coeffs(d: float, n: int) -> np.ndarray:
    """Coefficients of (1 - L)^d, i.e. Gamma(j-d) / (Gamma(-d) Gamma(j+1)).

    Built by the multiplicative recurrence so large ``n`` does not overflow.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not -0.5 < d < 0.5:
        raise ValueError(f"d={d} outside (-0.5, 0.5)")
    j = np.arange(1, n, dtype=float)
    out = np.empty(n)
    out[0] = 1.0
    out[1:] = np.cumprod((j - 1.0 - d) / j)
    return out
