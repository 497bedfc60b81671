"""Gaussian data-generating processes for examples and Monte Carlo work.

Every path is a pure function of its :class:`DgpSpec`: innovations come from
a Philox (counter-based) stream keyed by the seed, so the same spec gives
the same series on every platform.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import linalg, signal, special

KINDS = {
    # kind: (parameter names, default burn-in)
    "iid": ((), 0),
    "ar1": (("delta",), 1000),
    "ma1": (("eta",), 500),
    "arma11": (("delta", "eta"), 1000),
    "ar2": (("delta1", "delta2"), 1000),
    "arfima0d0": (("d",), 0),
    "arfima1d0": (("delta", "d"), 1000),
}


@dataclass(frozen=True)
class DgpSpec:
    kind: str
    params: tuple = ()
    T: int = 500
    seed: int = 0
    burnin: int | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown model {self.kind!r}; choose from {sorted(KINDS)}")
        names, _ = KINDS[self.kind]
        params = tuple(float(p) for p in np.atleast_1d(np.asarray(self.params, dtype=float)))
        if len(params) != len(names):
            raise ValueError(f"{self.kind} takes parameters {names}, got {params}")
        for n, v in zip(names, params):
            if n == "d" and not -0.5 < v < 0.5:
                raise ValueError(f"d={v} outside (-0.5, 0.5)")
            if n != "d" and not -1.0 < v < 1.0:
                raise ValueError(f"{n}={v} outside (-1, 1)")
        if self.T < 1:
            raise ValueError("T must be positive")
        if self.burnin is not None and self.burnin < 0:
            raise ValueError("burn-in must be non-negative")
        object.__setattr__(self, "params", params)

    @property
    def n_burn(self) -> int:
        return KINDS[self.kind][1] if self.burnin is None else int(self.burnin)

    def param(self, name: str) -> float:
        return self.params[KINDS[self.kind][0].index(name)]


def gen_innovations(T: int, seed: int) -> np.ndarray:
    """T standard normal draws from the Philox stream keyed by ``seed``."""
    if T < 1:
        raise ValueError("T must be positive")
    return np.random.Generator(np.random.Philox(int(seed))).standard_normal(T)


def arfima_acvf(d: float, n: int) -> np.ndarray:
    """Autocovariances 0..n-1 of ARFIMA(0, d, 0) with unit innovation variance."""
    g = np.empty(n)
    g[0] = math.exp(special.gammaln(1.0 - 2.0 * d) - 2.0 * special.gammaln(1.0 - d))
    k = np.arange(1, n)
    g[1:] = g[0] * np.cumprod((k - 1.0 + d) / (k - d))
    return g


def durbin_levinson(acvf: np.ndarray):
    """Prediction coefficients and innovation variances of a stationary sequence.

    Returns ``(L, v)`` where ``L`` is unit lower triangular with
    ``(L x)_t = x_t - sum_j phi_{t,j} x_{t-j}`` and ``v[t]`` is the one-step
    prediction variance; ``L x = sqrt(v) * z`` turns white noise ``z`` into
    an exact draw.
    """
    n = acvf.size
    L = np.eye(n)
    v = np.empty(n)
    v[0] = acvf[0]
    phi = np.zeros(0)
    for t in range(1, n):
        k = (acvf[t] - phi @ acvf[t - 1:0:-1]) / v[t - 1]
        phi = np.concatenate([phi - k * phi[::-1], [k]])
        v[t] = v[t - 1] * (1.0 - k * k)
        if not v[t] > 0.0:
            raise ArithmeticError("non-positive prediction variance in Durbin-Levinson")
        L[t, :t] = -phi[::-1]
    return L, v


@lru_cache(maxsize=4)
def _arfima_factor(d: float, n: int):
    L, v = durbin_levinson(arfima_acvf(d, n))
    L.setflags(write=False)
    return L, np.sqrt(v)


def arfima_path(d: float, z: np.ndarray) -> np.ndarray:
    """Exact stationary ARFIMA(0, d, 0) path driven by standard normals ``z``."""
    L, sd = _arfima_factor(float(d), z.size)
    return linalg.solve_triangular(L, sd * z, lower=True, unit_diagonal=True, check_finite=False)


def simulate(spec: DgpSpec) -> np.ndarray:
    B = spec.n_burn
    z = gen_innovations(spec.T + B, spec.seed)
    k = spec.kind
    if k == "iid":
        x = z
    elif k == "ar1":
        x = signal.lfilter([1.0], [1.0, -spec.param("delta")], z)
    elif k == "ma1":
        x = signal.lfilter([1.0, -spec.param("eta")], [1.0], z)
    elif k == "arma11":
        x = signal.lfilter([1.0, -spec.param("eta")], [1.0, -spec.param("delta")], z)
    elif k == "ar2":
        d1, d2 = spec.params
        x = signal.lfilter([1.0], [1.0, -(d1 + d2), d1 * d2], z)
    elif k == "arfima0d0":
        x = arfima_path(spec.param("d"), z)
    else:  # arfima1d0
        x = signal.lfilter([1.0], [1.0, -spec.param("delta")], arfima_path(spec.param("d"), z))
    return np.ascontiguousarray(x[B:])


# (base family, direction) -> (dgp kind, builder of params from (theta0, perturbation))
_LOCAL = {
    ("white", "fractional"): ("arfima0d0", lambda t0, e: (e,)),
    ("white", "ma"): ("ma1", lambda t0, e: (e,)),
    ("white", "ar"): ("ar1", lambda t0, e: (e,)),
    ("ar1", "fractional"): ("arfima1d0", lambda t0, e: (t0, e)),
    ("ar1", "ma"): ("arma11", lambda t0, e: (t0, e)),
    ("ar1", "ar"): ("ar2", lambda t0, e: (t0, e)),
}


def local_alternative_spec(base_family: str, theta0, tau: float, direction: str,
                           T: int, seed: int) -> DgpSpec:
    """DGP whose spectrum departs from the null by a tau / sqrt(T) factor.

    fractional: (1-L)^{-d} with d = tau/sqrt(T); ma: an extra (1 - eta L)
    with eta = tau/sqrt(T); ar: an extra AR factor with that root.
    """
    try:
        kind, build = _LOCAL[(base_family, direction)]
    except KeyError:
        raise ValueError(f"no local alternative for base {base_family!r} "
                         f"in direction {direction!r}") from None
    t0 = float(np.atleast_1d(theta0)[0]) if base_family != "white" else 0.0
    eps = tau / math.sqrt(T)
    burn = 0 if base_family == "white" else KINDS["ar1"][1]
    try:
        return DgpSpec(kind, build(t0, eps), T, seed, burn)
    except ValueError as exc:
        raise ValueError(f"perturbation tau/sqrt(T)={eps:.4g} leaves the parameter space: {exc}") from None


def local_alternative(base_family: str, theta0, tau: float, direction: str,
                      T: int, seed: int) -> np.ndarray:
    return simulate(local_alternative_spec(base_family, theta0, tau, direction, T, seed))


def base_spec(base_family: str, theta0, T: int, seed: int) -> DgpSpec:
    """Null-model draw matching :func:`local_alternative` at tau = 0."""
    if base_family == "white":
        return DgpSpec("iid", (), T, seed)
    kind = {"ar1": "ar1", "ma1": "ma1", "arfima": "arfima0d0"}[base_family]
    return DgpSpec(kind, tuple(np.atleast_1d(theta0)), T, seed)
