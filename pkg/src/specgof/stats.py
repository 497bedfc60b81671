"""Test statistics on alpha/beta paths and their reference distributions.

Omnibus functionals (sup |beta|, mean beta^2) are referred to the laws of
sup|B| and int B^2 for a standard Brownian motion B on [0, 1]; the simple
hypothesis benchmark uses the Brownian bridge.  Critical values come from a
seeded simulation shipped in ``data/critvals.json``; p-values use the
closed-form series where one is available.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Callable

import numpy as np
from scipy import integrate, special

from .gof import ProcessPath
from .models import get_family

FUNCTIONALS = ("sup_abs_brownian", "int_sq_brownian", "int_sq_bridge")
# expected overshoot of a continuous maximum over its random-walk skeleton,
# in units of sqrt(step): -zeta(1/2) / sqrt(2 pi)
_SIEGMUND = 0.5825971579390106
DEFAULT_LEVELS = tuple(np.round(np.arange(1, 1000) / 1000.0, 3)) + (0.9995, 0.9999)


class DegenerateSeriesError(ValueError):
    pass


# -- special functions -------------------------------------------------------

def norm_cdf(x):
    return special.ndtr(x)


def norm_sf(x):
    return special.ndtr(-np.asarray(x, dtype=float))


def norm_ppf(q):
    return special.ndtri(q)


def chi2_sf(x, df):
    return special.chdtrc(df, x)


def chi2_ppf(q, df):
    return special.chdtri(df, 1.0 - q)


def sup_abs_brownian_cdf(a: float) -> float:
    """P(sup_{[0,1]} |B| <= a) by the reflection-principle series."""
    if a <= 0:
        return 0.0
    if a < 1.0:
        # eigen-expansion, fast for small a
        k = np.arange(0, 60)
        terms = (-1.0) ** k / (2 * k + 1) * np.exp(-((2 * k + 1) ** 2) * np.pi ** 2 / (8 * a * a))
        return float(4.0 / np.pi * terms.sum())
    k = np.arange(-20, 21)
    terms = (-1.0) ** k * (norm_cdf((2 * k + 1) * a) - norm_cdf((2 * k - 1) * a))
    return float(terms.sum())


def sup_abs_brownian_sf(a: float) -> float:
    if a <= 0:
        return 1.0
    if a < 1.0:
        return 1.0 - sup_abs_brownian_cdf(a)
    # tail form of the reflection series; the k and -k terms coincide
    k = np.arange(1, 21)
    pairs = norm_sf((2 * k - 1) * a) - norm_sf((2 * k + 1) * a)
    sf = 2.0 * norm_sf(a) + 2.0 * np.sum((-1.0) ** (k + 1) * pairs)
    return float(min(max(sf, 0.0), 1.0))


def int_sq_brownian_cdf(x: float) -> float:
    """P(int_0^1 B^2 <= x) = sqrt(2) sum_k binom(-1/2, k) erfc((4k+1) / (2 sqrt(2x)))."""
    if x <= 0:
        return 0.0
    k = np.arange(0, 400)
    coef = special.binom(-0.5, k)
    val = math.sqrt(2.0) * np.sum(coef * special.erfc((4 * k + 1) / (2.0 * math.sqrt(2.0 * x))))
    return float(min(max(val, 0.0), 1.0))


# -- critical value tables ---------------------------------------------------

@dataclass
class CriticalValueTable:
    functional: str
    quantiles: dict[float, float]
    paths: int
    grid: int
    seed: int
    version: int = 1

    def __post_init__(self):
        if self.functional not in FUNCTIONALS:
            raise ValueError(f"unknown functional {self.functional!r}")
        self.quantiles = {float(k): float(v) for k, v in sorted(
            ((float(k), float(v)) for k, v in self.quantiles.items()))}

    @property
    def levels(self) -> np.ndarray:
        return np.array(list(self.quantiles))

    @property
    def values(self) -> np.ndarray:
        return np.array(list(self.quantiles.values()))

    def quantile(self, level: float) -> float:
        if level in self.quantiles:
            return self.quantiles[level]
        return float(np.interp(level, self.levels, self.values))

    def cdf(self, x: float) -> float:
        """Interpolated distribution function, clamped to the tabulated levels."""
        return float(np.interp(x, self.values, self.levels))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["quantiles"] = {f"{k:g}": v for k, v in self.quantiles.items()}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CriticalValueTable":
        return cls(d["functional"], {float(k): v for k, v in d["quantiles"].items()},
                   int(d["paths"]), int(d["grid"]), int(d["seed"]), int(d.get("version", 1)))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def _block_functionals(paths: int, grid: int, seed: int, block: int):
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, block])))
    dt = 1.0 / grid
    B = np.cumsum(rng.standard_normal((paths, grid)), axis=1)
    B *= math.sqrt(dt)
    sup = np.abs(B).max(axis=1) + _SIEGMUND * math.sqrt(dt)
    sq = B * B
    int_b = dt * (sq[:, :-1].sum(axis=1) + 0.5 * sq[:, -1])
    t = np.arange(1, grid + 1) * dt
    W = B - t * B[:, -1:]
    int_w = dt * np.einsum("ij,ij->i", W[:, :-1], W[:, :-1])
    return sup, int_b, int_w


def simulate_functionals(paths: int, grid: int, seed: int, block_size: int = 4000) -> dict[str, np.ndarray]:
    """Draw sup|B|, int B^2 and int (B - tB(1))^2 on a ``grid``-step random walk.

    Path blocks have their own seed (``seed``, block index), so the result
    does not depend on how blocks are scheduled.  The supremum carries the
    Siegmund continuity correction for the discrete skeleton; the integrals
    use the trapezoid rule, which is unbiased for both means.
    """
    out = {f: np.empty(paths) for f in FUNCTIONALS}
    for b, start in enumerate(range(0, paths, block_size)):
        n = min(block_size, paths - start)
        for f, v in zip(FUNCTIONALS, _block_functionals(n, grid, seed, b)):
            out[f][start:start + n] = v
    return out


def brownian_quantiles(functional: str, levels=DEFAULT_LEVELS, paths: int = 10**6,
                       grid: int = 1000, seed: int = 20050601) -> CriticalValueTable:
    if paths < 10**5 or grid < 10**3:
        raise ValueError("need paths >= 1e5 and grid >= 1e3")
    if functional not in FUNCTIONALS:
        raise ValueError(f"unknown functional {functional!r}")
    sample = simulate_functionals(paths, grid, seed)[functional]
    return table_from_sample(functional, sample, levels, grid, seed)


def table_from_sample(functional, sample, levels, grid, seed) -> CriticalValueTable:
    levels = np.asarray(sorted(levels), dtype=float)
    q = np.quantile(sample, levels)
    q = np.maximum.accumulate(q)
    return CriticalValueTable(functional, dict(zip(levels.tolist(), q.tolist())),
                              int(sample.size), int(grid), int(seed))


@lru_cache(maxsize=None)
def _bundled() -> dict[str, CriticalValueTable]:
    text = resources.files("specgof").joinpath("data/critvals.json").read_text()
    return {t["functional"]: CriticalValueTable.from_dict(t) for t in json.loads(text)["tables"]}


def load_tables(path=None) -> dict[str, CriticalValueTable]:
    """Tables from ``path`` (a single table or a bundle), else the bundled set."""
    if path is None:
        return dict(_bundled())
    with open(path) as fh:
        data = json.load(fh)
    tables = dict(_bundled())
    for t in data.get("tables", [data]):
        tab = CriticalValueTable.from_dict(t)
        tables[tab.functional] = tab
    return tables


def get_table(functional: str, tables=None) -> CriticalValueTable:
    return (tables or _bundled())[functional]


# -- reports -----------------------------------------------------------------

@dataclass
class TestReport:
    statistic_name: str
    value: float
    critical_value: float
    p_value: float
    reject: bool
    level: float = 0.05
    extra: dict = field(default_factory=dict)

    __test__ = False  # not a pytest class

    def to_dict(self) -> dict:
        d = {"statistic": self.statistic_name, "value": float(self.value),
             "critical_value": float(self.critical_value), "p_value": float(self.p_value),
             "reject": bool(self.reject), "level": float(self.level)}
        if self.extra:
            d.update({k: float(v) if isinstance(v, (float, np.floating)) else v
                      for k, v in self.extra.items()})
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def summary(self) -> str:
        verdict = "REJECT" if self.reject else "accept"
        return (f"{self.statistic_name}: {self.value:.4f} (crit {self.critical_value:.4f}, "
                f"p={self.p_value:.4f}) {verdict} at {100 * self.level:g}%")


def _clip_p(p) -> float:
    return float(min(max(p, 0.0), 1.0))


def _path_values(path, beta_only=True) -> np.ndarray:
    if isinstance(path, ProcessPath):
        if beta_only and not path.is_beta:
            raise ValueError("statistic needs a beta path")
        vals = path.values
    else:
        vals = np.asarray(path, dtype=float)
    if vals.size == 0:
        raise ValueError("empty process path")
    return vals


def ks_stat(beta, level: float = 0.05, tables=None) -> TestReport:
    """max_m |beta_m| against sup |B|."""
    v = float(np.max(np.abs(_path_values(beta))))
    crit = get_table("sup_abs_brownian", tables).quantile(1.0 - level)
    return TestReport("ks", v, crit, _clip_p(sup_abs_brownian_sf(v)), v > crit, level)


def cvm_stat(beta, level: float = 0.05, tables=None) -> TestReport:
    """mean of beta_m^2 against int_0^1 B^2."""
    v = float(np.mean(_path_values(beta) ** 2))
    crit = get_table("int_sq_brownian", tables).quantile(1.0 - level)
    return TestReport("cvm", v, crit, _clip_p(1.0 - int_sq_brownian_cdf(v)), v > crit, level)


def cvm_simple(alpha, level: float = 0.05, tables=None) -> TestReport:
    """mean of alpha_m^2 (simple hypothesis) against the Brownian-bridge functional."""
    if isinstance(alpha, ProcessPath) and alpha.kind != "alpha":
        raise ValueError("cvm_simple needs an alpha path")
    v = float(np.mean(_path_values(alpha, beta_only=False) ** 2))
    tab = get_table("int_sq_bridge", tables)
    crit = tab.quantile(1.0 - level)
    return TestReport("c0", v, crit, _clip_p(1.0 - tab.cdf(v)), v > crit, level)


def ortho_components(beta, n: int) -> np.ndarray:
    """Discrete Kac-Siegert coordinates of a beta path, j = 1..n."""
    if not 1 <= n <= 64:
        raise ValueError("n must be in 1..64")
    vals = _path_values(beta)
    Tb = vals.size
    k = np.arange(1, Tb + 1)
    jh = np.arange(1, n + 1) - 0.5
    S = np.sin(np.outer(jh, k) * (np.pi / Tb))
    return np.sqrt(2.0) * jh * (np.pi / Tb) * (S @ vals)


def smooth_stat(beta, n: int, level: float = 0.05) -> TestReport:
    """Sum of the first n squared orthogonal components, chi-square(n) under the null."""
    if n < 1:
        raise ValueError("n must be >= 1")
    m = ortho_components(beta, n)
    v = float(m @ m)
    crit = float(chi2_ppf(1.0 - level, n))
    return TestReport(f"w{n}", v, crit, _clip_p(chi2_sf(v, n)), v > crit, level)


# -- local-alternative directions ---------------------------------------------

DIRECTIONS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "fractional": lambda lam: -2.0 * np.log(np.abs(2.0 * np.sin(lam / 2.0))),
    "ma": lambda lam: -2.0 * np.cos(lam),
    "ar": lambda lam: 2.0 * np.cos(lam),
}


@dataclass(frozen=True)
class DriftPath:
    lam: np.ndarray
    values: np.ndarray
    truncated_at: float


def drift_L(family, theta, direction, n: int = 1024) -> DriftPath:
    """Limiting drift of the transformed process along a local alternative.

    On the grid lambda_i = i pi / n, integrates
    l - gamma' (int_x^pi gamma gamma')^{-1} int_x^pi gamma l
    from 0, with the right-hand integrals accumulated from pi downward.
    Near pi the cross-product degenerates; the outer integral stops at
    pi (1 - (p+1)/n) and L is held constant beyond.
    """
    fam = get_family(family)
    l_fun = DIRECTIONS[direction] if isinstance(direction, str) else direction
    lam = np.pi * np.arange(1, n + 1) / n
    dx = np.pi / n
    lv = np.asarray(l_fun(lam), dtype=float)
    mean_l = _cached_mean(direction) if isinstance(direction, str) else _quad_mean(l_fun)
    if abs(mean_l) > 1e-3:
        raise ValueError(f"direction must integrate to zero over (0, pi]; got {mean_l:.3g}")
    gam = fam.gamma(theta, lam)
    q = gam.shape[1]
    # right-cumulative trapezoid: R[i] = int_{lam_i}^{pi}
    gg = gam[:, :, None] * gam[:, None, :]
    gl = gam * lv[:, None]
    seg_gg = 0.5 * dx * (gg[:-1] + gg[1:])
    seg_gl = 0.5 * dx * (gl[:-1] + gl[1:])
    Rgg = np.zeros_like(gg)
    Rgl = np.zeros_like(gl)
    Rgg[:-1] = np.cumsum(seg_gg[::-1], axis=0)[::-1]
    Rgl[:-1] = np.cumsum(seg_gl[::-1], axis=0)[::-1]
    stop = n - q  # last usable index (1-based), i.e. lambda = pi (1 - q/n)
    integrand = np.zeros(n)
    coef = np.linalg.solve(Rgg[:stop], Rgl[:stop, :, None])[..., 0]
    integrand[:stop] = lv[:stop] - np.einsum("ij,ij->i", gam[:stop], coef)
    cum = np.empty(n)
    # first cell: l and gamma may be log-singular at 0, so integrate adaptively
    # with the projection coefficient frozen at lambda_1
    c0 = coef[0]
    cum[0], _ = integrate.quad(
        lambda x: float(l_fun(np.array(x))) - float(fam.gamma(theta, x).ravel() @ c0), 0.0, dx)
    cum[1:stop] = cum[0] + np.cumsum(0.5 * dx * (integrand[:stop - 1] + integrand[1:stop]))
    cum[stop:] = cum[stop - 1]
    return DriftPath(lam, cum / np.pi, float(lam[stop - 1]))


def _quad_mean(l_fun) -> float:
    val, _ = integrate.quad(lambda x: float(l_fun(np.array(x))), 0.0, np.pi, limit=200)
    return val


@lru_cache(maxsize=None)
def _cached_mean(name: str) -> float:
    return _quad_mean(DIRECTIONS[name])


def ell_coefficients(L, n: int) -> np.ndarray:
    """ell(j) = sqrt(2)(j - 1/2) int_0^pi sin((j - 1/2) lam) L(lam) dlam (trapezoid, L(0) = 0)."""
    if isinstance(L, DriftPath):
        lam, vals = L.lam, L.values
    else:
        vals = np.asarray(L, dtype=float)
        lam = np.pi * np.arange(1, vals.size + 1) / vals.size
    lam = np.concatenate([[0.0], lam])
    vals = np.concatenate([[0.0], vals])
    jh = np.arange(1, n + 1) - 0.5
    f = np.sin(np.outer(jh, lam)) * vals
    return np.sqrt(2.0) * jh * integrate.trapezoid(f, lam, axis=1)


def directional_stat(beta, ell, n: int | None = None, sign_of_tau: str = "unknown",
                     level: float = 0.05) -> TestReport:
    """Normalised projection of the orthogonal components on ell."""
    ell = np.asarray(ell, dtype=float)
    if n is None:
        n = ell.size
    ell = ell[:n]
    norm = float(np.sqrt(ell @ ell))
    if norm == 0.0:
        raise ValueError("direction coefficients are all zero")
    m = ortho_components(beta, n)
    v = float(ell @ m / norm)
    if sign_of_tau == "unknown":
        crit = float(norm_ppf(1.0 - level / 2.0))
        p, rej, name = 2.0 * float(norm_sf(abs(v))), abs(v) > crit, f"psi{n}"
    elif sign_of_tau == "positive":
        crit = float(norm_ppf(1.0 - level))
        p, rej, name = float(norm_sf(v)), v > crit, f"psi{n}+"
    elif sign_of_tau == "negative":
        crit = -float(norm_ppf(1.0 - level))
        p, rej, name = float(norm_cdf(v)), v < crit, f"psi{n}-"
    else:
        raise ValueError(f"sign_of_tau must be unknown, positive or negative, not {sign_of_tau!r}")
    return TestReport(name, v, crit, _clip_p(p), bool(rej), level)


# -- Portmanteau --------------------------------------------------------------

def sample_autocorr(x, maxlag: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    T = x.size
    if not 1 <= maxlag < T:
        raise ValueError("need 1 <= maxlag < T")
    xc = x - x.mean()
    denom = xc @ xc
    if not denom > 0.0:
        raise DegenerateSeriesError("zero variance series has no autocorrelation")
    return np.array([xc[:T - j] @ xc[j:] for j in range(1, maxlag + 1)]) / denom


def box_pierce(residuals, n_T: int, level: float = 0.05) -> TestReport:
    """Q = T sum rho^2, standardised as (Q - n)/sqrt(2n) against the normal."""
    x = np.asarray(residuals, dtype=float)
    T = x.size
    if not 1 <= n_T < T / 2:
        raise ValueError("need 1 <= n_T < T/2")
    rho = sample_autocorr(x, n_T)
    Q = float(T * rho @ rho)
    z = (Q - n_T) / math.sqrt(2.0 * n_T)
    zc = float(norm_ppf(1.0 - level))
    crit = n_T + zc * math.sqrt(2.0 * n_T)
    return TestReport(f"q{n_T}", Q, crit, _clip_p(norm_sf(z)), z > zc, level, {"z": z})


def build_bundle(paths: int = 10**6, grid: int = 1000, seed: int = 20050601,
                 levels=DEFAULT_LEVELS) -> dict:
    """All three tables from one set of simulated paths (the shipped data file)."""
    sims = simulate_functionals(paths, grid, seed)
    return {"tables": [table_from_sample(f, sims[f], levels, grid, seed).to_dict()
                       for f in FUNCTIONALS]}
