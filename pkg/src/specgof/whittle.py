"""Whittle estimation: minimise G_theta(pi) over a compact parameter box."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .models import get_family
from .spectral import PeriodogramGrid

GRID_POINTS = 64
GOLDEN_WIDTH = 1e-10
_INVPHI = (np.sqrt(5.0) - 1.0) / 2.0


class EstimationError(RuntimeError):
    pass


@dataclass(frozen=True)
class WhittleFit:
    family: str
    theta_hat: np.ndarray
    sigma2_hat: float
    objective_evals: int
    converged: bool


def ratios(pg: PeriodogramGrid, family, theta) -> np.ndarray:
    """I(lambda_j) / h_theta(lambda_j), j = 1..T_tilde."""
    return pg.ordinates / get_family(family).h(theta, pg.freqs)


def G_partial(pg: PeriodogramGrid, family, theta, lam: float) -> float:
    """(2 pi / T_tilde) * sum_{j <= [T_tilde lam / pi]} I_j / h_j."""
    Tt = pg.T_tilde
    m = int(np.floor(Tt * lam / np.pi + 1e-9))
    m = min(max(m, 0), Tt)
    if m == 0:
        return 0.0
    r = ratios(pg, family, theta)
    return float(2.0 * np.pi / Tt * np.sum(r[:m]))


class _Objective:
    def __init__(self, pg: PeriodogramGrid, family):
        self.fam = get_family(family)
        self.I = pg.ordinates
        self.lam = pg.freqs
        self.scale = 2.0 * np.pi / pg.T_tilde
        self.evals = 0

    def __call__(self, theta) -> float:
        self.evals += 1
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        return float(self.scale * np.sum(self.I / self.fam._h(theta, self.lam)))

    def score(self, theta) -> float:
        # dG/dtheta for p = 1
        theta = np.atleast_1d(theta)
        r = self.I / self.fam._h(theta, self.lam)
        return float(-self.scale * np.sum(r * self.fam._phi(theta, self.lam)))


def _golden(f, a: float, b: float, width: float):
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > width:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def _fit_scalar(obj: _Objective, lo: float, hi: float) -> tuple[float, bool]:
    grid = np.linspace(lo, hi, GRID_POINTS)
    vals = np.array([obj(g) for g in grid])
    if not np.all(np.isfinite(vals)):
        raise EstimationError("Whittle objective is not finite on the search grid")
    best = min(range(GRID_POINTS), key=lambda i: (vals[i], abs(grid[i])))
    a = grid[max(best - 1, 0)]
    b = grid[min(best + 1, GRID_POINTS - 1)]
    theta, fval = _golden(obj, a, b, GOLDEN_WIDTH)
    # Polish on the score: its zero is located to rounding level, which
    # keeps the estimate invariant to rescaling the data.
    left, right = max(lo, theta - 1e-7), min(hi, theta + 1e-7)
    sl, sr = obj.score(left), obj.score(right)
    if sl < 0.0 < sr:
        root = optimize.brentq(obj.score, left, right, xtol=1e-15, rtol=1e-15)
        if obj(root) <= fval * (1.0 + 1e-12):
            theta = root
    return theta, bool(np.isfinite(fval))


def whittle_fit(pg: PeriodogramGrid, family) -> WhittleFit:
    fam = get_family(family)
    if pg.T < 32:
        raise ValueError(f"Whittle fit needs T >= 32, got {pg.T}")
    obj = _Objective(pg, fam)
    if fam.p == 0:
        theta = np.zeros(0)
        converged = True
    elif fam.p == 1:
        (lo, hi), = fam.param_box
        t, converged = _fit_scalar(obj, lo, hi)
        theta = np.array([t])
    else:
        axes = [np.linspace(lo, hi, 6)[1:-1] for lo, hi in fam.param_box]
        starts = [np.array(s) for s in itertools.product(*axes)]
        vals = np.array([obj(s) for s in starts])
        if not np.all(np.isfinite(vals)):
            raise EstimationError("Whittle objective is not finite on the search grid")
        x0 = starts[int(np.argmin(vals))]
        res = optimize.minimize(obj, x0, method="Nelder-Mead", bounds=fam.param_box,
                                options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 20000})
        theta, converged = np.asarray(res.x), bool(res.success)
    sigma2 = obj(theta)
    if not np.isfinite(sigma2) or sigma2 <= 0.0:
        raise EstimationError("degenerate Whittle objective at the optimum")
    return WhittleFit(fam.name, theta, sigma2, obj.evals, bool(converged))
