import numpy as np
import pytest
from scipy import optimize

from specgof.models import get_family
from specgof.sim import DgpSpec, simulate
from specgof.spectral import PeriodogramGrid, periodogram
from specgof.whittle import G_partial, ratios, whittle_fit


def test_G_partial_endpoints_and_monotonicity(white500):
    pg = periodogram(white500)
    assert G_partial(pg, "ar1", 0.2, 0.0) == 0.0
    lams = np.linspace(0, np.pi, 40)
    vals = [G_partial(pg, "ar1", 0.2, l) for l in lams]
    assert np.all(np.diff(vals) >= 0)
    full = 2 * np.pi / pg.T_tilde * np.sum(ratios(pg, "ar1", 0.2))
    assert vals[-1] == pytest.approx(full, rel=1e-14)


def test_G_partial_counts_frequencies():
    pg = PeriodogramGrid(20, np.ones(10))
    # ordinates equal to 1 and h = 1: G(lambda) = 2 pi / T_tilde * [T_tilde lambda / pi]
    assert G_partial(pg, "ar1", 0.0, pg.freqs[3]) == pytest.approx(2 * np.pi / 10 * 4)
    assert G_partial(pg, "ar1", 0.0, pg.freqs[3] - 1e-6) == pytest.approx(2 * np.pi / 10 * 3)


@pytest.mark.parametrize("fam,kind,th", [("ar1", "ar1", 0.6), ("ma1", "ma1", -0.4),
                                          ("arfima", "arfima0d0", 0.25)])
def test_fit_minimises_objective(fam, kind, th):
    x = simulate(DgpSpec(kind, (th,), 600, 4))
    pg = periodogram(x)
    fit = whittle_fit(pg, fam)
    (lo, hi), = get_family(fam).param_box
    # independent optimiser on a fine grid as the oracle
    grid = np.linspace(lo, hi, 4001)
    vals = [G_partial(pg, fam, g, np.pi) for g in grid]
    g0 = grid[int(np.argmin(vals))]
    res = optimize.minimize_scalar(lambda t: G_partial(pg, fam, t, np.pi),
                                   bounds=(max(lo, g0 - 1e-3), min(hi, g0 + 1e-3)),
                                   method="bounded", options={"xatol": 1e-12})
    assert fit.sigma2_hat <= res.fun * (1 + 1e-8)
    assert fit.sigma2_hat == pytest.approx(G_partial(pg, fam, fit.theta_hat, np.pi), rel=1e-14)
    assert fit.converged and fit.objective_evals > 64
    assert lo <= fit.theta_hat[0] <= hi


def test_ar1_consistency():
    est = [whittle_fit(periodogram(simulate(DgpSpec("ar1", (0.5,), 2048, s))), "ar1").theta_hat[0]
           for s in range(200)]
    assert abs(np.mean(est) - 0.5) < 0.03


def test_white_noise_gives_small_delta():
    est = [whittle_fit(periodogram(simulate(DgpSpec("iid", (), 1000, s))), "ar1").theta_hat[0]
           for s in range(100)]
    assert abs(np.mean(est)) < 0.02
    assert np.std(est) < 0.06


@pytest.mark.parametrize("a", [0.01, 3.0, 250.0])
def test_scale_equivariance(a):
    x = simulate(DgpSpec("arfima0d0", (0.3,), 512, 9))
    f1 = whittle_fit(periodogram(x), "arfima")
    f2 = whittle_fit(periodogram(a * x), "arfima")
    assert abs(f1.theta_hat[0] - f2.theta_hat[0]) < 1e-9
    assert f2.sigma2_hat == pytest.approx(a * a * f1.sigma2_hat, rel=1e-9)


def test_white_family_needs_no_search(white500):
    pg = periodogram(white500)
    fit = whittle_fit(pg, "white")
    assert fit.theta_hat.shape == (0,)
    assert fit.sigma2_hat == pytest.approx(2 * np.pi * pg.ordinates.mean())
    # innovation variance recovered: sigma2 = 2 pi f, f = I on average
    assert fit.sigma2_hat == pytest.approx(np.var(white500), rel=0.15)


def test_too_short_series():
    with pytest.raises(ValueError, match="T >= 32"):
        whittle_fit(periodogram(np.random.default_rng(0).standard_normal(31)), "ar1")


def test_flat_periodogram_closed_form():
    # I = 1: objective is proportional to T_tilde (1 + d^2) - 2 d sum cos(lambda_j),
    # and the cosines over j = 1..T/2 sum to -1, so d-hat = -1 / T_tilde
    T = 64
    fit = whittle_fit(PeriodogramGrid(T, np.ones(T // 2)), "ar1")
    assert fit.theta_hat[0] == pytest.approx(-1 / 32, abs=1e-12)
