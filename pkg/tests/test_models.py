import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from specgof.models import (FAMILIES, SingularityError, fracdiff_coeffs, gamma_theta, get_family,
                            h_theta, log_spectrum_integral, phi_theta)

INTERIOR = {"ar1": [-0.8, -0.4, 0.0, 0.3, 0.7], "ma1": [-0.8, -0.3, 0.0, 0.4, 0.8],
            "arfima": [-0.4, -0.2, 0.0, 0.2, 0.4]}


def test_h_examples():
    assert h_theta("ar1", 0.0, 1.3) == pytest.approx(1.0)
    assert h_theta("ma1", 0.5, 1e-9) == pytest.approx(0.25, rel=1e-12)
    oracle = float(mpmath.power(abs(2 * mpmath.sin(mpmath.pi / 2)), -0.8))
    assert h_theta("arfima", 0.4, np.pi) == pytest.approx(oracle, rel=1e-14)


def test_phi_examples():
    lam = np.linspace(0.1, np.pi, 7)
    np.testing.assert_allclose(phi_theta("ar1", 0.0, lam)[:, 0], 2 * np.cos(lam), atol=1e-15)
    assert phi_theta("ma1", 0.0, 1e-9)[0] == pytest.approx(-2.0)
    for d in (-0.3, 0.0, 0.45):
        assert phi_theta("arfima", d, np.pi)[0] == pytest.approx(-2 * math.log(2), rel=1e-14)


def test_gamma_examples():
    np.testing.assert_allclose(gamma_theta("ar1", 0.0, np.pi / 2), [1.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(gamma_theta("ma1", 0.0, 1e-9), [1.0, -2.0], atol=1e-12)
    np.testing.assert_allclose(gamma_theta("arfima", 0.3, np.pi), [1.0, -2 * math.log(2)])


def test_gamma_shape_on_grid():
    lam = np.linspace(0.05, np.pi, 11)
    g = gamma_theta("ar1", 0.2, lam)
    assert g.shape == (11, 2)
    np.testing.assert_array_equal(g[:, 0], 1.0)
    assert FAMILIES["white"].gamma((), lam).shape == (11, 1)


@pytest.mark.parametrize("fam", ["ar1", "ma1", "arfima"])
def test_zero_frequency_is_an_error(fam):
    with pytest.raises(SingularityError):
        h_theta(fam, 0.1, 0.0)
    with pytest.raises(SingularityError):
        phi_theta(fam, 0.1, np.array([0.0, 1.0]))


def test_domain_errors():
    with pytest.raises(ValueError):
        h_theta("ar1", 0.995, 1.0)
    with pytest.raises(ValueError):
        h_theta("arfima", 0.495, 1.0)
    with pytest.raises(ValueError):
        h_theta("ar1", 0.1, 3.5)
    with pytest.raises(ValueError):
        h_theta("ar1", [0.1, 0.2], 1.0)
    with pytest.raises(ValueError):
        get_family("garch")


def test_param_boxes():
    assert FAMILIES["ar1"].param_box == ((-0.99, 0.99),)
    assert FAMILIES["ma1"].param_box == ((-0.99, 0.99),)
    assert FAMILIES["arfima"].param_box == ((-0.49, 0.49),)
    assert all(FAMILIES[f].p == 1 for f in ("ar1", "ma1", "arfima"))


@pytest.mark.parametrize("fam", ["ar1", "ma1", "arfima"])
def test_score_matches_finite_difference(fam):
    lam = np.linspace(0.01, np.pi, 100)
    step = 1e-5
    for th in INTERIOR[fam]:
        fd = (np.log(h_theta(fam, th + step, lam)) - np.log(h_theta(fam, th - step, lam))) / (2 * step)
        ph = phi_theta(fam, th, lam)[:, 0]
        rel = np.abs(fd - ph) / np.maximum(np.abs(ph), 1e-3)
        assert rel.max() < 1e-6


def _trapezoid_log_h(fam, th, n=10**5, eps=1e-6):
    # trapezoid on (eps, pi]; the log singularity of the arfima family on
    # (0, eps] is integrated in closed form: int_0^eps -2d log(x) dx
    x = np.linspace(eps, np.pi, n)
    val = np.trapezoid(np.log(h_theta(fam, th, x)), x)
    if fam == "arfima":
        val += -2 * th * eps * (math.log(eps) - 1.0)
    else:
        val += eps * math.log(h_theta(fam, th, eps))
    return val


@pytest.mark.parametrize("fam", ["ar1", "ma1", "arfima"])
def test_log_spectrum_integrates_to_zero(fam):
    for th in INTERIOR[fam]:
        assert abs(_trapezoid_log_h(fam, th)) < 1e-3
        assert abs(log_spectrum_integral(fam, th)) < 1e-6


def test_fracdiff_examples():
    np.testing.assert_array_equal(fracdiff_coeffs(0.0, 5), [1, 0, 0, 0, 0])
    for d in (-0.45, -0.1, 0.2, 0.4):
        oracle = special.gamma(1 - d) / (special.gamma(-d) * special.gamma(2))
        assert fracdiff_coeffs(d, 2)[1] == pytest.approx(oracle, rel=1e-13)
        assert oracle == pytest.approx(-d)
    assert fracdiff_coeffs(0.4, 3)[2] == pytest.approx(-0.12, rel=1e-14)


def test_fracdiff_gamma_ratio_oracle():
    d = 0.3
    c = fracdiff_coeffs(d, 40)
    oracle = [float(mpmath.gamma(j - d) / (mpmath.gamma(-d) * mpmath.gamma(j + 1))) for j in range(40)]
    np.testing.assert_allclose(c, oracle, rtol=1e-12)


def test_fracdiff_large_n_is_finite():
    c = fracdiff_coeffs(0.45, 200_000)
    assert np.all(np.isfinite(c)) and abs(c[-1]) < 1e-5


@given(st.floats(-0.49, 0.49))
@settings(max_examples=40, deadline=None)
def test_fracdiff_inversion(d):
    a, b = fracdiff_coeffs(d, 50), fracdiff_coeffs(-d, 50)
    conv = np.convolve(a, b)[:50]
    expect = np.zeros(50)
    expect[0] = 1.0
    np.testing.assert_allclose(conv, expect, atol=1e-10)


@given(st.sampled_from(["ar1", "ma1", "arfima"]), st.floats(-0.48, 0.48), st.floats(1e-4, np.pi))
@settings(max_examples=200, deadline=None)
def test_h_positive_and_gamma_consistent(fam, th, lam):
    h = h_theta(fam, th, lam)
    assert h > 0 and np.isfinite(h)
    g = gamma_theta(fam, th, lam)
    assert g[0] == 1.0 and g[1] == phi_theta(fam, th, lam)[0]
