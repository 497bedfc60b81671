import dataclasses
import io

import numpy as np
import pytest
from conftest import direct_backward, direct_forward
from hypothesis import given, settings
from hypothesis import strategies as st

from specgof.gof import (FORMS, TransformError, backward_residuals, beta_process, beta_tapered,
                         forward_residuals, tp_process)
from specgof.models import get_family
from specgof.pipeline import run_pipeline
from specgof.sim import DgpSpec, simulate
from specgof.spectral import TAPER_P4SQ, PeriodogramGrid, periodogram, tapered_periodogram
from specgof.whittle import ratios, whittle_fit

FAMS = {"ar1": ("ar1", (0.3,)), "ma1": ("ma1", (-0.4,)), "arfima": ("arfima0d0", (0.2,))}


def _inputs(fam, T, seed):
    kind, th = FAMS[fam]
    pg = periodogram(simulate(DgpSpec(kind, th, T, seed)))
    f = get_family(fam)
    return ratios(pg, f, th), f.gamma(th, pg.freqs)


@pytest.mark.parametrize("form", FORMS)
@pytest.mark.parametrize("fam", sorted(FAMS))
@pytest.mark.parametrize("T", [32, 64, 128])
def test_recursions_match_direct_least_squares(form, fam, T):
    for seed in range(10):
        r, gam = _inputs(fam, T, seed)
        upd = form == "updated"
        np.testing.assert_allclose(forward_residuals(r, gam, form), direct_forward(r, gam, upd),
                                   rtol=0, atol=1e-9)
        np.testing.assert_allclose(backward_residuals(r, gam, form), direct_backward(r, gam, upd),
                                   rtol=0, atol=1e-9)


def test_ar1_T64_example():
    pg = periodogram(simulate(DgpSpec("ar1", (0.3,), 64, 2024)))
    f = get_family("ar1")
    r, gam = ratios(pg, f, 0.3), f.gamma(0.3, pg.freqs)
    e = forward_residuals(r, gam)
    assert e.size == 32 - 2
    assert np.max(np.abs(e - direct_forward(r, gam, False))) < 1e-9


@pytest.mark.parametrize("form", FORMS)
def test_constant_ratios_give_zero_residuals(form):
    lam = np.linspace(0.1, np.pi, 40)
    gam = get_family("arfima").gamma(0.1, lam)
    r = np.full(40, 2.5)
    assert np.max(np.abs(forward_residuals(r, gam, form))) < 1e-12
    assert np.max(np.abs(backward_residuals(r, gam, form))) < 1e-12


def test_intercept_only_examples():
    r = np.random.default_rng(2).exponential(size=30)
    gam = np.ones((30, 1))
    fwd = [r[j] - r[j + 1:].mean() for j in range(29)]
    bwd = [r[j] - r[:j].mean() for j in range(1, 30)]
    np.testing.assert_allclose(forward_residuals(r, gam), fwd, atol=1e-13)
    np.testing.assert_allclose(backward_residuals(r, gam), bwd, atol=1e-13)
    np.testing.assert_allclose(forward_residuals(r, gam, "updated"),
                               [r[j] - r[j:].mean() for j in range(29)], atol=1e-13)


def test_updated_is_shrunk_predictive():
    # a posteriori residual = a priori residual / (1 + g' M^{-1} g)
    r, gam = _inputs("ar1", 128, 5)
    pred = forward_residuals(r, gam, "predictive")
    upd = forward_residuals(r, gam, "updated")
    for i in (0, 10, 60):
        M = gam[i + 1:].T @ gam[i + 1:]
        lev = gam[i] @ np.linalg.solve(M, gam[i])
        assert upd[i] == pytest.approx(pred[i] / (1 + lev), rel=1e-9)


@given(st.floats(-5, 5), st.floats(-5, 5), st.sampled_from(FORMS))
@settings(max_examples=30, deadline=None)
def test_score_direction_is_annihilated(c0, c1, form):
    r, gam = _inputs("arfima", 128, 1)
    shifted = r + gam @ np.array([c0, c1])
    np.testing.assert_allclose(forward_residuals(shifted, gam, form), forward_residuals(r, gam, form),
                               atol=1e-9)
    np.testing.assert_allclose(backward_residuals(shifted, gam, form), backward_residuals(r, gam, form),
                               atol=1e-9)


def test_singular_seed_block_names_A5():
    gam = np.ones((20, 2))
    with pytest.raises(TransformError, match="A5"):
        forward_residuals(np.ones(20), gam)


def test_unknown_form():
    with pytest.raises(ValueError):
        forward_residuals(np.ones(10), np.ones((10, 1)), "sideways")


def test_tp_process_examples(rng):
    pg = periodogram(rng.standard_normal(301))
    a = tp_process(pg, "ar1", 0.1)
    assert a.values.size == pg.T_tilde and abs(a.values[-1]) < 1e-9
    # constant ratios: ordinates proportional to the model spectrum
    lam = 2 * np.pi * np.arange(1, 151) / 300
    const = PeriodogramGrid(300, 0.7 * get_family("ar1").h(0.4, lam))
    assert np.max(np.abs(tp_process(const, "ar1", 0.4).values)) < 1e-12


def test_tp_process_hand_cusum():
    x = np.random.default_rng(16).standard_normal(16)
    pg = periodogram(x)
    I = np.abs(np.fft.fft(x)[1:9]) ** 2 / (2 * np.pi * 16)
    Tt = 8
    expect = [np.sqrt(Tt) * (I[:m].sum() / I.sum() - m / Tt) for m in range(1, 9)]
    np.testing.assert_allclose(tp_process(pg, "white", ()).values, expect, atol=1e-12)


def test_beta_constant_ratios_vanish():
    T = 256
    lam = 2 * np.pi * np.arange(1, 129) / T
    f = get_family("arfima")
    pg = PeriodogramGrid(T, 3.0 * f.h(0.25, lam))
    # evaluate at the generating parameter; the finite-grid minimiser differs slightly
    fit = dataclasses.replace(whittle_fit(pg, f), theta_hat=np.array([0.25]))
    for variant in ("forward", "backward"):
        assert np.max(np.abs(beta_process(pg, f, fit, variant).values)) < 1e-9


@pytest.mark.parametrize("variant", ["forward", "backward"])
@pytest.mark.parametrize("form", FORMS)
def test_beta_is_scaled_partial_sum(variant, form, white500):
    pg = periodogram(white500)
    fit = whittle_fit(pg, "ar1")
    b = beta_process(pg, "ar1", fit, variant, form)
    f = get_family("ar1")
    r, gam = ratios(pg, f, fit.theta_hat), f.gamma(fit.theta_hat, pg.freqs)
    e = (forward_residuals if variant == "forward" else backward_residuals)(r, gam, form)
    G = 2 * np.pi / pg.T_tilde * r.sum()
    partial = np.array([e[:m].sum() for m in range(1, e.size + 1)])
    np.testing.assert_allclose(b.values, 2 * np.pi / G / np.sqrt(pg.T_tilde) * partial, atol=1e-12)
    assert b.values.size == b.T_bar == pg.T_tilde - 2
    assert b.kind == f"beta_{variant}" and b.is_beta


def test_beta_tapered_scaling(white500):
    pgw = tapered_periodogram(white500)
    fit = whittle_fit(pgw, "ar1")
    bw = beta_tapered(pgw, "ar1", fit)
    plain = beta_process(pgw, "ar1", fit, "forward")
    np.testing.assert_allclose(bw.values, plain.values / np.sqrt(TAPER_P4SQ), atol=1e-14)
    with pytest.raises(ValueError):
        beta_tapered(periodogram(white500), "ar1", fit)


def test_beta_tapered_null_variance():
    # under the null the limit has variance lambda / pi
    mid, end = [], []
    for s in range(400):
        x = simulate(DgpSpec("iid", (), 512, 500 + s))
        pgw = tapered_periodogram(x - x.mean())
        v = beta_tapered(pgw, "ar1", whittle_fit(pgw, "ar1")).values
        mid.append(v[pgw.T_tilde // 2])
        end.append(v[-1])
    assert 0.35 < np.var(mid) < 0.65
    assert 0.75 < np.var(end) < 1.25


@pytest.mark.parametrize("variant", ["forward", "backward", "tapered"])
def test_affine_invariance_of_beta(variant):
    x = simulate(DgpSpec("ar1", (0.4,), 300, 8))
    base = run_pipeline(x, "ar1", ["ks"], variant).beta.values
    for a, b in [(3, 0), (1, -5), (0.1, 7), (-2, 1)]:
        other = run_pipeline(a * x + b, "ar1", ["ks"], variant).beta.values
        np.testing.assert_allclose(other, base, atol=1e-9)


def test_path_csv(white500):
    pg = periodogram(white500)
    b = beta_process(pg, "ar1", whittle_fit(pg, "ar1"))
    buf = io.StringIO()
    text = b.to_csv(buf)
    lines = text.splitlines()
    assert lines[0] == "index,lambda,value" and len(lines) == b.values.size + 1
    assert buf.getvalue() == text
    last = lines[-1].split(",")
    assert float(last[1]) == pytest.approx(np.pi)
