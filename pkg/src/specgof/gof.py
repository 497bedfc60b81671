"""Bartlett Tp-process and its martingale transform by recursive residuals.

The transform regresses the spectral ratios r_j = I_j / h_j on the score
regressors gamma_j = (1, phi_j') using only the frequencies above j
(forward) or below j (backward); the cumulated residuals form the
beta process, which is asymptotically a standard Brownian motion on [0, pi]
even when theta has been estimated.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .models import get_family
from .spectral import TAPER_P4SQ, PeriodogramGrid
from .whittle import WhittleFit, ratios

# |1 + g' M^{-1} g| below this triggers a direct solve instead of a rank-one update
SM_GUARD = 1e-12
# inverse condition number below which the seeding block counts as singular
RCOND_MIN = 1e-13
# up to this many absorbed rows, coefficients are refined against the rows
ROW_REFINE_MAX = 32
# residual forms: fitted on the neighbours only, or after absorbing j itself
FORMS = ("updated", "predictive")


class DegenerateInputError(ValueError):
    pass


class TransformError(RuntimeError):
    pass


@dataclass(frozen=True)
class ProcessPath:
    """Cumulative values of an empirical process at m = 1..len(values).

    ``kind`` is one of ``alpha``, ``beta_forward``, ``beta_backward`` or
    ``beta_tapered``.  Alpha paths live on m*pi/T_tilde, beta paths on
    m*pi/T_bar.
    """

    kind: str
    values: np.ndarray
    T: int
    T_tilde: int
    T_bar: int
    normalizer: float

    @property
    def is_beta(self) -> bool:
        return self.kind.startswith("beta")

    @property
    def freqs(self) -> np.ndarray:
        n = self.values.size
        return np.pi * np.arange(1, n + 1) / n

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["index", "lambda", "value"])
        for m, (lam, v) in enumerate(zip(self.freqs, self.values), start=1):
            w.writerow([m, repr(float(lam)), repr(float(v))])
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text


@dataclass
class RecursionState:
    """Running inverse of the (unnormalised) regressor cross-product and the
    matching least-squares coefficients.

    ``M`` and ``s`` carry the accumulated normal equations M b = s.  After
    each rank-one step the coefficients get a round of iterative
    refinement, which stops rounding drift from building up when the
    regressors are nearly collinear (as at the first few frequencies next
    to pi).  While at most ``ROW_REFINE_MAX`` rows are absorbed the
    refinement uses the residuals of the rows themselves; later it uses
    ``s - M b``.
    """

    A_inv: np.ndarray
    b: np.ndarray
    M: np.ndarray
    s: np.ndarray

    @classmethod
    def seed(cls, gam: np.ndarray, r: np.ndarray) -> "RecursionState":
        M = gam.T @ gam
        if np.linalg.cond(M) * RCOND_MIN > 1.0:
            raise TransformError(
                "regressor block used to seed the recursion is singular "
                "(assumption A5 fails for this spectral family and sample size)")
        # coefficients from the regressors themselves: the normal equations
        # would square an already large condition number
        b = np.linalg.lstsq(gam, r, rcond=None)[0]
        return cls(np.linalg.inv(M), b, M, gam.T @ r)

    def add(self, g: np.ndarray, r: float, gam_all=None, r_all=None) -> None:
        self.M = self.M + np.outer(g, g)
        self.s = self.s + g * r
        v = self.A_inv @ g
        denom = 1.0 + g @ v
        if abs(denom) < SM_GUARD:
            # gam_all/r_all hold every observation now in the regression
            fresh = RecursionState.seed(gam_all, r_all)
            self.A_inv, self.b = fresh.A_inv, fresh.b
            return
        self.A_inv = self.A_inv - np.outer(v, v) / denom
        b = self.b + (self.A_inv @ g) * (r - g @ self.b)
        if gam_all is not None and gam_all.shape[0] <= ROW_REFINE_MAX:
            # few rows, nearly collinear: refine against the rows themselves,
            # since M b = s would square the condition number
            for _ in range(2):
                b = b + self.A_inv @ (gam_all.T @ (r_all - gam_all @ b))
        else:
            b = b + self.A_inv @ (self.s - self.M @ b)
        self.b = b


def _check_inputs(r, gam):
    r = np.asarray(r, dtype=float)
    gam = np.asarray(gam, dtype=float)
    if gam.ndim == 1:
        gam = gam[:, None]
    if gam.shape[0] != r.size:
        raise ValueError("ratios and regressors differ in length")
    q = gam.shape[1]
    if r.size - q < 1:
        raise TransformError(f"need more than {q} frequencies, got {r.size}")
    return r, gam, q


def _check_form(form: str) -> str:
    if form not in FORMS:
        raise ValueError(f"unknown residual form {form!r}; choose from {FORMS}")
    return form


def forward_residuals(r, gam, form: str = "predictive") -> np.ndarray:
    """Forward recursive residuals e(j) = r(j) - gamma(j)' b(j), j = 1..T_bar.

    ``predictive``: b(j) is fitted on the frequencies k > j.
    ``updated``: b(j) is fitted on k >= j, the running solution of the
    downward rank-one recursion after frequency j has been absorbed; this
    equals the predictive residual shrunk by 1 / (1 + leverage).

    The recursion starts from a direct solve on the q = p+1 trailing
    frequencies and moves downward.
    """
    r, gam, q = _check_inputs(r, gam)
    _check_form(form)
    n = r.size
    Tbar = n - q
    st = RecursionState.seed(gam[Tbar:], r[Tbar:])
    e = np.empty(Tbar)
    if form == "predictive":
        e[Tbar - 1] = r[Tbar - 1] - gam[Tbar - 1] @ st.b
        for i in range(Tbar - 2, -1, -1):
            # 0-based i is frequency j = i+1; its regression adds frequency j+1
            st.add(gam[i + 1], r[i + 1], gam[i + 1:], r[i + 1:])
            e[i] = r[i] - gam[i] @ st.b
    else:
        for i in range(Tbar - 1, -1, -1):
            st.add(gam[i], r[i], gam[i:], r[i:])
            e[i] = r[i] - gam[i] @ st.b
    return e


def backward_residuals(r, gam, form: str = "predictive") -> np.ndarray:
    """Backward recursive residuals ebar(j), j = p+2..T_tilde.

    ``predictive`` fits bbar(j) on k < j, ``updated`` on k <= j.  In the
    updated form ebar(p+1) is an exact fit and vanishes, so both forms
    start at p+2 and have T_bar entries.
    """
    r, gam, q = _check_inputs(r, gam)
    _check_form(form)
    n = r.size
    st = RecursionState.seed(gam[:q], r[:q])
    e = np.empty(n - q)
    for i in range(q, n):
        if form == "predictive":
            if i > q:
                st.add(gam[i - 1], r[i - 1], gam[:i], r[:i])
        else:
            st.add(gam[i], r[i], gam[:i + 1], r[:i + 1])
        e[i - q] = r[i] - gam[i] @ st.b
    return e


def tp_process(pg: PeriodogramGrid, family, theta) -> ProcessPath:
    """alpha(m pi / T_tilde) = sqrt(T_tilde) (G_m / G_pi - m / T_tilde)."""
    fam = get_family(family)
    r = ratios(pg, fam, theta)
    Tt = pg.T_tilde
    cum = np.cumsum(r) * (2.0 * np.pi / Tt)
    G = cum[-1]
    if not G > 0.0:
        raise DegenerateInputError("G(pi) is zero: the series has no variation")
    vals = np.sqrt(Tt) * (cum / G - np.arange(1, Tt + 1) / Tt)
    return ProcessPath("alpha", vals, pg.T, Tt, Tt - fam.p - 1, float(G))


def _cusum(pg, fam, theta, variant, scale=1.0, form="updated") -> ProcessPath:
    r = ratios(pg, fam, theta)
    gam = fam.gamma(theta, pg.freqs)
    Tt = pg.T_tilde
    G = 2.0 * np.pi / Tt * np.sum(r)
    if not G > 0.0:
        raise DegenerateInputError("G(pi) is zero: the series has no variation")
    if variant == "backward":
        e = backward_residuals(r, gam, form)
    else:
        e = forward_residuals(r, gam, form)
    vals = scale * (2.0 * np.pi / G) / np.sqrt(Tt) * np.cumsum(e)
    kind = {"forward": "beta_forward", "backward": "beta_backward",
            "tapered": "beta_tapered"}[variant]
    return ProcessPath(kind, vals, pg.T, Tt, Tt - fam.p - 1, float(G))


def beta_process(pg: PeriodogramGrid, family, fit: WhittleFit, variant: str = "forward",
                 form: str = "updated") -> ProcessPath:
    """Scaled cusum of recursive residuals, evaluated at the Whittle estimate.

    The default ``updated`` form uses the residuals produced by the rank-one
    recursion after each frequency is absorbed; ``predictive`` uses pure
    one-step prediction errors.  Both have the same Brownian limit; the
    updated form is somewhat conservative in small samples, the predictive
    one somewhat liberal (its endpoint variance is inflated by leverage).
    """
    if variant not in ("forward", "backward"):
        raise ValueError(f"unknown variant {variant!r}")
    return _cusum(pg, get_family(family), fit.theta_hat, variant, form=_check_form(form))


def beta_tapered(pg_tapered: PeriodogramGrid, family, fit: WhittleFit, form: str = "updated") -> ProcessPath:
    """Forward beta process on a full-cosine-tapered periodogram.

    Neighbouring tapered ordinates are correlated, which inflates the
    variance of their partial sums by P4^2 = 35/18; the cusum is divided by
    sqrt(P4^2) so that the limit is again standard Brownian motion.
    """
    if not pg_tapered.tapered:
        raise ValueError("beta_tapered needs a tapered periodogram")
    return _cusum(pg_tapered, get_family(family), fit.theta_hat, "tapered",
                  scale=1.0 / np.sqrt(TAPER_P4SQ), form=_check_form(form))
