"""periodogram -> Whittle fit -> beta process -> requested statistics."""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from . import stats
from .gof import beta_process, beta_tapered, tp_process
from .models import get_family
from .residuals import innovations
from .spectral import as_series, periodogram, tapered_periodogram
from .whittle import whittle_fit

_STAT_RE = re.compile(r"^(ks|cvm|c0|w|psi[+-]?|q)(?::(\d+))?$")
_SIGNS = {"psi": "unknown", "psi+": "positive", "psi-": "negative"}


@dataclass(frozen=True)
class StatSpec:
    kind: str                 # ks, cvm, c0, w, psi, q
    n: int | None = None
    direction: str = "fractional"
    sign: str = "unknown"

    @property
    def name(self) -> str:
        if self.kind == "psi":
            return f"psi{self.n}" + {"unknown": "", "positive": "+", "negative": "-"}[self.sign]
        return self.kind if self.n is None else f"{self.kind}{self.n}"

    @classmethod
    def parse(cls, item, direction: str = "fractional") -> "StatSpec":
        """Accepts ``"w:3"``/``"psi+:6"`` strings or ``{"kind": ..., "n": ...}`` mappings."""
        if isinstance(item, StatSpec):
            return item
        if isinstance(item, dict):
            kind = item["kind"]
            sign = item.get("sign", "unknown")
            if kind in _SIGNS and kind != "psi":
                kind, sign = "psi", _SIGNS[kind]
            spec = cls(kind, item.get("n"), item.get("direction", direction), sign)
        else:
            m = _STAT_RE.match(str(item).strip())
            if not m:
                raise ValueError(f"cannot parse statistic {item!r}")
            kind, n = m.group(1), m.group(2)
            sign = "unknown"
            if kind.startswith("psi"):
                kind, sign = "psi", _SIGNS[kind]
            spec = cls(kind, int(n) if n else None, direction, sign)
        if spec.kind in ("w", "psi", "q") and not spec.n:
            raise ValueError(f"statistic {spec.kind!r} needs a count, e.g. {spec.kind}:3")
        if spec.kind in ("ks", "cvm", "c0") and spec.n is not None:
            raise ValueError(f"statistic {spec.kind!r} takes no count")
        if spec.kind not in ("ks", "cvm", "c0", "w", "psi", "q"):
            raise ValueError(f"unknown statistic {spec.kind!r}")
        return spec


def parse_stats(text_or_list, direction: str = "fractional") -> list[StatSpec]:
    items = text_or_list.split(",") if isinstance(text_or_list, str) else text_or_list
    return [StatSpec.parse(i, direction) for i in items if i != ""]


@dataclass
class PipelineResult:
    fit: object
    beta: object
    reports: list


def run_pipeline(x, family: str, statistics, variant: str = "forward", theta0=None,
                 tables=None, level: float = 0.05, ell_grid: int = 1024,
                 form: str = "updated") -> PipelineResult:
    """Fit ``family`` by Whittle and compute each statistic in ``statistics``."""
    x = as_series(x)
    fam = get_family(family)
    specs = parse_stats(statistics)
    if variant == "tapered":
        # the taper leaks a constant into the first ordinates, so remove it first
        pg = tapered_periodogram(x - x.mean())
        fit = whittle_fit(pg, fam)
        beta = beta_tapered(pg, fam, fit, form)
    else:
        pg = periodogram(x)
        fit = whittle_fit(pg, fam)
        beta = beta_process(pg, fam, fit, variant, form)
    reports = []
    resid = None
    ell_cache: dict[str, np.ndarray] = {}
    for s in specs:
        if s.kind == "ks":
            rep = stats.ks_stat(beta, level, tables)
        elif s.kind == "cvm":
            rep = stats.cvm_stat(beta, level, tables)
        elif s.kind == "w":
            rep = stats.smooth_stat(beta, s.n, level)
        elif s.kind == "psi":
            if s.direction not in ell_cache:
                L = stats.drift_L(fam, fit.theta_hat, s.direction, ell_grid)
                ell_cache[s.direction] = stats.ell_coefficients(L, 64)
            rep = stats.directional_stat(beta, ell_cache[s.direction], s.n, s.sign, level)
        elif s.kind == "q":
            if resid is None:
                # demeaned so the residuals do not depend on the series level
                resid = innovations(x - x.mean(), fam.name, fit.theta_hat)
            rep = stats.box_pierce(resid, s.n, level)
        else:  # c0
            if theta0 is None:
                raise ValueError("the simple-hypothesis statistic c0 needs theta0")
            alpha = tp_process(periodogram(x), fam, theta0)
            rep = stats.cvm_simple(alpha, level, tables)
        rep.statistic_name = s.name
        reports.append(rep)
    return PipelineResult(fit, beta, reports)
