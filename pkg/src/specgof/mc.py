"""Monte Carlo harness for empirical size and power of the tests.

Each (parameter, T) cell is simulated ``replications`` times. Replication
``r`` of cell ``c`` draws from a seed derived from ``(master_seed, c, r)``
alone, and aggregation is pure counting, so the output does not depend on
how the work is split between processes.
"""
from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .gof import FORMS, DegenerateInputError, TransformError
from .models import SingularityError, get_family
from .pipeline import StatSpec, run_pipeline
from .sim import KINDS, DgpSpec, local_alternative_spec, simulate
from .stats import DegenerateSeriesError, load_tables
from .whittle import EstimationError

log = logging.getLogger(__name__)

CSV_HEADER = ("param", "T", "statistic", "rejections", "reps", "rate", "se", "failures")
FAILURE_FLAG = 0.01
# portmanteau lag menus by sample size
Q_LAG_MENU = {200: (3, 6, 10, 20), 500: (3, 6, 15, 35)}
_FAILURES = (EstimationError, TransformError, DegenerateInputError, DegenerateSeriesError,
             SingularityError, ArithmeticError, np.linalg.LinAlgError)
# dgp kind -> family whose parameter it shares, for the simple-hypothesis statistic
_TRUE_FAMILY = {"iid": "white", "ar1": "ar1", "ma1": "ma1", "arfima0d0": "arfima"}


@dataclass(frozen=True)
class Cell:
    index: int
    T: int
    label: str
    kind: str = ""
    params: tuple = ()
    local: tuple | None = None      # (base, theta0, tau, direction)
    theta0: tuple | None = None
    statistics: tuple = ()

    def spec(self, seed: int, burnin=None) -> DgpSpec:
        if self.local is not None:
            base, t0, tau, direction = self.local
            return local_alternative_spec(base, t0, tau, direction, self.T, seed)
        return DgpSpec(self.kind, self.params, self.T, seed, burnin)


@dataclass
class MCConfig:
    fit_family: str
    statistics: list
    replications: int = 5000
    sample_sizes: list = field(default_factory=lambda: [500])
    master_seed: int = 0
    nominal_level: float = 0.05
    variant: str = "forward"
    residuals: str = "updated"    # recursive-residual form, see gof.FORMS
    dgp: dict | None = None       # {"kind", "sweep": [[...], ...]} or {"kind", "params": [...]}
    local: dict | None = None     # {"base", "direction", "tau": [...], "theta0": [...]}
    burnin: int | None = None
    theta0: list | None = None

    def __post_init__(self):
        if int(self.replications) < 1:
            raise ValueError("replications must be at least 1")
        self.replications = int(self.replications)
        if not 0.0 < self.nominal_level < 0.5:
            raise ValueError("nominal_level must lie in (0, 0.5)")
        if not self.sample_sizes or any(int(T) < 32 for T in self.sample_sizes):
            raise ValueError("sample_sizes must be a non-empty list of integers >= 32")
        self.sample_sizes = [int(T) for T in self.sample_sizes]
        if (self.dgp is None) == (self.local is None):
            raise ValueError("give exactly one of 'dgp' or 'local'")
        if self.variant not in ("forward", "backward", "tapered"):
            raise ValueError(f"unknown variant {self.variant!r}")
        if self.residuals not in FORMS:
            raise ValueError(f"unknown residual form {self.residuals!r}")
        get_family(self.fit_family)
        if not self.statistics:
            raise ValueError("no statistics requested")
        self.cells()  # validates the sweep and statistic specs

    @classmethod
    def from_dict(cls, d: dict) -> "MCConfig":
        known = set(cls.__dataclass_fields__)
        extra = set(d) - known
        if extra:
            raise ValueError(f"unknown config fields {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "MCConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def _stats_for(self, T: int, direction: str) -> tuple:
        out = []
        for item in self.statistics:
            if item in ("q:menu", {"kind": "q", "n": "menu"}):
                if T not in Q_LAG_MENU:
                    raise ValueError(f"no portmanteau lag menu for T={T}")
                out.extend(StatSpec("q", n) for n in Q_LAG_MENU[T])
            else:
                out.append(StatSpec.parse(item, direction))
        return tuple(out)

    def cells(self) -> list[Cell]:
        cells = []
        if self.dgp is not None:
            kind = self.dgp["kind"]
            if kind not in KINDS:
                raise ValueError(f"unknown dgp kind {kind!r}")
            sweep = self.dgp.get("sweep", [self.dgp.get("params", [])])
            names = KINDS[kind][0]
            for T in self.sample_sizes:
                stats = self._stats_for(T, "fractional")
                for p in sweep:
                    p = tuple(float(v) for v in np.atleast_1d(p))
                    label = ";".join(f"{n}={v:g}" for n, v in zip(names, p)) or kind
                    t0 = self.theta0
                    if t0 is None and _TRUE_FAMILY.get(kind) == self.fit_family:
                        t0 = p
                    elif t0 is None and kind == "iid":
                        t0 = (0.0,) * get_family(self.fit_family).p
                    cells.append(Cell(len(cells), T, label, kind, p,
                                      theta0=None if t0 is None else tuple(t0), statistics=stats))
                    DgpSpec(kind, p, T, 0, self.burnin)  # validate now, not per replication
        else:
            loc = self.local
            base, direction = loc["base"], loc.get("direction", "fractional")
            taus = np.atleast_1d(loc.get("tau", [0.0]))
            t0s = np.atleast_1d(loc.get("theta0", [0.0]))
            for T in self.sample_sizes:
                stats = self._stats_for(T, direction)
                for t0 in t0s:
                    for tau in taus:
                        label = f"tau={tau:g};theta0={t0:g}"
                        th = () if base == "white" else (float(t0),)
                        cells.append(Cell(len(cells), T, label, local=(base, float(t0), float(tau), direction),
                                          theta0=th if self.theta0 is None else tuple(self.theta0), statistics=stats))
                        local_alternative_spec(base, t0, tau, direction, T, 0)
        for c in cells:
            if any(s.kind == "c0" for s in c.statistics) and c.theta0 is None:
                raise ValueError(f"c0 needs theta0 for cell {c.label}; set 'theta0' in the config")
        return cells


def replication_seed(master_seed: int, cell: int, r: int) -> int:
    return int(np.random.SeedSequence([int(master_seed), int(cell), int(r)]).generate_state(1, np.uint64)[0])


@dataclass
class MCRow:
    param: str
    T: int
    statistic: str
    rejections: int
    reps: int
    failures: int
    elapsed: float = 0.0

    @property
    def rate(self) -> float:
        return self.rejections / self.reps if self.reps else float("nan")

    @property
    def se(self) -> float:
        r = self.rate
        return math.sqrt(r * (1.0 - r) / self.reps) if self.reps else float("nan")

    @property
    def flagged(self) -> bool:
        return self.failures > FAILURE_FLAG * (self.reps + self.failures)

    def key(self):
        return (self.param, self.T, self.statistic, self.rejections, self.reps, self.failures)


@dataclass
class MCReport:
    rows: list
    nominal_level: float = 0.05

    def rate(self, statistic: str, param: str | None = None, T: int | None = None) -> float:
        hits = [r for r in self.rows if r.statistic == statistic
                and (param is None or r.param == param) and (T is None or r.T == T)]
        if len(hits) != 1:
            raise KeyError(f"{len(hits)} rows match {statistic!r}, {param!r}, {T!r}")
        return hits[0].rate


def _run_chunk(config: MCConfig, cell: Cell, start: int, stop: int, tables):
    counts = np.zeros(len(cell.statistics), dtype=np.int64)
    ok = fail = 0
    t_start = time.perf_counter()
    for r in range(start, stop):
        seed = replication_seed(config.master_seed, cell.index, r)
        try:
            x = simulate(cell.spec(seed, config.burnin))
            res = run_pipeline(x, config.fit_family, cell.statistics, config.variant,
                               theta0=cell.theta0, tables=tables, level=config.nominal_level,
                               form=config.residuals)
        except _FAILURES as exc:
            log.debug("cell %s rep %d failed: %s", cell.label, r, exc)
            fail += 1
            continue
        counts += np.fromiter((rep.reject for rep in res.reports), dtype=np.int64)
        ok += 1
    return cell.index, counts, ok, fail, time.perf_counter() - t_start


def _worker_count(workers: int | None) -> int:
    if workers is None:
        env = os.environ.get("SPECGOF_THREADS")
        workers = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(workers))


def run_experiment(config: MCConfig, workers: int | None = None, tables=None,
                   chunk_size: int = 250) -> MCReport:
    """Simulate every cell and count rejections of each statistic.

    Replications whose estimation or transform fails are excluded from the
    rate and counted in ``failures``; cells above 1% failures are logged.
    """
    tables = load_tables() if tables is None else tables
    cells = config.cells()
    jobs = [(c, s, min(s + chunk_size, config.replications))
            for c in cells for s in range(0, config.replications, chunk_size)]
    n_workers = min(_worker_count(workers), len(jobs))
    if n_workers == 1:
        results = [_run_chunk(config, c, a, b, tables) for c, a, b in jobs]
    else:
        with ProcessPoolExecutor(n_workers) as pool:
            futures = [pool.submit(_run_chunk, config, c, a, b, tables) for c, a, b in jobs]
            results = [f.result() for f in futures]
    agg = {c.index: [np.zeros(len(c.statistics), dtype=np.int64), 0, 0, 0.0] for c in cells}
    for idx, counts, ok, fail, dt in results:
        a = agg[idx]
        a[0] += counts
        a[1] += ok
        a[2] += fail
        a[3] += dt
    rows = []
    for c in cells:
        counts, ok, fail, dt = agg[c.index]
        for s, k in zip(c.statistics, counts):
            rows.append(MCRow(c.label, c.T, s.name, int(k), ok, fail, dt))
        if fail > FAILURE_FLAG * config.replications:
            log.warning("cell %s, T=%d: %d of %d replications failed", c.label, c.T, fail,
                        config.replications)
    return MCReport(rows, config.nominal_level)


def _pct(v: float) -> str:
    return f"{100.0 * v:.2f}"


def render_report(report: MCReport, format: str = "csv") -> str:
    if not report.rows:
        raise ValueError("empty report")
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in report.rows:
            w.writerow([r.param, r.T, r.statistic, r.rejections, r.reps, _pct(r.rate), _pct(r.se), r.failures])
        return buf.getvalue()
    if format != "markdown":
        raise ValueError(f"unknown format {format!r}")
    lines = []
    for T in dict.fromkeys(r.T for r in report.rows):
        rows = [r for r in report.rows if r.T == T]
        stats = list(dict.fromkeys(r.statistic for r in rows))
        params = list(dict.fromkeys(r.param for r in rows))
        table = {(r.param, r.statistic): r for r in rows}
        lines.append(f"T = {T} (rejection %, level {_pct(report.nominal_level)}%)")
        lines.append("")
        lines.append("| param | " + " | ".join(stats) + " |")
        lines.append("|---|" + "---:|" * len(stats))
        for p in params:
            cells = []
            for s in stats:
                r = table.get((p, s))
                cells.append("" if r is None else _pct(r.rate) + ("*" if r.flagged else ""))
            lines.append(f"| {p} | " + " | ".join(cells) + " |")
        lines.append("")
    if any(r.flagged for r in report.rows):
        lines.append("\\* more than 1% of replications failed in this cell")
    return "\n".join(lines).rstrip() + "\n"


def parse_csv(text: str) -> MCReport:
    """Inverse of ``render_report(..., "csv")``; rates are recomputed from counts."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if tuple(header) != CSV_HEADER:
        raise ValueError(f"unexpected header {header}")
    rows = [MCRow(p, int(T), s, int(k), int(n), int(f)) for p, T, s, k, n, _, _, f in reader]
    return MCReport(rows)
