"""Command-line interface.

Exit codes: 0 success, 1 error, 2 when ``test`` rejects at least one null.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import stats
from .gof import FORMS, DegenerateInputError, TransformError
from .mc import MCConfig, render_report, run_experiment
from .models import FAMILIES
from .pipeline import parse_stats, run_pipeline
from .seriesio import SeriesFormatError, read_series, write_series
from .sim import KINDS, DgpSpec, simulate
from .whittle import EstimationError

# short model names accepted by `simulate --model`
MODEL_ALIASES = {"white": "iid", "arfima": "arfima0d0", "arma": "arma11"}
EXIT_OK, EXIT_ERROR, EXIT_REJECT = 0, 1, 2


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(f"{self.prog}: {message}")


def _formatter(prog):
    # fixed width keeps --help output identical across terminals
    return argparse.HelpFormatter(prog, width=80, max_help_position=28)


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated reals, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="specgof", formatter_class=_formatter,
                description="Spectral goodness-of-fit tests for time series models.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", metavar="command", parser_class=_Parser)
    sub.required = True

    s = sub.add_parser("simulate", formatter_class=_formatter, help="write a simulated series",
                       description="Simulate a Gaussian series and write it as text or binary.")
    s.add_argument("--model", required=True,
                   help=f"one of {', '.join(list(KINDS) + list(MODEL_ALIASES))}")
    s.add_argument("--params", type=_floats, default=[], help="comma-separated parameter values")
    s.add_argument("--T", type=int, default=500, help="series length (default 500)")
    s.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    s.add_argument("--burnin", type=int, default=None, help="discarded warm-up draws (model default)")
    s.add_argument("--binary", action="store_true", help="write the SPGF0001 binary format")
    s.add_argument("--out", default="-", help="output path, '-' for stdout (default)")

    t = sub.add_parser("test", formatter_class=_formatter, help="test a model for a series file",
                       description="Fit a spectral family by Whittle and report one JSON line "
                                   "per statistic.")
    t.add_argument("data", help="series file (text or SPGF0001 binary)")
    t.add_argument("--family", default="ar1", choices=sorted(FAMILIES), help="null family (default ar1)")
    t.add_argument("--variant", default="forward", choices=["forward", "backward", "tapered"],
                   help="transform variant (default forward)")
    t.add_argument("--residuals", default="updated", choices=list(FORMS),
                   help="recursive-residual form (default updated)")
    t.add_argument("--stats", default="ks,cvm",
                   help="comma list from ks, cvm, c0, w:n, psi:n, psi+:n, psi-:n, q:n "
                        "(default ks,cvm)")
    t.add_argument("--direction", default="fractional", choices=["fractional", "ma", "ar"],
                   help="local-alternative direction for psi (default fractional)")
    t.add_argument("--theta0", type=_floats, default=None, help="null parameter value for c0")
    t.add_argument("--level", type=float, default=0.05, help="test level (default 0.05)")
    t.add_argument("--critvals", default=None, help="critical-value table JSON (default bundled)")

    c = sub.add_parser("critvals", formatter_class=_formatter, help="simulate critical-value tables",
                       description="Simulate quantiles of Brownian functionals.")
    c.add_argument("--functional", default="all", choices=["all", *stats.FUNCTIONALS],
                   help="functional to tabulate (default all)")
    c.add_argument("--paths", type=int, default=10**6, help="simulated paths (default 1000000)")
    c.add_argument("--grid", type=int, default=1000, help="steps per path (default 1000)")
    c.add_argument("--seed", type=int, default=20050601, help="random seed (default 20050601)")
    c.add_argument("--out", default="-", help="output path, '-' for stdout (default)")

    m = sub.add_parser("mc", formatter_class=_formatter, help="run a Monte Carlo experiment",
                       description="Run a Monte Carlo experiment from a JSON config. "
                                   "SPECGOF_THREADS caps the worker count.")
    m.add_argument("--config", required=True, help="experiment JSON file")
    m.add_argument("--reps", type=int, default=None, help="override the replication count")
    m.add_argument("--format", default="csv", choices=["csv", "markdown"], help="report format (default csv)")
    m.add_argument("--critvals", default=None, help="critical-value table JSON (default bundled)")
    m.add_argument("--out", default="-", help="output path, '-' for stdout (default)")
    return p


def _emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def cmd_simulate(a) -> int:
    kind = MODEL_ALIASES.get(a.model, a.model)
    if kind not in KINDS:
        raise CliError(f"unknown model {a.model!r}")
    x = simulate(DgpSpec(kind, tuple(a.params), a.T, a.seed, a.burnin))
    if a.binary:
        if a.out == "-":
            raise CliError("--binary needs --out")
        write_series(a.out, x, binary=True)
    elif a.out == "-":
        sys.stdout.write("".join(f"{v:.17g}\n" for v in x))
    else:
        write_series(a.out, x)
    return EXIT_OK


def cmd_test(a) -> int:
    x = read_series(a.data)
    if x.size < 32:
        raise CliError(f"series too short: T={x.size}, need at least 32")
    tables = stats.load_tables(a.critvals)
    res = run_pipeline(x, a.family, parse_stats(a.stats, a.direction), a.variant,
                       theta0=a.theta0, tables=tables, level=a.level, form=a.residuals)
    head = {"family": res.fit.family, "theta_hat": [float(v) for v in res.fit.theta_hat],
            "T": int(x.size), "variant": a.variant}
    for rep in res.reports:
        sys.stdout.write(json.dumps({**head, **rep.to_dict()}, sort_keys=True) + "\n")
    return EXIT_REJECT if any(r.reject for r in res.reports) else EXIT_OK


def cmd_critvals(a) -> int:
    if a.paths < 10**5 or a.grid < 10**3:
        raise CliError("need --paths >= 100000 and --grid >= 1000")
    if a.functional == "all":
        doc = stats.build_bundle(a.paths, a.grid, a.seed)
        text = json.dumps(doc, indent=1)
    else:
        text = stats.brownian_quantiles(a.functional, paths=a.paths, grid=a.grid, seed=a.seed).to_json()
    _emit(text + "\n", a.out)
    return EXIT_OK


def cmd_mc(a) -> int:
    with open(a.config) as fh:
        raw = json.load(fh)
    if a.reps is not None:
        raw["replications"] = a.reps
    config = MCConfig.from_dict(raw)
    report = run_experiment(config, tables=stats.load_tables(a.critvals))
    _emit(render_report(report, a.format), a.out)
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "test": cmd_test, "critvals": cmd_critvals, "mc": cmd_mc}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return COMMANDS[a.command](a)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except SeriesFormatError as exc:
        print(f"error: unreadable series: {exc}", file=sys.stderr)
    except EstimationError as exc:
        print(f"error: estimation failed: {exc}", file=sys.stderr)
    except (TransformError, DegenerateInputError, stats.DegenerateSeriesError) as exc:
        print(f"error: transform failed: {exc}", file=sys.stderr)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (ValueError, KeyError) as exc:
        print(f"error: invalid input: {exc}", file=sys.stderr)
    return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
