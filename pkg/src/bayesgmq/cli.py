"""Command-line front end.

Subcommands: ``simulate``, ``backtest``, ``frontier``, ``gmq`` and ``risk``.
Options may also come from a flat ``key = value`` file given with
``--config``; flags on the command line win. Errors are reported as a single
JSON line on stderr with exit status 2 (usage) or 3 (GMQ portfolio does not
exist).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .backtest import BacktestConfig, load_returns_csv, rolling_backtest
from .exceptions import BayesGMQError, DomainError, EmptyResultError, ExistenceError, UsageError
from .optimizer import gmq_portfolio, gmv_summary, frontier_mean_q
from .predictive import make_rng
from .risk_measures import RiskSpec, portfolio_risk
from .simulation import (
    SimulationConfig,
    fit_method,
    generate_scenario,
    run_existence_study,
    run_performance_study,
    study_grid,
)

SEED_ENV = "BAYESGMQ_SEED"
ESTIMATORS = ("jeffreys", "conjugate", "conventional", "population")
ALIASES = {"bayesian-jeffreys": "jeffreys", "bayesian-conjugate": "conjugate"}
STUDY_COLUMNS = [
    "method", "alpha", "n", "k", "exceedance", "mean_abs_dev",
    "sd_abs_dev", "existence_failures", "effective_runs",
]
BACKTEST_COLUMNS = ["alpha", "n", "k", "method", "exceedance", "existence_failures", "effective_portfolios"]
FRONTIER_COLUMNS = ["estimator", "R", "Q"]

EXIT_USAGE = 2
EXIT_EXISTENCE = 3


class CliUsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliUsageError(message)


# --- argument types ---------------------------------------------------------


def _alpha(text: str) -> float:
    value = float(text)
    if not 0.5 < value < 1:
        raise argparse.ArgumentTypeError(f"alpha must lie in (0.5, 1), got {text}")
    return value


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _list_of(kind):
    def parse(text: str):
        try:
            return [kind(part) for part in text.split(",") if part.strip()]
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return parse


def _estimators(text: str) -> list[str]:
    names = [ALIASES.get(p.strip(), p.strip()) for p in text.split(",") if p.strip()]
    unknown = [p for p in names if p not in ESTIMATORS]
    if unknown or not names:
        raise argparse.ArgumentTypeError(f"unknown estimator(s) {unknown}; choose from {', '.join(ESTIMATORS)}")
    return names


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise CliUsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


# --- parser -----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bayesgmq", description="Bayesian quantile-based portfolio selection")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, fmt_default="csv"):
        p.add_argument("--config", help="flat key = value file; command-line flags take precedence")
        p.add_argument("--seed", type=int)
        p.add_argument("--format", choices=["csv", "json"], default=fmt_default)
        p.add_argument("--output", "-o", help="output file (default: stdout)")

    def risk_opts(p):
        p.add_argument("--alpha", type=_alpha, default=0.95)
        p.add_argument("--measure", choices=["VaR", "CVaR", "coherent"], default="VaR")
        p.add_argument("--rho-tau", type=float, help="coherent risk value at the standardized error")

    def data_opts(p):
        p.add_argument("--returns", help="CSV of log returns (date column + one column per asset)")
        p.add_argument("--n", type=_positive_int, default=100, help="window length / synthetic sample size")
        p.add_argument("--k", type=_positive_int, default=10, help="synthetic asset count")

    p = sub.add_parser("simulate", help="Monte Carlo GMVaR study over an (n, k, alpha) grid")
    common(p)
    p.add_argument("--n", type=_list_of(_positive_int))
    p.add_argument("--k", type=_list_of(_positive_int), help="explicit k values (overrides --c)")
    p.add_argument("--c", type=_list_of(float), help="ratios k/n")
    p.add_argument("--alpha", type=_list_of(_alpha))
    p.add_argument("--runs", type=_positive_int, default=2000)
    p.add_argument("--measure", choices=["VaR", "CVaR"], default="VaR")
    p.add_argument("--methods", type=_estimators, default=list(ESTIMATORS))
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--min-effective", type=float, default=0.01,
                   help="cells with a smaller fraction of effective runs are reported as absent")

    p = sub.add_parser("backtest", help="rolling-window exceedance backtest on a returns CSV")
    common(p)
    p.add_argument("--returns", required=False)
    p.add_argument("--n", type=_positive_int, default=100)
    p.add_argument("--k", type=_positive_int, default=10)
    p.add_argument("--alpha", type=_alpha, default=0.95)
    p.add_argument("--portfolios", type=_positive_int, default=500)
    p.add_argument("--measure", choices=["VaR", "CVaR"], default="VaR")
    p.add_argument("--methods", type=_estimators, default=["jeffreys", "conjugate", "conventional"])
    p.add_argument("--workers", type=_positive_int, default=1)

    p = sub.add_parser("frontier", help="mean-Q efficient frontiers with GMV/GMQ markers")
    common(p)
    data_opts(p)
    risk_opts(p)
    p.add_argument("--estimator", type=_estimators, default=list(ESTIMATORS))
    p.add_argument("--points", type=_positive_int, default=200)

    p = sub.add_parser("gmq", help="global minimum quantile portfolio as JSON")
    common(p, fmt_default="json")
    data_opts(p)
    risk_opts(p)
    p.add_argument("--estimator", type=_estimators, default=["jeffreys"])

    p = sub.add_parser("risk", help="risk Q(w) of given portfolio weights")
    common(p, fmt_default="json")
    data_opts(p)
    risk_opts(p)
    p.add_argument("--estimator", type=_estimators, default=["jeffreys"])
    p.add_argument("--weights", type=_list_of(float), required=False, help="comma-separated weights")
    return parser


def _config_tokens(path: str) -> list[str]:
    tokens = []
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise CliUsageError(f"cannot read config file {path!r}: {exc.strerror}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliUsageError(f"config line {lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        if key == "config":
            raise CliUsageError(f"config line {lineno}: nested config files are not supported")
        tokens += [f"--{key.replace('_', '-')}", value]
    return tokens


def parse_args(argv: list[str]) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        # config options go first so explicit flags override them
        args = parser.parse_args([argv[0], *_config_tokens(args.config), *argv[1:]])
    if args.seed is None:
        args.seed = _default_seed()
    return args


# --- output -----------------------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def _csv_text(columns, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c]) for c in columns])
    return buf.getvalue()


def _emit(args, text: str) -> None:
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _json_text(payload) -> str:
    return json.dumps(_jsonable(payload), indent=2) + "\n"


# --- data sources -----------------------------------------------------------


def _load_window(args):
    """Return (window, asset names, true (mu, sigma) or None)."""
    if args.returns:
        if not Path(args.returns).is_file():
            raise CliUsageError(f"returns file not found: {args.returns}")
        series = load_returns_csv(args.returns)
        if series.n_periods < args.n:
            window = series.values
        else:
            window = series.values[-args.n:]
        return window, list(series.assets), None
    rng = make_rng(args.seed, 0)
    mu, sigma = generate_scenario(args.k, rng)
    low = np.linalg.cholesky(sigma)
    window = mu + rng.standard_normal((args.n, args.k)) @ low.T
    return window, [f"A{i + 1}" for i in range(args.k)], (mu, sigma)


def _fit_all(args, names):
    window, assets, truth = _load_window(args)
    if truth is None and "population" in names:
        raise CliUsageError("the population estimator needs a synthetic scenario (omit --returns)")
    if args.measure == "coherent" and args.rho_tau is None:
        raise CliUsageError("--measure coherent requires --rho-tau")
    spec = RiskSpec(args.measure, args.alpha, rho_tau=args.rho_tau)
    mu, sigma = truth if truth is not None else (None, None)
    return {m: fit_method(m, window, mu, sigma, spec) for m in names}, assets


# --- commands ---------------------------------------------------------------


def cmd_simulate(args) -> int:
    ns = args.n or [100, 200]
    alphas = args.alpha or [0.95, 0.99]
    if args.k:
        cells = [(n, k, a) for a in alphas for n in ns for k in args.k]
    else:
        cells = study_grid(ns, args.c or [0.1, 0.3, 0.5, 0.7], alphas)
    rows, nested = [], []
    for n, k, alpha in cells:
        config = SimulationConfig(n, k, alpha, args.runs, args.seed, tuple(args.methods), args.measure, args.workers)
        try:
            result = run_performance_study(config)
        except EmptyResultError:
            result = run_existence_study(config)
            result.effective_runs = 0
        absent = result.effective_runs < max(1, math.ceil(args.min_effective * config.runs))
        cell_rows = result.to_rows()
        for row in cell_rows:
            if absent:
                row.update(exceedance=math.nan, mean_abs_dev=math.nan, sd_abs_dev=math.nan)
        rows += cell_rows
        nested.append({
            "n": n, "k": k, "alpha": alpha, "runs": config.runs, "seed": config.seed,
            "measure": config.measure, "effective_runs": result.effective_runs, "absent": absent,
            "methods": {r["method"]: {c: r[c] for c in STUDY_COLUMNS[4:8]} for r in cell_rows},
        })
    if args.format == "json":
        _emit(args, _json_text({"studies": nested}))
    else:
        _emit(args, _csv_text(STUDY_COLUMNS, rows))
    return 0


def cmd_backtest(args) -> int:
    if not args.returns:
        raise CliUsageError("backtest requires --returns")
    if not Path(args.returns).is_file():
        raise CliUsageError(f"returns file not found: {args.returns}")
    if "population" in args.methods:
        raise CliUsageError("the population estimator is unavailable on observed data")
    series = load_returns_csv(args.returns)
    config = BacktestConfig(args.n, args.k, args.alpha, args.portfolios, args.seed,
                            tuple(args.methods), args.measure, workers=args.workers)
    report = rolling_backtest(series, config)
    rows = report.to_rows()
    if args.format == "json":
        _emit(args, _json_text({
            "alpha": config.alpha, "n": config.n, "k": config.k, "portfolios": config.portfolios,
            "seed": config.seed, "evaluation_dates": report.evaluation_dates,
            "effective_portfolios": report.effective_portfolios,
            "methods": {r["method"]: {"exceedance": r["exceedance"], "existence_failures": r["existence_failures"]}
                        for r in rows},
        }))
    else:
        _emit(args, _csv_text(BACKTEST_COLUMNS, rows))
    return 0


def cmd_frontier(args) -> int:
    fits, _ = _fit_all(args, args.estimator)
    summaries = {m: gmv_summary(inputs) for m, (inputs, _) in fits.items()}
    lo = min(g.ret for g in summaries.values())
    hi = max(g.ret + 4.0 * math.sqrt(g.slope * g.variance) for g in summaries.values())
    grid = np.linspace(lo, hi, args.points)
    rows, payload = [], {}
    for m, (inputs, mspec) in fits.items():
        curve = frontier_mean_q(inputs, mspec, grid, estimator=m)
        rows += [{"estimator": m, "R": r, "Q": q} for r, q in zip(curve.x, curve.y)]
        entry = {"R": curve.x, "Q": curve.y, "gmv": {"R": curve.gmv_point[0], "Q": curve.gmv_point[1]}}
        rows.append({"estimator": f"{m}@gmv", "R": curve.gmv_point[0], "Q": curve.gmv_point[1]})
        try:
            port = gmq_portfolio(inputs, mspec)
        except ExistenceError:
            entry["gmq"] = None
        else:
            entry["gmq"] = {"R": port.ret, "Q": port.risk}
            rows.append({"estimator": f"{m}@gmq", "R": port.ret, "Q": port.risk})
        payload[m] = entry
    if args.format == "json":
        _emit(args, _json_text({"alpha": args.alpha, "measure": args.measure, "estimators": payload}))
    else:
        _emit(args, _csv_text(FRONTIER_COLUMNS, rows))
    return 0


def cmd_gmq(args) -> int:
    name = args.estimator[0]
    fits, assets = _fit_all(args, [name])
    inputs, mspec = fits[name]
    port = gmq_portfolio(inputs, mspec)
    payload = {
        "estimator": name, "measure": args.measure, "alpha": args.alpha,
        "assets": assets, "weights": port.weights, "return": port.ret,
        "variance": port.variance, "risk": port.risk, "q_alpha": port.q_alpha,
    }
    if args.format == "json":
        _emit(args, _json_text(payload))
    else:
        rows = [{"asset": a, "weight": w} for a, w in zip(assets, port.weights)]
        _emit(args, _csv_text(["asset", "weight"], rows))
    return 0


def cmd_risk(args) -> int:
    if not args.weights:
        raise CliUsageError("risk requires --weights")
    name = args.estimator[0]
    fits, assets = _fit_all(args, [name])
    inputs, mspec = fits[name]
    value = portfolio_risk(inputs, np.array(args.weights), mspec)
    if args.format == "json":
        _emit(args, _json_text({"estimator": name, "measure": args.measure, "alpha": args.alpha, "risk": value}))
    else:
        _emit(args, _csv_text(["estimator", "risk"], [{"estimator": name, "risk": value}]))
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "backtest": cmd_backtest,
    "frontier": cmd_frontier,
    "gmq": cmd_gmq,
    "risk": cmd_risk,
}


def _fail(kind: str, message: str, code: int, **extra) -> int:
    record = {"error": kind, "message": message.replace("\n", " "), **extra}
    sys.stderr.write(json.dumps(_jsonable(record)) + "\n")
    return code


def run_command(argv: list[str] | None = None) -> int:
    """Run one subcommand; return the process exit status."""
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
        return COMMANDS[args.command](args)
    except (CliUsageError, DomainError, UsageError) as exc:
        return _fail("usage", str(exc), EXIT_USAGE)
    except ExistenceError as exc:
        return _fail("existence", str(exc), EXIT_EXISTENCE, q_squared=exc.q_squared, threshold=exc.threshold)
    except BayesGMQError as exc:
        return _fail(type(exc).__name__, str(exc), 1)


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
