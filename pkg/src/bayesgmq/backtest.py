"""Rolling-window evaluation of GMVaR portfolio estimates on return data.

Random asset subsets ("portfolios") are drawn once and kept for the whole
sample. At every row ``t >= n`` each method is refit on rows ``t-n .. t-1``
and its predicted GMQ risk is compared with the realized loss at row ``t``.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

from .exceptions import DegenerateDataError, DomainError, EmptyResultError, ParseError
from .optimizer import default_return_grid, existence_margin, frontier_mean_q, gmq_portfolio, gmv_summary
from .predictive import make_rng
from .returns_model import ReturnSeries
from .risk_measures import RiskSpec
from .simulation import fit_method

BACKTEST_METHODS = ("jeffreys", "conjugate", "conventional")


def load_returns_csv(path) -> ReturnSeries:
    """Read a return series written as ``date,<asset>,<asset>,...``.

    Dates must be ISO-8601 and strictly increasing; every cell must hold a
    finite decimal number.

    Raises
    ------
    ParseError
        With the 1-based line number (and column name for cell errors).
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError("empty file", 1) from None
        header = [h.strip() for h in header]
        if len(header) < 2 or not all(header[1:]):
            raise ParseError("header must be a date column followed by asset identifiers", 1)
        assets = header[1:]
        if len(set(assets)) != len(assets):
            raise ParseError("duplicate asset identifiers in header", 1)

        dates, rows, seen = [], [], set()
        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, found {len(row)}", line)
            try:
                stamp = date.fromisoformat(row[0].strip())
            except ValueError:
                raise ParseError(f"invalid ISO-8601 date {row[0]!r}", line, header[0]) from None
            if stamp in seen:
                raise ParseError(f"duplicate date {stamp.isoformat()}", line, header[0])
            if dates and stamp < dates[-1]:
                raise ParseError(f"date {stamp.isoformat()} is earlier than the previous row", line, header[0])
            seen.add(stamp)
            values = []
            for name, cell in zip(assets, row[1:]):
                text = cell.strip()
                if not text:
                    raise ParseError("blank cell", line, name)
                try:
                    value = float(text)
                except ValueError:
                    raise ParseError(f"cannot parse {text!r} as a number", line, name) from None
                if not math.isfinite(value):
                    raise ParseError(f"non-finite value {text!r}", line, name)
                values.append(value)
            dates.append(stamp)
            rows.append(values)
    if not rows:
        raise ParseError("no data rows", 2)
    return ReturnSeries(dates, assets, np.array(rows))


def write_returns_csv(series: ReturnSeries, path) -> None:
    """Write ``series`` so that :func:`load_returns_csv` reproduces it bit for bit."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["date", *series.assets])
        for stamp, row in zip(series.dates, series.values):
            writer.writerow([stamp.isoformat(), *(format(float(v), ".17g") for v in row)])


def sample_portfolios(universe, k: int, count: int, rng) -> list[np.ndarray]:
    """Draw ``count`` asset subsets of size ``k`` uniformly without replacement.

    ``universe`` is a sequence of asset identifiers or its length. If ``rng`` is
    an integer seed, subset ``i`` is drawn from ``make_rng(rng, i)``; a
    ``Generator`` is consumed sequentially.
    """
    size = universe if isinstance(universe, (int, np.integer)) else len(universe)
    if not 1 <= k <= size:
        raise DomainError(f"portfolio size k={k} must lie in [1, {size}]")
    if count < 1:
        raise DomainError(f"portfolio count must be positive, got {count}")
    sets = []
    for i in range(count):
        gen = rng if isinstance(rng, np.random.Generator) else make_rng(int(rng), i)
        sets.append(np.sort(gen.choice(size, size=k, replace=False)))
    return sets


@dataclass(frozen=True)
class BacktestConfig:
    n: int = 100
    k: int = 10
    alpha: float = 0.95
    portfolios: int = 500
    seed: int = 0
    methods: tuple = BACKTEST_METHODS
    measure: str = "VaR"
    snapshot_rows: tuple = ()
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        object.__setattr__(self, "snapshot_rows", tuple(self.snapshot_rows))
        unknown = set(self.methods) - set(BACKTEST_METHODS)
        if unknown:
            raise DomainError(f"unknown backtest methods {sorted(unknown)}")
        if self.portfolios < 1 or self.k < 1:
            raise DomainError("portfolio count and k must be positive")
        if not 0.5 < self.alpha < 1:
            raise DomainError(f"alpha must lie in (0.5, 1), got {self.alpha}")


@dataclass
class BacktestReport:
    """Exceedance frequencies averaged over all (portfolio, date) cells.

    ``existence_failures[m]`` counts portfolios for which method ``m`` failed
    the existence condition at least once. Portfolios where any method failed
    are excluded from every exceedance frequency.
    """

    config: BacktestConfig
    exceedance: dict = field(default_factory=dict)
    existence_failures: dict = field(default_factory=dict)
    effective_portfolios: int = 0
    evaluation_dates: int = 0
    snapshots: dict = field(default_factory=dict)

    def to_rows(self) -> list[dict]:
        cfg = self.config
        return [
            {
                "alpha": cfg.alpha,
                "n": cfg.n,
                "k": cfg.k,
                "method": m,
                "exceedance": self.exceedance.get(m, math.nan),
                "existence_failures": self.existence_failures[m],
                "effective_portfolios": self.effective_portfolios,
            }
            for m in cfg.methods
        ]


def _evaluate_portfolio(args):
    values, cols, config, index = args
    sub = values[:, cols]
    T = sub.shape[0]
    spec = RiskSpec(config.measure, config.alpha)
    failed = {m: False for m in config.methods}
    hits = {m: 0 for m in config.methods}
    snapshots = {}
    for t in range(config.n, T):
        window = sub[t - config.n:t]
        fits = {}
        for m in config.methods:
            try:
                inputs, mspec = fit_method(m, window, None, None, spec)
            except DegenerateDataError as exc:
                raise DegenerateDataError(f"portfolio {index}, row {t}, method {m}: {exc}") from exc
            q2, threshold = existence_margin(inputs, mspec)
            if not q2 > threshold:
                failed[m] = True
            fits[m] = (inputs, mspec)
        if any(failed.values()):
            continue
        for m, (inputs, mspec) in fits.items():
            port = gmq_portfolio(inputs, mspec)
            loss = -float(port.weights @ sub[t])
            hits[m] += loss >= port.risk
        if t in config.snapshot_rows:
            snapshots[t] = _snapshot(fits)
    return failed, hits, snapshots


def _snapshot(fits) -> dict:
    curves = {}
    for m, (inputs, mspec) in fits.items():
        gmv = gmv_summary(inputs)
        if gmv.slope > 0:
            curves[m] = frontier_mean_q(inputs, mspec, default_return_grid(gmv), estimator=m)
    return curves


def rolling_backtest(series: ReturnSeries, config: BacktestConfig) -> BacktestReport:
    """Evaluate every method on every (portfolio, date) cell.

    Raises
    ------
    DomainError
        If the series is too short or ``k`` exceeds the number of assets.
    DegenerateDataError
        If a window's scale matrix is singular, with portfolio/row context.
    EmptyResultError
        If every portfolio is excluded by the existence filter.
    """
    values = np.asarray(series.values, dtype=float)
    T, universe = values.shape
    if not T > config.n + 1:
        raise DomainError(f"series has {T} rows; need more than n + 1 = {config.n + 1}")
    if config.k > universe:
        raise DomainError(f"k={config.k} exceeds universe size {universe}")
    sets = sample_portfolios(universe, config.k, config.portfolios, config.seed)
    jobs = [(values, cols, config, i) for i, cols in enumerate(sets)]
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(_evaluate_portfolio, jobs))
    else:
        results = [_evaluate_portfolio(job) for job in jobs]

    dates = T - config.n
    report = BacktestReport(config, evaluation_dates=dates)
    report.existence_failures = {m: sum(f[m] for f, _, _ in results) for m in config.methods}
    kept = [(hits, snaps, i) for i, (f, hits, snaps) in enumerate(results) if not any(f.values())]
    report.effective_portfolios = len(kept)
    if not kept:
        raise EmptyResultError("every portfolio failed an existence condition at some date")
    cells = dates * len(kept)
    report.exceedance = {m: sum(h[m] for h, _, _ in kept) / cells for m in config.methods}
    report.snapshots = {(i, series.dates[t]): curves for _, snaps, i in kept for t, curves in snaps.items()}
    return report

