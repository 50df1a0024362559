"""Monte Carlo study of global minimum VaR (or CVaR) portfolio estimates.

Each run draws a random normal market, simulates ``n`` return vectors, fits
every requested method, checks whether its GMQ portfolio exists, and, when all
of them exist, evaluates the predicted risk against one out-of-sample draw.
Run ``i`` uses the generator ``make_rng(seed, i)``, so results do not depend on
the number of worker processes.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .exceptions import DomainError, EmptyResultError
from .optimizer import existence_margin, gmq_portfolio, conventional_estimates
from .predictive import make_rng
from .returns_model import JeffreysPrior, empirical_bayes_hyperparams, posterior_params
from .risk_measures import MomentParams, RiskSpec

METHODS = ("jeffreys", "conjugate", "conventional", "population")

MU_RANGE = (-0.003, 0.005)
VOL_RANGE = (0.03, 0.04)
CORRELATION = 0.3


@dataclass(frozen=True)
class SimulationConfig:
    n: int = 100
    k: int = 10
    alpha: float = 0.95
    runs: int = 2000
    seed: int = 0
    methods: tuple = METHODS
    measure: str = "VaR"
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "methods", tuple(self.methods))
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise DomainError(f"unknown methods {sorted(unknown)}")
        if not self.methods:
            raise DomainError("at least one method is required")
        if self.k < 1 or self.runs < 1:
            raise DomainError("k and runs must be positive")
        if not self.n > self.k + 1:
            raise DomainError(f"need n > k + 1, got n={self.n}, k={self.k}")
        if not 0.5 < self.alpha < 1:
            raise DomainError(f"alpha must lie in (0.5, 1), got {self.alpha}")
        if self.measure not in ("VaR", "CVaR"):
            raise DomainError(f"measure must be VaR or CVaR, got {self.measure!r}")


@dataclass
class MethodResult:
    exceedance: float = math.nan
    mean_abs_dev: float = math.nan
    sd_abs_dev: float = math.nan
    existence_failures: int = 0


@dataclass
class StudyResult:
    """Per-method aggregates of one configuration.

    ``effective_runs`` counts runs in which every method's GMQ portfolio
    existed; exceedance and deviation statistics are computed over those runs
    only, while ``existence_failures`` is tallied per method over all runs.
    """

    config: SimulationConfig
    methods: dict = field(default_factory=dict)
    effective_runs: int = 0

    def to_rows(self) -> list[dict]:
        cfg = self.config
        return [
            {
                "method": name,
                "alpha": cfg.alpha,
                "n": cfg.n,
                "k": cfg.k,
                "exceedance": res.exceedance,
                "mean_abs_dev": res.mean_abs_dev,
                "sd_abs_dev": res.sd_abs_dev,
                "existence_failures": res.existence_failures,
                "effective_runs": self.effective_runs,
            }
            for name, res in self.methods.items()
        ]


def generate_scenario(k: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """Random mean vector and equicorrelated covariance matrix.

    ``mu_i ~ U(-0.003, 0.005)``, volatilities ``sigma_i ~ U(0.03, 0.04)`` and
    all pairwise correlations equal to 0.3.
    """
    if k < 1:
        raise DomainError(f"k must be positive, got {k}")
    if not isinstance(rng, np.random.Generator):
        rng = make_rng(int(rng))
    mu = rng.uniform(*MU_RANGE, size=k)
    vol = rng.uniform(*VOL_RANGE, size=k)
    corr = np.full((k, k), CORRELATION)
    np.fill_diagonal(corr, 1.0)
    sigma = corr * np.outer(vol, vol)
    return mu, sigma


def fit_method(method: str, window: np.ndarray, mu, sigma, spec: RiskSpec):
    if method == "jeffreys":
        return posterior_params(window, JeffreysPrior()), spec.with_estimator("bayesian")
    if method == "conjugate":
        prior = empirical_bayes_hyperparams(window)
        return posterior_params(window, prior), spec.with_estimator("bayesian")
    if method == "conventional":
        return conventional_estimates(window), spec.with_estimator("conventional")
    return MomentParams(mu, sigma), spec.with_estimator("population")


def _single_run(config: SimulationConfig, index: int, evaluate: bool):
    rng = make_rng(config.seed, index)
    mu, sigma = generate_scenario(config.k, rng)
    low = np.linalg.cholesky(sigma)
    window = mu + rng.standard_normal((config.n, config.k)) @ low.T
    future = mu + low @ rng.standard_normal(config.k)

    spec = RiskSpec(config.measure, config.alpha)
    fits = {}
    exists = {}
    for method in config.methods:
        inputs, mspec = fit_method(method, window, mu, sigma, spec)
        q2, threshold = existence_margin(inputs, mspec)
        fits[method] = (inputs, mspec)
        exists[method] = q2 > threshold
    if not evaluate or not all(exists.values()):
        return exists, None

    truth = gmq_portfolio(MomentParams(mu, sigma), spec.with_estimator("population"))
    outcome = {}
    for method, (inputs, mspec) in fits.items():
        port = gmq_portfolio(inputs, mspec)
        loss = -float(port.weights @ future)
        outcome[method] = (loss >= port.risk, abs(port.risk - truth.risk))
    return exists, outcome


def _run_chunk(args):
    config, indices, evaluate = args
    return [_single_run(config, i, evaluate) for i in indices]


def _execute(config: SimulationConfig, evaluate: bool) -> list:
    indices = list(range(config.runs))
    if config.workers <= 1:
        return _run_chunk((config, indices, evaluate))
    size = math.ceil(len(indices) / (4 * config.workers))
    chunks = [(config, indices[i:i + size], evaluate) for i in range(0, len(indices), size)]
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        parts = list(pool.map(_run_chunk, chunks))
    return [item for part in parts for item in part]


def _existence_counts(config, records) -> dict:
    return {
        m: MethodResult(existence_failures=sum(not exists[m] for exists, _ in records))
        for m in config.methods
    }


def run_existence_study(config: SimulationConfig) -> StudyResult:
    """Count, per method, the runs in which the GMQ existence condition fails."""
    records = _execute(config, evaluate=False)
    result = StudyResult(config, _existence_counts(config, records))
    result.effective_runs = sum(all(exists.values()) for exists, _ in records)
    return result


def run_performance_study(config: SimulationConfig) -> StudyResult:
    """Exceedance frequency and absolute deviation from the true GMQ risk.

    Raises
    ------
    EmptyResultError
        If no run had every method's portfolio exist simultaneously.
    """
    records = _execute(config, evaluate=True)
    methods = _existence_counts(config, records)
    outcomes = [out for _, out in records if out is not None]
    if not outcomes:
        raise EmptyResultError(
            f"no run out of {config.runs} had all GMQ portfolios exist (n={config.n}, k={config.k})"
        )
    for m, res in methods.items():
        hits = [out[m][0] for out in outcomes]
        devs = [out[m][1] for out in outcomes]
        res.exceedance = sum(hits) / len(hits)
        res.mean_abs_dev = math.fsum(devs) / len(devs)
        if len(devs) > 1:
            centred = [(x - res.mean_abs_dev) ** 2 for x in devs]
            res.sd_abs_dev = math.sqrt(math.fsum(centred) / (len(devs) - 1))
        else:
            res.sd_abs_dev = 0.0
    return StudyResult(config, methods, len(outcomes))


def study_grid(
    ns: Sequence[int] = (100, 200),
    ratios: Sequence[float] = (0.1, 0.3, 0.5, 0.7),
    alphas: Sequence[float] = (0.95, 0.99),
) -> list[tuple[int, int, float]]:
    """Default ``(n, k, alpha)`` grid with ``k = c n``."""
    return [(n, int(round(c * n)), a) for a in alphas for n in ns for c in ratios]
