"""Moments of, and sampling from, the posterior predictive distribution."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError, UndefinedRiskError
from .returns_model import PosteriorParams
from .risk_measures import check_weights


@dataclass(frozen=True)
class PredictiveSummary:
    """Predictive mean and variance of a portfolio return.

    ``variance`` is ``nan`` when ``d <= 2`` (only returned through
    :func:`predictive_moments` with ``allow_infinite_variance=True``).
    """

    mean: float
    variance: float
    d: float
    scale: float


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Deterministic generator for the pair ``(seed, stream)``.

    Distinct streams of one seed are statistically independent, which is how
    parallel chunks and simulation runs get their own generators.
    """
    if seed < 0 or stream < 0:
        raise DomainError("seed and stream must be non-negative integers")
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(stream)]))


def _as_rng(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return make_rng(int(rng))


def predictive_moments(params: PosteriorParams, w, allow_infinite_variance: bool = False) -> PredictiveSummary:
    """Mean ``w'xbar`` and variance ``d r w'Sw / (d - 2)`` of the predictive law."""
    w = check_weights(w, params.k)
    d = params.d
    scale = params.r * float(w @ params.S @ w)
    if not d > 1:
        raise UndefinedRiskError(f"predictive mean needs d > 1, got d={d}")
    mean = float(w @ params.xbar)
    if d > 2:
        variance = d * scale / (d - 2)
    elif allow_infinite_variance:
        variance = math.nan
    else:
        raise UndefinedRiskError(f"predictive variance needs d > 2, got d={d}")
    return PredictiveSummary(mean, variance, d, scale)


def sample_predictive_return(params: PosteriorParams, w, rng, m: int) -> np.ndarray:
    """Draw ``m`` portfolio returns ``w'xbar + tau * sqrt(r * w'Sw)``, ``tau ~ t(d)``."""
    w = check_weights(w, params.k)
    if m < 1:
        raise DomainError(f"sample size must be positive, got {m}")
    rng = _as_rng(rng)
    loc = float(w @ params.xbar)
    scale = math.sqrt(params.r * float(w @ params.S @ w))
    return loc + scale * rng.standard_t(params.d, size=m)


def sample_predictive_vector(params: PosteriorParams, rng, m: int | None = None) -> np.ndarray:
    """Draw asset return vectors from the multivariate predictive t law.

    A draw is ``xbar + sqrt(r) L z sqrt(d / chi2_d)`` with ``L`` the lower
    Cholesky factor of ``S`` and ``z`` standard normal.

    Returns
    -------
    ndarray of shape (k,) if ``m`` is None, else (m, k)
    """
    rng = _as_rng(rng)
    size = 1 if m is None else int(m)
    if size < 1:
        raise DomainError(f"sample size must be positive, got {size}")
    z = rng.standard_normal((size, params.k))
    mix = np.sqrt(params.d / rng.chisquare(params.d, size=size))
    draws = params.xbar + math.sqrt(params.r) * (z @ params.chol.T) * mix[:, None]
    return draws[0] if m is None else draws


def sample_compound_t(d: float, v: float, rng, m: int) -> np.ndarray:
    """Draw ``tau1 / sqrt(v d) + sqrt(1 + tau1^2 / d) * tau2 / sqrt(d + 1)``.

    ``tau1 ~ t(d)`` and ``tau2 ~ t(d + 1)`` are independent. The result is t
    distributed with ``d`` degrees of freedom and scale ``sqrt((v + 1) / (v d))``.
    """
    if not (d > 0 and v > 0):
        raise DomainError(f"d and v must be positive, got d={d}, v={v}")
    if m < 1:
        raise DomainError(f"sample size must be positive, got {m}")
    rng = _as_rng(rng)
    tau1 = rng.standard_t(d, size=m)
    tau2 = rng.standard_t(d + 1, size=m)
    return tau1 / math.sqrt(v * d) + np.sqrt(1.0 + tau1 * tau1 / d) * tau2 / math.sqrt(d + 1)
