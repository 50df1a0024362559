"""VaR, CVaR and coherent risk of portfolio returns.

All three measures share the form ``Q(w) = -w'm + q * scale(w)`` where ``q``
is a coefficient that depends only on the measure, the confidence level and
(for the Bayesian estimator) the predictive degrees of freedom.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy import optimize, special

from .exceptions import DomainError, UndefinedRiskError, UsageError
from .returns_model import PosteriorParams

Measure = Literal["VaR", "CVaR", "coherent"]
Estimator = Literal["bayesian", "conventional", "population"]

_MEASURES = ("VaR", "CVaR", "coherent")
_ESTIMATORS = ("bayesian", "conventional", "population")


@dataclass(frozen=True)
class RiskSpec:
    """Which risk measure to evaluate and under which estimator.

    Parameters
    ----------
    measure : {"VaR", "CVaR", "coherent"}
    alpha : float
        Confidence level in ``(0.5, 1)``. Ignored for ``"coherent"``.
    estimator : {"bayesian", "conventional", "population"}
        ``"bayesian"`` uses the posterior predictive t law; the other two use
        normal quantiles with plug-in or true moments.
    rho_tau : float, optional
        Value of the coherent risk functional at the standardized error
        variable. Required when ``measure="coherent"``.
    """

    measure: Measure = "VaR"
    alpha: float = 0.95
    estimator: Estimator = "bayesian"
    rho_tau: float | None = None

    def __post_init__(self):
        if self.measure not in _MEASURES:
            raise DomainError(f"unknown risk measure {self.measure!r}")
        if self.estimator not in _ESTIMATORS:
            raise DomainError(f"unknown estimator {self.estimator!r}")
        if self.measure == "coherent":
            if self.rho_tau is None or not math.isfinite(self.rho_tau):
                raise DomainError("coherent risk needs a finite rho_tau")
        elif not 0.5 < self.alpha < 1.0:
            raise DomainError(f"alpha must lie in (0.5, 1), got {self.alpha}")

    def with_estimator(self, estimator: Estimator) -> "RiskSpec":
        return RiskSpec(self.measure, self.alpha, estimator, self.rho_tau)


@dataclass(frozen=True)
class MomentParams:
    """Mean vector and covariance matrix of a normal return model."""

    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        sigma = np.atleast_2d(np.asarray(self.sigma, dtype=float))
        if sigma.shape != (mu.size, mu.size):
            raise DomainError(f"sigma shape {sigma.shape} incompatible with mu of length {mu.size}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "sigma", sigma)

    @property
    def k(self) -> int:
        return self.mu.size


# --- Student t distribution -------------------------------------------------


def _t_upper_tail(x: float, d: float) -> float:
    """``P(T > x)`` for ``x >= 0``, accurate in relative terms in the tail."""
    x2 = x * x
    if x2 < d:
        # central region: P(|T| <= x) = I_{x^2/(d+x^2)}(1/2, d/2)
        return 0.5 - 0.5 * float(special.betainc(0.5, 0.5 * d, x2 / (d + x2)))
    # tail region: P(|T| > x) = I_{d/(d+x^2)}(d/2, 1/2)
    return 0.5 * float(special.betainc(0.5 * d, 0.5, d / (d + x2)))


def t_cdf(x: float, d: float) -> float:
    """CDF of the standard t distribution via the regularized incomplete beta.

    The argument of the incomplete beta is chosen so that it stays away from 1,
    which keeps full relative accuracy in both the centre and the tails.
    """
    if not d > 0:
        raise DomainError(f"degrees of freedom must be positive, got {d}")
    x = float(x)
    if x == 0.0:
        return 0.5
    if math.isinf(x):
        return 1.0 if x > 0 else 0.0
    tail = _t_upper_tail(abs(x), d)
    return 1.0 - tail if x > 0 else tail


def t_pdf(x: float, d: float) -> float:
    logc = special.gammaln(0.5 * (d + 1)) - special.gammaln(0.5 * d) - 0.5 * math.log(math.pi * d)
    return math.exp(logc - 0.5 * (d + 1) * math.log1p(x * x / d))


def t_quantile(d: float, p: float) -> float:
    """Quantile of the standard t distribution with ``d`` degrees of freedom.

    The root of ``P(T > x) = min(p, 1 - p)`` is bracketed by doubling and then
    refined with Brent's method. Working with the tail probability (exact for
    either half of the unit interval) keeps full relative accuracy far out in
    the tails; the CDF residual stays below ``1e-12``.
    """
    if not d > 0:
        raise DomainError(f"degrees of freedom must be positive, got {d}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"probability must lie in (0, 1), got {p}")
    if p == 0.5:
        return 0.0
    tail = 1.0 - p if p > 0.5 else p

    hi = 1.0
    while _t_upper_tail(hi, d) > tail:
        hi *= 2.0
        if not math.isfinite(hi):
            raise DomainError(f"t quantile at p={p} overflows for d={d}")
    lo = 0.0 if hi == 1.0 else 0.5 * hi
    x = optimize.brentq(
        lambda v: _t_upper_tail(v, d) - tail, lo, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=500
    )
    return float(x) if p > 0.5 else -float(x)


def normal_quantile(p: float) -> float:
    if not 0.0 < p < 1.0:
        raise DomainError(f"probability must lie in (0, 1), got {p}")
    return float(special.ndtri(p))


# --- coefficients -----------------------------------------------------------


def t_cvar_coefficient(d: float, alpha: float) -> float:
    """Expected shortfall ``E[-tau | -tau >= d_alpha]`` of a standard t variable."""
    if not d > 1:
        raise UndefinedRiskError(f"CVaR of a t law needs d > 1, got d={d}")
    q = t_quantile(d, alpha)
    log_ratio = special.gammaln(0.5 * (d + 1)) - special.gammaln(0.5 * d)
    log_k = (
        log_ratio
        - 0.5 * math.log(math.pi * d)
        + math.log(d / (d - 1))
        - 0.5 * (d - 1) * math.log1p(q * q / d)
    )
    return math.exp(log_k) / (1.0 - alpha)


def risk_coefficient(spec: RiskSpec, d: float | None = None) -> float:
    """Multiplier ``q`` of the scale term in ``Q(w)``.

    Bayesian VaR uses the t quantile ``d_alpha``; Bayesian CVaR the t expected
    shortfall ``k_alpha``. Conventional and population modes use the standard
    normal analogues and ignore ``d``. Coherent measures pass ``rho_tau``
    through unchanged.
    """
    if spec.measure == "coherent":
        return float(spec.rho_tau)
    if spec.estimator == "bayesian":
        if d is None:
            raise UsageError("the Bayesian risk coefficient needs degrees of freedom")
        if spec.measure == "VaR":
            return t_quantile(d, spec.alpha)
        return t_cvar_coefficient(d, spec.alpha)
    z = normal_quantile(spec.alpha)
    if spec.measure == "VaR":
        return z
    return math.exp(-0.5 * z * z) / ((1.0 - spec.alpha) * math.sqrt(2.0 * math.pi))


def coherent_to_var_level(rho_tau: float, d: float) -> float:
    """Confidence level ``beta = F_d(rho_tau)`` at which VaR equals the coherent risk."""
    return t_cdf(rho_tau, d)


# --- portfolio risk ---------------------------------------------------------


def check_weights(w, k: int) -> np.ndarray:
    w = np.asarray(w, dtype=float).ravel()
    if w.size != k:
        raise DomainError(f"expected {k} weights, got {w.size}")
    if not np.all(np.isfinite(w)):
        raise DomainError("weights must be finite")
    total = math.fsum(w)
    if abs(total - 1.0) > 1e-12 * max(1.0, float(np.abs(w).sum())):
        raise DomainError(f"weights must sum to 1, got {total!r}")
    return w


def portfolio_risk(params: PosteriorParams | MomentParams, w, spec: RiskSpec) -> float:
    """Risk ``Q(w)`` of the portfolio with weights ``w``.

    Bayesian: ``-w'xbar + q * sqrt(r * w'Sw)``.
    Conventional/population: ``-w'mu + q * sqrt(w'Sigma w)``.
    """
    if isinstance(params, PosteriorParams):
        if spec.estimator != "bayesian":
            raise UsageError(f"posterior parameters need the bayesian estimator, not {spec.estimator!r}")
        w = check_weights(w, params.k)
        q = risk_coefficient(spec, params.d)
        quad = float(w @ params.S @ w)
        return float(-(w @ params.xbar) + q * math.sqrt(params.r * quad))
    if isinstance(params, MomentParams):
        if spec.estimator == "bayesian":
            raise UsageError("mean/covariance inputs need the conventional or population estimator")
        w = check_weights(w, params.k)
        q = risk_coefficient(spec)
        quad = float(w @ params.sigma @ w)
        return float(-(w @ params.mu) + q * math.sqrt(quad))
    raise UsageError(f"unsupported parameter object {type(params).__name__}")
