"""Global minimum variance, mean-variance and global minimum quantile portfolios.

Every routine accepts either :class:`~bayesgmq.returns_model.PosteriorParams`
(Bayesian mode, predictive t law) or
:class:`~bayesgmq.risk_measures.MomentParams` (conventional plug-in or
population mode, normal law). In both modes the optimal portfolios are
expressed through three constants: the GMV return ``R_GMV``, the GMV variance
``V_GMV`` and the slope ``s = m' M m`` with
``M = A^{-1} - A^{-1} 1 1' A^{-1} / (1' A^{-1} 1)`` for the scale matrix ``A``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._linalg import cholesky_lower, pd_solve
from .exceptions import DomainError, ExistenceError, UndefinedRiskError, UsageError
from .returns_model import PosteriorParams, sufficient_statistics
from .risk_measures import MomentParams, RiskSpec, portfolio_risk, risk_coefficient

Inputs = PosteriorParams | MomentParams


@dataclass(frozen=True)
class GmvSummary:
    """Global minimum variance portfolio and the frontier slope.

    Attributes
    ----------
    weights : ndarray of shape (k,)
    ret : float
        Expected (predictive) return ``R_GMV``.
    variance : float
        (Predictive) variance ``V_GMV``.
    slope : float
        ``s = m' M m``; zero exactly when all expected returns are equal.
    m_mean : ndarray of shape (k,)
        ``M m``, the direction along which efficient portfolios move.
    """

    weights: np.ndarray
    ret: float
    variance: float
    slope: float
    m_mean: np.ndarray


@dataclass(frozen=True)
class GmqPortfolio:
    """Portfolio minimizing ``Q(w)`` subject only to full investment."""

    weights: np.ndarray
    ret: float
    variance: float
    risk: float
    q_alpha: float


@dataclass(frozen=True)
class FrontierCurve:
    """Points of an efficient frontier.

    ``x`` holds returns ``R`` for mean-Q curves (with ``y = Q``) and
    variances ``V`` for mean-variance curves (with ``y = R``).
    """

    x: np.ndarray
    y: np.ndarray
    mode: str
    estimator: str
    gmv_point: tuple[float, float]

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.x.tolist(), self.y.tolist()))


def conventional_estimates(window, ddof: int = 1) -> MomentParams:
    """Sample mean and sample covariance (divisor ``n - ddof``) of a window."""
    window = np.asarray(window, dtype=float)
    if window.ndim == 1:
        window = window[:, None]
    n, k = window.shape
    if not n > k + 1:
        raise DomainError(f"conventional estimates need n > k + 1, got n={n}, k={k}")
    mean, scatter = sufficient_statistics(window)
    sigma = scatter / (n - ddof)
    cholesky_lower(sigma, "sample covariance")
    return MomentParams(mean, sigma)


def _scale_parts(inputs: Inputs):
    """Cholesky factor of the scale matrix, location vector, variance factor."""
    if isinstance(inputs, PosteriorParams):
        if not inputs.d > 2:
            raise UndefinedRiskError(f"predictive variance needs d > 2, got d={inputs.d}")
        c = inputs.d * inputs.r / (inputs.d - 2)
        return inputs.chol, inputs.xbar, c
    if isinstance(inputs, MomentParams):
        return cholesky_lower(inputs.sigma, "covariance matrix"), inputs.mu, 1.0
    raise UsageError(f"unsupported input object {type(inputs).__name__}")


def gmv_summary(inputs: Inputs) -> GmvSummary:
    """Weights, return, variance and slope of the global minimum variance portfolio."""
    low, m, c = _scale_parts(inputs)
    k = m.size
    ones = np.ones(k)
    solved = pd_solve(low, np.column_stack([ones, m]))
    inv_one, inv_m = solved[:, 0], solved[:, 1]
    a = math.fsum(inv_one)
    weights = inv_one / a
    ret = float(ones @ inv_m) / a
    m_mean = inv_m - inv_one * ret
    slope = max(float(m @ m_mean), 0.0)
    return GmvSummary(weights, ret, c / a, slope, m_mean)


def mean_variance_weights(inputs: Inputs, target: float) -> np.ndarray:
    """Minimum-variance weights with expected return equal to ``target``."""
    gmv = gmv_summary(inputs)
    if gmv.slope == 0.0:
        if target == gmv.ret:
            return gmv.weights.copy()
        raise DomainError(
            f"all expected returns are equal; only target {gmv.ret!r} is attainable, got {target!r}"
        )
    return gmv.weights + (target - gmv.ret) / gmv.slope * gmv.m_mean


def _mode(inputs: Inputs, spec: RiskSpec) -> RiskSpec:
    if isinstance(inputs, PosteriorParams) and spec.estimator != "bayesian":
        raise UsageError(f"posterior parameters need the bayesian estimator, not {spec.estimator!r}")
    if isinstance(inputs, MomentParams) and spec.estimator == "bayesian":
        raise UsageError("mean/covariance inputs need the conventional or population estimator")
    return spec


def existence_margin(inputs: Inputs, spec: RiskSpec, gmv: GmvSummary | None = None) -> tuple[float, float]:
    """Return ``(q^2, threshold)``; the GMQ portfolio exists iff ``q^2 > threshold``.

    The threshold is ``s / r`` in Bayesian mode and ``s`` otherwise.
    """
    _mode(inputs, spec)
    gmv = gmv_summary(inputs) if gmv is None else gmv
    if isinstance(inputs, PosteriorParams):
        q = risk_coefficient(spec, inputs.d)
        return q * q, gmv.slope / inputs.r
    q = risk_coefficient(spec)
    return q * q, gmv.slope


def gmq_exists(inputs: Inputs, spec: RiskSpec) -> bool:
    q2, threshold = existence_margin(inputs, spec)
    return q2 > threshold


def gmq_portfolio(inputs: Inputs, spec: RiskSpec) -> GmqPortfolio:
    """Global minimum VaR / CVaR / coherent-risk portfolio.

    Raises
    ------
    ExistenceError
        If ``q^2 <= s / r`` (Bayesian) or ``q^2 <= s`` (normal-based); the
        objective is then unbounded below along the efficient frontier.
    """
    gmv = gmv_summary(inputs)
    q2, threshold = existence_margin(inputs, spec, gmv)
    q = risk_coefficient(spec, inputs.d if isinstance(inputs, PosteriorParams) else None)
    if not (q > 0 and q2 > threshold):
        raise ExistenceError(q2, threshold)
    gap = math.sqrt(q2 - threshold)
    if isinstance(inputs, PosteriorParams):
        d, r = inputs.d, inputs.r
        shrink = math.sqrt((d - 2) / d)
        step = math.sqrt(gmv.variance) * shrink / (r * gap)
        ret = gmv.ret + threshold * math.sqrt(gmv.variance) * shrink / gap
        variance = q2 / (q2 - threshold) * gmv.variance
        risk = -ret + q * shrink * math.sqrt(variance)
    else:
        step = math.sqrt(gmv.variance) / gap
        ret = gmv.ret + threshold * step
        variance = q2 / (q2 - threshold) * gmv.variance
        risk = -ret + q * math.sqrt(variance)
    weights = gmv.weights + step * gmv.m_mean
    return GmqPortfolio(weights, ret, variance, risk, q)


def frontier_mean_q(inputs: Inputs, spec: RiskSpec, r_grid: Sequence[float], estimator: str | None = None) -> FrontierCurve:
    """Efficient frontier in the (mean, Q) plane, evaluated on ``r_grid``.

    Bayesian: ``Q = q sqrt((R - R_GMV)^2 r / s + (d - 2) / d * V_GMV) - R``.
    Normal-based: ``Q = q sqrt((R - R_GMV)^2 / s + V_GMV) - R``.
    ``gmv_point`` is ``(R_GMV, Q(w_GMV))``.
    """
    _mode(inputs, spec)
    grid = np.asarray(r_grid, dtype=float)
    if grid.size > 1 and not np.all(np.diff(grid) > 0):
        raise DomainError("return grid must be strictly increasing")
    gmv = gmv_summary(inputs)
    if gmv.slope == 0.0:
        raise DomainError("degenerate frontier: slope s = 0 (all expected returns equal)")
    if isinstance(inputs, PosteriorParams):
        q = risk_coefficient(spec, inputs.d)
        spread = gmv.slope / inputs.r
        base = (inputs.d - 2) / inputs.d * gmv.variance
    else:
        q = risk_coefficient(spec)
        spread = gmv.slope
        base = gmv.variance
    y = q * np.sqrt((grid - gmv.ret) ** 2 / spread + base) - grid
    gmv_q = portfolio_risk(inputs, gmv.weights, spec)
    return FrontierCurve(grid, y, "mean-Q", estimator or spec.estimator, (gmv.ret, gmv_q))


def frontier_mean_variance(inputs: Inputs, v_grid: Sequence[float], estimator: str | None = None) -> FrontierCurve:
    """Upper branch ``R = R_GMV + sqrt(a (V - V_GMV))`` of the mean-variance parabola.

    ``a = (d - 2) / (d r) * s`` in Bayesian mode and ``a = s`` otherwise.
    """
    grid = np.asarray(v_grid, dtype=float)
    gmv = gmv_summary(inputs)
    # tolerate rounding at the vertex only
    if np.any(grid < gmv.variance * (1 - 1e-12)):
        raise DomainError(f"variance grid must not go below V_GMV={gmv.variance!r}")
    if isinstance(inputs, PosteriorParams):
        a = (inputs.d - 2) / (inputs.d * inputs.r) * gmv.slope
        name = estimator or "bayesian"
    else:
        a = gmv.slope
        name = estimator or "population"
    y = gmv.ret + np.sqrt(a * np.maximum(grid - gmv.variance, 0.0))
    return FrontierCurve(grid, y, "mean-variance", name, (gmv.variance, gmv.ret))


def default_return_grid(gmv: GmvSummary, points: int = 200, width: float = 4.0) -> np.ndarray:
    """Presentation grid ``[R_GMV, R_GMV + width * sqrt(s V_GMV)]``."""
    span = width * math.sqrt(gmv.slope * gmv.variance)
    if span == 0.0:
        span = width * math.sqrt(gmv.variance)
    return np.linspace(gmv.ret, gmv.ret + span, points)
