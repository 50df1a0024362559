"""Return data, sufficient statistics and posterior predictive parameters.

Under either the non-informative (Jeffreys) prior or the normal-inverse-Wishart
conjugate prior, the posterior predictive law of a portfolio return ``w'X`` is a
univariate Student t with degrees of freedom ``d``, location ``w'xbar`` and
squared scale ``r * w'Sw``. :class:`PosteriorParams` carries that quadruple.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence, Union

import numpy as np

from ._linalg import cholesky_lower
from .exceptions import DegenerateDataError, DomainError, InsufficientDataError


@dataclass(frozen=True)
class ReturnSeries:
    """Dated matrix of per-asset logarithmic returns.

    Parameters
    ----------
    dates : sequence of datetime.date
        Strictly increasing observation dates, one per row.
    assets : sequence of str
        Asset identifiers, one per column.
    values : ndarray of shape (T, k)
        Logarithmic returns.
    """

    dates: tuple
    assets: tuple
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float, ndmin=2)
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(self, "assets", tuple(self.assets))
        object.__setattr__(self, "values", values)
        if values.shape[0] < 1:
            raise DomainError("a return series needs at least one row")
        if values.shape != (len(self.dates), len(self.assets)):
            raise DomainError(
                f"values shape {values.shape} does not match "
                f"{len(self.dates)} dates x {len(self.assets)} assets"
            )
        if not np.all(np.isfinite(values)):
            raise DomainError("return series contains non-finite entries")
        for prev, cur in zip(self.dates, self.dates[1:]):
            if not cur > prev:
                raise DomainError(f"dates must be strictly increasing ({prev} >= {cur})")

    @property
    def n_periods(self) -> int:
        return self.values.shape[0]

    @property
    def n_assets(self) -> int:
        return self.values.shape[1]

    def select(self, columns: Sequence[int]) -> "ReturnSeries":
        columns = list(columns)
        return ReturnSeries(self.dates, [self.assets[j] for j in columns], self.values[:, columns])


@dataclass(frozen=True)
class JeffreysPrior:
    """Non-informative prior, density proportional to ``|Sigma|^{-(k+1)/2}``."""

    name = "jeffreys"


@dataclass(frozen=True)
class ConjugatePrior:
    """Normal-inverse-Wishart prior.

    ``mu | Sigma ~ N(m0, Sigma / r0)`` and ``Sigma ~ IW(d0, S0)``.
    """

    m0: np.ndarray
    S0: np.ndarray
    r0: float
    d0: float
    name = "conjugate"

    def __post_init__(self):
        m0 = np.atleast_1d(np.asarray(self.m0, dtype=float))
        S0 = np.atleast_2d(np.asarray(self.S0, dtype=float))
        object.__setattr__(self, "m0", m0)
        object.__setattr__(self, "S0", S0)
        if S0.shape != (m0.size, m0.size):
            raise DomainError(f"S0 shape {S0.shape} incompatible with m0 of length {m0.size}")
        if not (self.r0 > 0 and self.d0 > 0):
            raise DomainError(f"r0 and d0 must be positive, got r0={self.r0}, d0={self.d0}")
        if not np.allclose(S0, S0.T, rtol=1e-12, atol=0.0):
            raise DomainError("S0 must be symmetric")
        cholesky_lower(S0, "prior scale S0")


PriorSpec = Union[JeffreysPrior, ConjugatePrior]


@dataclass(frozen=True)
class PosteriorParams:
    """Parameters ``(d, r, xbar, S)`` of the posterior predictive t law.

    Attributes
    ----------
    d : float
        Degrees of freedom.
    r : float
        Scale factor multiplying ``w'Sw``.
    xbar : ndarray of shape (k,)
        Predictive location vector.
    S : ndarray of shape (k, k)
        Un-normalized scale (scatter) matrix, symmetric positive definite.
    n : int
        Sample size of the fitting window.
    prior : str
        ``"jeffreys"`` or ``"conjugate"``.
    """

    d: float
    r: float
    xbar: np.ndarray
    S: np.ndarray
    n: int
    prior: str = "jeffreys"
    chol: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        xbar = np.atleast_1d(np.asarray(self.xbar, dtype=float))
        S = np.atleast_2d(np.asarray(self.S, dtype=float))
        object.__setattr__(self, "xbar", xbar)
        object.__setattr__(self, "S", S)
        if S.shape != (xbar.size, xbar.size):
            raise DomainError(f"S shape {S.shape} incompatible with xbar of length {xbar.size}")
        if not self.d > 0:
            raise DomainError(f"degrees of freedom must be positive, got {self.d}")
        if not self.r > 0:
            raise DomainError(f"scale factor r must be positive, got {self.r}")
        if self.chol is None:
            object.__setattr__(self, "chol", cholesky_lower(S, "scale matrix S"))

    @property
    def k(self) -> int:
        return self.xbar.size


def prices_to_log_returns(prices) -> np.ndarray:
    """Convert a ``(T+1, k)`` price matrix to ``(T, k)`` log returns."""
    prices = np.asarray(prices, dtype=float)
    if prices.ndim == 1:
        prices = prices[:, None]
    if prices.shape[0] < 2:
        raise InsufficientDataError("need at least two price rows to form one return")
    bad = np.argwhere(~(prices > 0))
    if bad.size:
        i, j = bad[0]
        raise DomainError(f"price at row {i}, column {j} is not strictly positive: {prices[i, j]!r}")
    return np.diff(np.log(prices), axis=0)


def sufficient_statistics(window) -> tuple[np.ndarray, np.ndarray]:
    """Sample mean and un-normalized scatter matrix of an ``(n, k)`` window.

    Returns
    -------
    mean : ndarray of shape (k,)
    scatter : ndarray of shape (k, k)
        ``sum_i (x_i - mean)(x_i - mean)'``, not divided by ``n`` or ``n - 1``.
    """
    window = np.asarray(window, dtype=float)
    if window.ndim == 1:
        window = window[:, None]
    n = window.shape[0]
    if n < 2:
        raise InsufficientDataError(f"need at least 2 observations, got {n}")
    mean = window.mean(axis=0)
    centered = window - mean
    scatter = centered.T @ centered
    scatter = 0.5 * (scatter + scatter.T)
    return mean, scatter


def posterior_params(window, prior: PriorSpec | None = None) -> PosteriorParams:
    """Posterior predictive parameters of the next-period return vector.

    Parameters
    ----------
    window : array-like of shape (n, k)
        Historical returns ``x_{t-n}, ..., x_{t-1}``.
    prior : JeffreysPrior or ConjugatePrior, default JeffreysPrior()

    Raises
    ------
    InsufficientDataError
        If ``n > k`` (Jeffreys) or ``n + d0 - 2k > 0`` (conjugate) fails.
    DegenerateDataError
        If the resulting scale matrix is singular.
    """
    if prior is None:
        prior = JeffreysPrior()
    mean, scatter = sufficient_statistics(window)
    n, k = int(np.shape(window)[0]), mean.size

    if isinstance(prior, JeffreysPrior):
        if not n > k:
            raise InsufficientDataError(f"Jeffreys prior requires n > k, got n={n}, k={k}")
        d = float(n - k)
        r = (n + 1) / (n * (n - k))
        return PosteriorParams(d, r, mean, scatter, n, "jeffreys")

    if isinstance(prior, ConjugatePrior):
        if prior.m0.size != k:
            raise DomainError(f"prior dimension {prior.m0.size} does not match k={k}")
        d = n + prior.d0 - 2 * k
        if not d > 0:
            raise InsufficientDataError(
                f"conjugate prior requires n + d0 - 2k > 0, got {n} + {prior.d0} - {2 * k}"
            )
        r0 = prior.r0
        r = (n + r0 + 1) / ((n + r0) * d)
        xbar = (n * mean + r0 * prior.m0) / (n + r0)
        dev = prior.m0 - xbar
        S = scatter + prior.S0 + n * r0 * np.outer(dev, dev) / (n + r0)
        S = 0.5 * (S + S.T)
        return PosteriorParams(float(d), r, xbar, S, n, "conjugate")

    raise DomainError(f"unknown prior specification {prior!r}")


def empirical_bayes_hyperparams(training, scale: str = "mean-matching") -> ConjugatePrior:
    """Data-driven conjugate hyperparameters with ``d0 = r0 = n``.

    ``m0`` is the training sample mean. ``S0`` is the sample covariance
    (divisor ``n - 1``) multiplied by ``d0 - k - 1`` so that the prior mean of
    ``Sigma`` equals the sample covariance. Pass ``scale="plain"`` to use the
    sample covariance unscaled.
    """
    training = np.asarray(training, dtype=float)
    if training.ndim == 1:
        training = training[:, None]
    n, k = training.shape
    if n < k + 2:
        raise InsufficientDataError(f"empirical Bayes needs n >= k + 2, got n={n}, k={k}")
    mean, scatter = sufficient_statistics(training)
    cov = scatter / (n - 1)
    if scale == "mean-matching":
        S0 = (n - k - 1) * cov
    elif scale == "plain":
        S0 = cov
    else:
        raise DomainError(f"unknown S0 scaling {scale!r}")
    try:
        return ConjugatePrior(mean, S0, float(n), float(n))
    except DegenerateDataError as exc:
        raise DegenerateDataError(f"empirical Bayes prior scale is singular: {exc}") from exc
