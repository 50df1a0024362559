"""Bayesian quantile-based portfolio selection.

Posterior predictive t laws of portfolio returns under Jeffreys and conjugate
priors, VaR/CVaR/coherent risk, global minimum quantile portfolios with
existence checks, mean-Q efficient frontiers, and Monte Carlo / rolling
backtest harnesses.
"""

from .exceptions import (
    BayesGMQError,
    DegenerateDataError,
    DomainError,
    EmptyResultError,
    ExistenceError,
    InsufficientDataError,
    ParseError,
    UndefinedRiskError,
    UsageError,
)
from .returns_model import (
    ConjugatePrior,
    JeffreysPrior,
    PosteriorParams,
    ReturnSeries,
    empirical_bayes_hyperparams,
    posterior_params,
    prices_to_log_returns,
    sufficient_statistics,
)
from .predictive import (
    PredictiveSummary,
    make_rng,
    predictive_moments,
    sample_compound_t,
    sample_predictive_return,
    sample_predictive_vector,
)
from .risk_measures import (
    MomentParams,
    RiskSpec,
    coherent_to_var_level,
    portfolio_risk,
    risk_coefficient,
    t_cdf,
    t_quantile,
)
from .optimizer import (
    FrontierCurve,
    GmqPortfolio,
    GmvSummary,
    conventional_estimates,
    frontier_mean_q,
    frontier_mean_variance,
    gmq_exists,
    gmq_portfolio,
    gmv_summary,
    mean_variance_weights,
)
from .simulation import (
    SimulationConfig,
    StudyResult,
    generate_scenario,
    run_existence_study,
    run_performance_study,
)
from .backtest import (
    BacktestConfig,
    BacktestReport,
    load_returns_csv,
    rolling_backtest,
    sample_portfolios,
    write_returns_csv,
)

__version__ = "0.1.0"
