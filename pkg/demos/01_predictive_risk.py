"""
Predictive VaR and CVaR of a fixed portfolio
============================================

Fit the posterior predictive law to a window of returns, then read off the
portfolio's predictive mean, variance, VaR and CVaR. A brute-force Monte
Carlo check closes the loop.
"""

# %%
# A synthetic market: ten assets, 100 weeks of normal returns.
import numpy as np

import bayesgmq as bg

rng = bg.make_rng(2024)
mu, sigma = bg.generate_scenario(10, rng)
window = mu + rng.standard_normal((100, 10)) @ np.linalg.cholesky(sigma).T

# %%
# Jeffreys posterior. The predictive law of w'X is a shifted, scaled t with
# d = n - k degrees of freedom.
params = bg.posterior_params(window)
w = np.full(10, 0.1)
summary = bg.predictive_moments(params, w)
print(f"d = {params.d:g}, mean = {summary.mean:.5f}, sd = {np.sqrt(summary.variance):.5f}")

# %%
# Risk at the 95% level. CVaR is always the larger of the two.
for measure in ("VaR", "CVaR"):
    spec = bg.RiskSpec(measure, 0.95)
    print(f"{measure:>4}: {bg.portfolio_risk(params, w, spec):.5f}")

# %%
# Monte Carlo: draw predictive returns and take the empirical 5% quantile.
draws = bg.sample_predictive_return(params, w, bg.make_rng(1), 1_000_000)
print(f"empirical VaR: {-np.quantile(draws, 0.05):.5f}")

# %%
# The conjugate prior with empirical Bayes hyperparameters shrinks the scale
# matrix and adds prior degrees of freedom.
conj = bg.posterior_params(window, bg.empirical_bayes_hyperparams(window))
print(f"conjugate d = {conj.d:g}, VaR = {bg.portfolio_risk(conj, w, bg.RiskSpec()):.5f}")
