"""
Global minimum VaR versus global minimum variance
=================================================

The portfolio with the smallest VaR is not the minimum variance portfolio:
it sits higher up the mean-variance frontier. It also exists only when the
risk coefficient beats the slope of the frontier.
"""

# %%
import numpy as np

import bayesgmq as bg

rng = bg.make_rng(7)
mu, sigma = bg.generate_scenario(8, rng)
window = mu + rng.standard_normal((60, 8)) @ np.linalg.cholesky(sigma).T
params = bg.posterior_params(window)
spec = bg.RiskSpec("VaR", 0.95)

# %%
gmv = bg.gmv_summary(params)
gmq = bg.gmq_portfolio(params, spec)
print(f"GMV : R = {gmv.ret:.5f}  V = {gmv.variance:.3e}  Q = {bg.portfolio_risk(params, gmv.weights, spec):.5f}")
print(f"GMQ : R = {gmq.ret:.5f}  V = {gmq.variance:.3e}  Q = {gmq.risk:.5f}")

# %%
# Existence: q^2 must exceed s / r. Lowering alpha shrinks q until the
# condition fails and the risk becomes unbounded below along the frontier.
for alpha in (0.99, 0.95, 0.8, 0.6):
    q2, threshold = bg.optimizer.existence_margin(params, bg.RiskSpec("VaR", alpha))
    print(f"alpha = {alpha:.2f}: q^2 = {q2:7.3f}, s/r = {threshold:7.3f}, exists = {q2 > threshold}")

# %%
# Conventional plug-in estimates use normal quantiles and ignore parameter
# uncertainty, so they report a smaller risk for a similar portfolio.
plug_in = bg.conventional_estimates(window)
conv = bg.gmq_portfolio(plug_in, spec.with_estimator("conventional"))
print(f"plug-in GMQ risk {conv.risk:.5f} vs Bayesian {gmq.risk:.5f}")
