"""
Mean-VaR efficient frontiers
============================

Three estimates of the same population frontier. Ignoring parameter
uncertainty gives an over-optimistic curve: a smaller VaR at every level of
expected return. The Bayesian curve stays closer to the truth.
"""

# %%
import numpy as np

import bayesgmq as bg

rng = bg.make_rng(1)
mu, sigma = bg.generate_scenario(30, rng)
window = mu + rng.standard_normal((100, 30)) @ np.linalg.cholesky(sigma).T
spec = bg.RiskSpec("VaR", 0.95)

fits = {
    "population": (bg.MomentParams(mu, sigma), spec.with_estimator("population")),
    "jeffreys": (bg.posterior_params(window), spec),
    "conventional": (bg.conventional_estimates(window), spec.with_estimator("conventional")),
}

# %%
# A shared grid of expected returns, then Q on each curve.
pop_gmv = bg.gmv_summary(fits["population"][0])
grid = np.linspace(pop_gmv.ret, pop_gmv.ret + 0.01, 6)
curves = {name: bg.frontier_mean_q(inputs, s, grid).y for name, (inputs, s) in fits.items()}

print("       R   " + "".join(f"{name:>14}" for name in curves))
for i, r in enumerate(grid):
    print(f"{r:9.5f}  " + "".join(f"{curves[name][i]:14.5f}" for name in curves))

# %%
# Where each method puts its GMQ portfolio, and its GMV portfolio in the
# same plane (always to the right of the curve).
for name, (inputs, s) in fits.items():
    port = bg.gmq_portfolio(inputs, s)
    gmv_point = bg.frontier_mean_q(inputs, s, [port.ret]).gmv_point
    print(f"{name:>12}: GMQ (R={port.ret:.5f}, Q={port.risk:.5f})  GMV (R={gmv_point[0]:.5f}, Q={gmv_point[1]:.5f})")
