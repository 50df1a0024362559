"""
Rolling-window backtest on a returns file
=========================================

Write a synthetic weekly return series to CSV, read it back, and run the
rolling exceedance backtest on random sub-portfolios. Swap in your own file
(see docs/sp500_universe.md) to run it on market data.
"""

# %%
import tempfile
from datetime import date, timedelta
from pathlib import Path

import numpy as np

import bayesgmq as bg

rng = bg.make_rng(5)
mu, sigma = bg.generate_scenario(60, rng)
values = mu + rng.standard_normal((160, 60)) @ np.linalg.cholesky(sigma).T
dates = [date(2012, 1, 6) + timedelta(weeks=i) for i in range(160)]
series = bg.ReturnSeries(dates, [f"S{i:02d}" for i in range(60)], values)

path = Path(tempfile.mkdtemp()) / "weekly_returns.csv"
bg.write_returns_csv(series, path)
series = bg.load_returns_csv(path)
print(f"{series.n_periods} weeks x {series.n_assets} assets from {path.name}")

# %%
# 20 portfolios of 30 stocks, a 60-week window refit every week.
config = bg.BacktestConfig(n=60, k=30, alpha=0.95, portfolios=20, seed=5)
report = bg.rolling_backtest(series, config)
print(f"{report.effective_portfolios} of {config.portfolios} portfolios kept, "
      f"{report.evaluation_dates} evaluation weeks each")
for row in report.to_rows():
    print(f"  {row['method']:>12}: exceedance {row['exceedance']:.3f}, "
          f"portfolios with a failed existence check {row['existence_failures']}")
