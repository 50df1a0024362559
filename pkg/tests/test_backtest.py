import math
from datetime import date, timedelta

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from bayesgmq import (
    BacktestConfig,
    DegenerateDataError,
    DomainError,
    ParseError,
    ReturnSeries,
    generate_scenario,
    load_returns_csv,
    make_rng,
    rolling_backtest,
    sample_portfolios,
    write_returns_csv,
)


def weekly(count, start=date(2011, 1, 7)):
    return [start + timedelta(weeks=i) for i in range(count)]


def synthetic_series(T, universe, seed):
    rng = make_rng(seed, 1)
    mu, sigma = generate_scenario(universe, rng)
    values = mu + rng.standard_normal((T, universe)) @ np.linalg.cholesky(sigma).T
    return ReturnSeries(weekly(T), [f"S{i:03d}" for i in range(universe)], values)


# window length 4, five evaluation dates (rows 4..8)
TOY_RETURNS = [0.01, -0.01, 0.02, 0.00, -0.06, 0.01, -0.07, -0.12, 0.05]


def toy_tally():
    """Exceedances counted by hand from the window mean and scatter.

    With one asset the GMQ portfolio is the asset itself, so each method's
    predicted VaR is ``-mean + q * scale``:
    Jeffreys  d = 3, r = 5/12, scale^2 = r S
    conjugate d = 6, r = 3/16, scale^2 = r * 5S/3 (S0 = 2S/3 for n = 4)
    plug-in   z_0.95 * sqrt(S / 3)
    """
    n = 4
    hits = {"jeffreys": 0, "conjugate": 0, "conventional": 0}
    for t in range(n, len(TOY_RETURNS)):
        window = TOY_RETURNS[t - n:t]
        mean = sum(window) / n
        S = sum((x - mean) ** 2 for x in window)
        var = {
            "jeffreys": -mean + stats.t.ppf(0.95, 3) * math.sqrt(5 / 12 * S),
            "conjugate": -mean + stats.t.ppf(0.95, 6) * math.sqrt(3 / 16 * 5 * S / 3),
            "conventional": -mean + stats.norm.ppf(0.95) * math.sqrt(S / 3),
        }
        loss = -TOY_RETURNS[t]
        for m in hits:
            hits[m] += int(loss >= var[m])
    return hits


class TestCsv:
    def test_literal_fixture(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("date,AAA,BBB\n2020-01-03,0.01,-0.002\n2020-01-10,0.5,1e-3\n2020-01-17,-0.25,0\n")
        series = load_returns_csv(path)
        assert series.n_periods == 3 and series.n_assets == 2
        assert series.assets == ("AAA", "BBB") or list(series.assets) == ["AAA", "BBB"]
        np.testing.assert_array_equal(series.values, [[0.01, -0.002], [0.5, 0.001], [-0.25, 0.0]])
        assert series.dates[1] == date(2020, 1, 10)

    @pytest.mark.parametrize(
        "body,line,needle",
        [
            ("2020-01-03,0.1,\n", 2, "BBB"),
            ("2020-01-03,0.1\n", 2, "fields"),
            ("2020-01-03,0.1,abc\n", 2, "BBB"),
            ("2020-01-03,0.1,nan\n", 2, "non-finite"),
            ("2020-13-03,0.1,0.2\n", 2, "date"),
            ("2020-01-03,0.1,0.2\n2020-01-03,0.1,0.2\n", 3, "duplicate"),
            ("2020-01-03,0.1,0.2\n2020-01-02,0.1,0.2\n", 3, "earlier"),
        ],
    )
    def test_parse_errors(self, tmp_path, body, line, needle):
        path = tmp_path / "bad.csv"
        path.write_text("date,AAA,BBB\n" + body)
        with pytest.raises(ParseError) as info:
            load_returns_csv(path)
        assert info.value.line == line
        assert needle in str(info.value)

    def test_blank_lines_skipped(self, tmp_path):
        path = tmp_path / "r.csv"
        path.write_text("date,A\n2020-01-03,0.1\n\n2020-01-10,0.2\n")
        assert load_returns_csv(path).n_periods == 2

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_round_trip(self, tmp_path_factory, seed):
        rng = make_rng(seed)
        values = rng.standard_normal((7, 3)) * 10.0 ** rng.integers(-300, 300, size=(7, 3))
        series = ReturnSeries(weekly(7), ["x", "y", "z"], values)
        path = tmp_path_factory.mktemp("rt") / "s.csv"
        write_returns_csv(series, path)
        back = load_returns_csv(path)
        assert np.array_equal(back.values, series.values)
        assert list(back.dates) == list(series.dates)


class TestSamplePortfolios:
    def test_full_universe(self):
        sets = sample_portfolios(["a", "b", "c"], 3, 4, 0)
        assert all(list(s) == [0, 1, 2] for s in sets)

    def test_cardinality_and_distinctness(self):
        for s in sample_portfolios(50, 7, 200, 1):
            assert len(s) == 7 and len(set(s.tolist())) == 7

    def test_too_large(self):
        with pytest.raises(DomainError):
            sample_portfolios(5, 6, 1, 0)

    def test_inclusion_frequency(self):
        count, size, k = 100_000, 10, 3
        sets = sample_portfolios(size, k, count, make_rng(2))
        freq = np.bincount(np.concatenate(sets), minlength=size) / count
        p = k / size
        assert np.all(np.abs(freq - p) < 4 * math.sqrt(p * (1 - p) / count))

    def test_seeded_sets_repeat(self):
        a = sample_portfolios(30, 5, 10, 7)
        b = sample_portfolios(30, 5, 10, 7)
        assert all(np.array_equal(x, y) for x, y in zip(a, b))


class TestRollingBacktest:
    def test_hand_tally(self):
        series = ReturnSeries(weekly(len(TOY_RETURNS)), ["ONE"], np.array(TOY_RETURNS)[:, None])
        report = rolling_backtest(series, BacktestConfig(n=4, k=1, portfolios=1, seed=0))
        expected = toy_tally()
        assert expected == {"jeffreys": 1, "conjugate": 2, "conventional": 3}
        assert report.evaluation_dates == 5
        assert report.effective_portfolios == 1
        for m, hits in expected.items():
            assert report.exceedance[m] == hits / 5

    def test_row_t_not_in_its_window(self):
        base = ReturnSeries(weekly(len(TOY_RETURNS)), ["ONE"], np.array(TOY_RETURNS)[:, None])
        # only the last evaluation date sees row 8, and only as the realized return
        changed = np.array(TOY_RETURNS)
        changed[8] = -0.25
        moved = ReturnSeries(base.dates, ["ONE"], changed[:, None])
        config = BacktestConfig(n=4, k=1, portfolios=1)
        a, b = rolling_backtest(base, config), rolling_backtest(moved, config)
        assert b.exceedance["jeffreys"] == a.exceedance["jeffreys"] + 0.2

    def test_constant_series(self):
        series = ReturnSeries(weekly(12), ["A", "B"], np.full((12, 2), 0.01))
        with pytest.raises(DegenerateDataError, match="portfolio 0, row 5"):
            rolling_backtest(series, BacktestConfig(n=5, k=2, portfolios=1))

    def test_short_series(self):
        series = synthetic_series(11, 3, seed=1)
        with pytest.raises(DomainError):
            rolling_backtest(series, BacktestConfig(n=10, k=2, portfolios=1))

    def test_bayesian_exists_at_least_as_often(self):
        series = synthetic_series(120, 30, seed=2)
        report = rolling_backtest(series, BacktestConfig(n=30, k=15, portfolios=12, seed=3))
        fails = report.existence_failures
        assert fails["jeffreys"] <= fails["conventional"]
        assert fails["conjugate"] <= fails["conventional"]

    def test_deterministic_and_parallel(self):
        series = synthetic_series(80, 12, seed=4)
        config = BacktestConfig(n=30, k=5, portfolios=6, seed=5)
        a = rolling_backtest(series, config)
        b = rolling_backtest(series, BacktestConfig(n=30, k=5, portfolios=6, seed=5, workers=2))
        assert a.to_rows() == b.to_rows()

    def test_snapshots(self):
        series = synthetic_series(60, 8, seed=6)
        report = rolling_backtest(series, BacktestConfig(n=30, k=4, portfolios=2, seed=1, snapshot_rows=(45,)))
        assert report.snapshots
        for (index, stamp), curves in report.snapshots.items():
            assert stamp == series.dates[45]
            assert set(curves) <= {"jeffreys", "conjugate", "conventional"}
