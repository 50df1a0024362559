import math

import numpy as np
import pytest
from scipy import integrate

from bayesgmq import JeffreysPrior, generate_scenario, make_rng, posterior_params


def t_density(x, d):
    """Student t density written out directly, independent of the package."""
    c = math.gamma((d + 1) / 2) / (math.gamma(d / 2) * math.sqrt(math.pi * d))
    return c * (1 + x * x / d) ** (-(d + 1) / 2)


def quad_t_cdf(x, d):
    val, _ = integrate.quad(t_density, 0.0, abs(x), args=(d,), epsabs=1e-14, epsrel=1e-14, limit=200)
    return 0.5 + math.copysign(val, x)


def bisect_t_quantile(d, p, hi=200.0):
    lo, hi = -hi, hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if quad_t_cdf(mid, d) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def random_window(n, k, seed):
    rng = make_rng(seed, 99)
    mu, sigma = generate_scenario(k, rng)
    return mu + rng.standard_normal((n, k)) @ np.linalg.cholesky(sigma).T


def random_feasible_weights(k, m, rng, scale=1.0):
    """``m`` random points on the hyperplane ``1'w = 1``."""
    u = scale * rng.standard_normal((m, k))
    return u - (u.sum(axis=1, keepdims=True) - 1.0) / k


@pytest.fixture
def params5():
    return posterior_params(random_window(60, 5, seed=2024), JeffreysPrior())


@pytest.fixture
def rng():
    return make_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES):
            terminalreporter.write_line(line)
