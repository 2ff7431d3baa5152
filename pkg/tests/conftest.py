"""Shared simulators and fixtures.

The data-generating processes here are written independently of the library
code (plain recursions, no reuse of model internals) so estimator-recovery
tests check against a second implementation of the dynamics.
"""

import datetime as dt

import numpy as np
import pytest

from rvbench.fixtures import make_synthetic_series
from rvbench.protocol import AlignedPanel


def simulate_har(n, omega, bd, bw, bm, sd, seed, burn=100):
    """HAR recursion with running 5- and 22-day sums kept incrementally."""
    rng = np.random.default_rng(seed)
    total = n + burn
    mean = omega / (1.0 - bd - bw - bm)
    x = np.empty(total)
    x[:22] = mean
    s5 = 5.0 * mean
    s22 = 22.0 * mean
    noise = rng.normal(0.0, sd, total)
    for t in range(22, total):
        x[t] = omega + bd * x[t - 1] + bw * s5 / 5.0 + bm * s22 / 22.0 + noise[t]
        s5 += x[t] - x[t - 5]
        s22 += x[t] - x[t - 22]
    return x[burn:]


def simulate_rgarch(n, omega, beta, alpha, xi, phi, tau, sigma_u2, seed, burn=500):
    rng = np.random.default_rng(seed)
    total = n + burn
    z = rng.standard_normal(total)
    u = rng.normal(0.0, np.sqrt(sigma_u2), total)
    log_h = np.empty(total)
    lnrv = np.empty(total)
    r = np.empty(total)
    log_h[0] = (omega + alpha * xi) / (1.0 - beta - alpha * phi)
    for t in range(total):
        if t > 0:
            log_h[t] = omega + beta * log_h[t - 1] + alpha * lnrv[t - 1]
        r[t] = np.exp(0.5 * log_h[t]) * z[t]
        lnrv[t] = xi + phi * log_h[t] + tau * z[t] + u[t]
    return r[burn:], np.exp(lnrv[burn:])


RGARCH_TRUTH = dict(omega=-0.2, beta=0.7, alpha=0.25, xi=-0.1, phi=1.0,
                    tau=-0.06, sigma_u2=0.15)


def make_panel(n=40, models=("a", "b"), seed=0, start=dt.date(2015, 1, 5)):
    """Small aligned panel with lognormal actuals and noisy forecasts."""
    rng = np.random.default_rng(seed)
    dates = tuple(start + dt.timedelta(days=i) for i in range(n))
    actuals = np.exp(rng.normal(-9.4, 0.5, n))
    forecasts = {
        m: actuals * np.exp(rng.normal(0.0, 0.3, n)) for m in models
    }
    return AlignedPanel(symbol="T", dates=dates, actuals=actuals, forecasts=forecasts)


@pytest.fixture(scope="session")
def synthetic_series():
    return make_synthetic_series("SYN", n=700, seed=3)
