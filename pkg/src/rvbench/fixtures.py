"""Synthetic data for tests, demos, and golden pipelines.

The real Oxford-Man library cannot be redistributed, so the toolkit ships a
generator producing realistically scaled series: persistent log-variance
dynamics, bipower a high fraction of rv, and a close-price path consistent
with the variance.
"""

from __future__ import annotations

import datetime as dt

import numpy as np

from .protocol import ForecastSet
from .series import RvObservation, RvSeries


def business_days(start: dt.date, n: int) -> list[dt.date]:
    """n consecutive weekdays starting at (or after) ``start``."""
    days = []
    d = start
    while len(days) < n:
        if d.weekday() < 5:
            days.append(d)
        d += dt.timedelta(days=1)
    return days


def make_synthetic_series(symbol: str = "SYN", n: int = 1200, seed: int = 7,
                          start: dt.date = dt.date(2000, 1, 3),
                          with_bpv: bool = True) -> RvSeries:
    """AR(1) log-variance series with matching prices and bipower values."""
    rng = np.random.default_rng(seed)
    mean_log_rv = np.log(8e-5)  # about 0.9% daily volatility
    phi = 0.97
    log_rv = np.empty(n)
    log_rv[0] = mean_log_rv
    shocks = rng.normal(0.0, 0.35, n)
    for t in range(1, n):
        log_rv[t] = mean_log_rv * (1 - phi) + phi * log_rv[t - 1] + shocks[t]
    rv = np.exp(log_rv)
    bpv = rv * rng.uniform(0.7, 1.0, n)
    rets = rng.normal(0.0, np.sqrt(rv))
    close = 100.0 * np.exp(np.cumsum(rets))
    dates = business_days(start, n)
    obs = tuple(
        RvObservation(date=dates[t], close=float(close[t]), rv=float(rv[t]),
                      bpv=float(bpv[t]) if with_bpv else None)
        for t in range(n)
    )
    return RvSeries(symbol, obs)


def make_synthetic_forecasts(series: RvSeries, model_id: str, sd: float = 0.3,
                             seed: int = 0, dates=None) -> ForecastSet:
    """Noisy stand-in forecasts: actual rv times a lognormal factor.

    Used where an external forecast file is needed but no model run is
    wanted (fixture-based evaluation tests).
    """
    rng = np.random.default_rng(seed)
    wanted = set(dates) if dates is not None else None
    entries = {}
    for o in series.observations:
        if wanted is not None and o.date not in wanted:
            continue
        entries[o.date] = float(max(o.rv, 1e-12) * np.exp(rng.normal(0.0, sd)))
    return ForecastSet(model_id=model_id, symbol=series.symbol, entries=entries)
