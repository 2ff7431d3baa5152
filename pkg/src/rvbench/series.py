"""Core time-series types, realized-measure estimators, and log transforms.

A series is an ordered, per-symbol sequence of daily observations, each
carrying a close price, a realized variance and (optionally) a bipower
variation, both in squared-return units. Realized measures can also be
built from raw intraday log-returns via :func:`compute_rv` and
:func:`compute_bpv` for users who have tick data; production data is
normally ingested with precomputed 5-minute measures.
"""

from __future__ import annotations

import datetime as dt
import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .errors import DataError

logger = logging.getLogger(__name__)

# Trading days are plain calendar dates; no intraday timestamps anywhere.
TradingDay = dt.date

# Minimum series length for any model fit (monthly HAR lag needs 22 days
# of history plus one target row).
MIN_FIT_LENGTH = 23


@dataclass(frozen=True)
class RvObservation:
    """One trading day: close price, realized variance, optional bipower."""

    date: TradingDay
    close: float
    rv: float
    bpv: float | None = None

    def __post_init__(self):
        if not self.close > 0:
            raise DataError(f"close must be positive, got {self.close} on {self.date}")
        if not np.isfinite(self.rv):
            raise DataError(f"rv must be finite, got {self.rv} on {self.date}")
        if self.bpv is not None and not np.isfinite(self.bpv):
            raise DataError(f"bpv must be finite, got {self.bpv} on {self.date}")


@dataclass(frozen=True)
class RvSeries:
    """Dated realized-variance series for one symbol.

    ``log_space`` marks a series whose rv/bpv fields hold natural logs of
    the original measures (see :func:`to_log`).
    """

    symbol: str
    observations: tuple[RvObservation, ...]
    log_space: bool = False

    def __post_init__(self):
        dates = [o.date for o in self.observations]
        for prev, cur in zip(dates, dates[1:]):
            if cur <= prev:
                raise DataError(
                    f"{self.symbol}: dates must be strictly increasing "
                    f"({prev} followed by {cur})"
                )
        if not self.log_space:
            bad = [o.date for o in self.observations if o.rv < 0]
            if bad:
                raise DataError(f"{self.symbol}: negative rv on {bad[:5]}")
            bad = [o.date for o in self.observations if o.bpv is not None and o.bpv < 0]
            if bad:
                raise DataError(f"{self.symbol}: negative bpv on {bad[:5]}")

    def __len__(self) -> int:
        return len(self.observations)

    @property
    def dates(self) -> list[TradingDay]:
        return [o.date for o in self.observations]

    @property
    def rv(self) -> np.ndarray:
        return np.array([o.rv for o in self.observations], dtype=float)

    @property
    def bpv(self) -> np.ndarray:
        """Bipower values with NaN where missing."""
        return np.array(
            [np.nan if o.bpv is None else o.bpv for o in self.observations], dtype=float
        )

    @property
    def close(self) -> np.ndarray:
        return np.array([o.close for o in self.observations], dtype=float)

    def window(self, start: int, stop: int) -> "RvSeries":
        """Sub-series over observation positions [start, stop)."""
        return RvSeries(self.symbol, self.observations[start:stop], self.log_space)


@dataclass(frozen=True)
class IntradayReturns:
    """Intraday log-returns for a single trading day."""

    day: TradingDay
    returns: tuple[float, ...]

    def __post_init__(self):
        if len(self.returns) < 1:
            raise DataError(f"{self.day}: need at least one intraday return")
        if not all(math.isfinite(r) for r in self.returns):
            raise DataError(f"{self.day}: non-finite intraday return")


def compute_log_returns(prices) -> np.ndarray:
    """Log returns ln(p[i+1]/p[i]) of a positive price path."""
    p = np.asarray(prices, dtype=float)
    if p.ndim != 1 or p.size < 2:
        raise DataError("need at least two prices to form a return")
    bad = np.flatnonzero(~(p > 0))
    if bad.size:
        raise DataError(f"non-positive price at index {int(bad[0])}: {p[bad[0]]}")
    return np.diff(np.log(p))


def compute_rv(returns) -> float:
    """Realized variance: the sum of squared intraday returns."""
    r = _as_returns(returns)
    if r.size < 1:
        raise DataError("realized variance needs at least one return")
    return float(np.sum(r * r))


def compute_bpv(returns) -> float:
    """Bipower variation: (pi/2) * sum of adjacent absolute-return products.

    Robust to jumps; estimates the continuous part of the daily variance.
    """
    r = _as_returns(returns)
    if r.size < 2:
        raise DataError("bipower variation needs at least two returns")
    a = np.abs(r)
    return float(np.pi / 2.0 * np.sum(a[1:] * a[:-1]))


def _as_returns(returns) -> np.ndarray:
    if isinstance(returns, IntradayReturns):
        return np.asarray(returns.returns, dtype=float)
    return np.asarray(returns, dtype=float)


def to_log(series: RvSeries) -> RvSeries:
    """Replace rv (and bpv, when present) by natural logs.

    Requires strictly positive values: callers must drop or floor zero-rv
    days first (ingestion does this by default).
    """
    if series.log_space:
        raise DataError(f"{series.symbol}: series is already in log space")
    bad = [o.date for o in series.observations if o.rv <= 0]
    if bad:
        raise DataError(
            f"{series.symbol}: cannot log-transform, rv <= 0 on "
            f"{', '.join(str(d) for d in bad[:10])}"
            + ("..." if len(bad) > 10 else "")
        )
    bad = [o.date for o in series.observations if o.bpv is not None and o.bpv <= 0]
    if bad:
        raise DataError(
            f"{series.symbol}: cannot log-transform, bpv <= 0 on "
            f"{', '.join(str(d) for d in bad[:10])}"
            + ("..." if len(bad) > 10 else "")
        )
    obs = tuple(
        RvObservation(
            date=o.date,
            close=o.close,
            rv=math.log(o.rv),
            bpv=None if o.bpv is None else math.log(o.bpv),
        )
        for o in series.observations
    )
    return RvSeries(series.symbol, obs, log_space=True)


def from_log(series: RvSeries) -> RvSeries:
    """Inverse of :func:`to_log`."""
    if not series.log_space:
        raise DataError(f"{series.symbol}: series is not in log space")
    obs = tuple(
        RvObservation(
            date=o.date,
            close=o.close,
            rv=math.exp(o.rv),
            bpv=None if o.bpv is None else math.exp(o.bpv),
        )
        for o in series.observations
    )
    return RvSeries(series.symbol, obs, log_space=False)


def from_log_forecast(log_forecast: float) -> float:
    """Map a log-space forecast back to the variance scale.

    Plain exponentiation; overflow saturates to +inf with a warning rather
    than raising, so a single wild forecast cannot abort a backtest.
    """
    if not math.isfinite(log_forecast):
        raise DataError(f"log forecast must be finite, got {log_forecast}")
    try:
        return math.exp(log_forecast)
    except OverflowError:
        logger.warning("exp overflow for log forecast %g; saturating to inf", log_forecast)
        return math.inf


def summary_stats(
    series: RvSeries,
    breakpoints=(0.5, 0.7, 0.9, 1.0),
    transform: str = "volatility",
) -> pd.DataFrame:
    """Per-segment summary table (min, mean, sd, median, max).

    ``breakpoints`` are increasing fractions in (0, 1] ending at 1.0; each
    segment covers the observation positions between consecutive floor(n*b)
    boundaries. ``transform`` is "variance" (raw rv) or "volatility"
    (sqrt rv before aggregating). A "Total" row covers the whole sample.
    """
    if len(series) == 0:
        raise DataError("summary_stats: empty series")
    if transform not in ("variance", "volatility"):
        raise DataError(f"unknown transform {transform!r}")
    bps = list(breakpoints)
    if not bps or any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
        raise DataError("breakpoints must be strictly increasing")
    if not all(0 < b <= 1 for b in bps) or bps[-1] != 1.0:
        raise DataError("breakpoints must lie in (0, 1] and end at 1.0")

    x = series.rv
    if transform == "volatility":
        if np.any(x < 0):
            raise DataError("volatility transform needs nonnegative rv")
        x = np.sqrt(x)

    n = len(x)
    bounds = [0] + [int(math.floor(n * b)) for b in bps]
    rows = []
    for k, (lo, hi) in enumerate(zip(bounds, bounds[1:])):
        if hi <= lo:
            raise DataError(f"summary segment {k + 1} (breakpoint {bps[k]}) is empty")
        rows.append((_segment_label(k, bps), x[lo:hi]))
    rows.append(("Total", x))

    table = pd.DataFrame(
        [
            {
                "segment": label,
                "min": float(np.min(seg)),
                "mean": float(np.mean(seg)),
                "sd": float(np.std(seg, ddof=1)) if seg.size > 1 else 0.0,
                "median": float(np.median(seg)),
                "max": float(np.max(seg)),
            }
            for label, seg in rows
        ]
    )
    return table


def _segment_label(k: int, bps: list[float]) -> str:
    widths = [bps[0]] + [b2 - b1 for b1, b2 in zip(bps, bps[1:])]
    pct = f"{widths[k] * 100:g}%"
    if k == 0:
        return f"First {pct}"
    if k == len(bps) - 1:
        return f"Last {pct}"
    return f"Next {pct}"
