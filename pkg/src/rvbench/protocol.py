"""Split plans, the incremental re-estimation backtest, and panel alignment.

The default plan splits a sample at the 50/70/90 percent marks: each
round re-estimates on all data up to the mark (expanding window) and then
produces one-day-ahead forecasts over the following block with parameters
frozen, so the final 50 percent of the sample is covered by out-of-sample
forecasts. A fixed-width rolling estimation window is available as an
option; forecasting inputs always roll daily either way.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, EstimationError
from .models import arfima as _arfima
from .models import har as _har
from .models import rgarch as _rgarch
from .series import (
    MIN_FIT_LENGTH,
    RvSeries,
    TradingDay,
    compute_log_returns,
    from_log_forecast,
    to_log,
)

logger = logging.getLogger(__name__)

DEFAULT_BREAKPOINTS = (0.5, 0.7, 0.9, 1.0)
FORECAST_FLOOR = 1e-10

MODEL_KINDS = ("har", "char", "arfima", "rgarch")


@dataclass(frozen=True)
class SplitSegment:
    """One backtest round; indices are 1-based and inclusive."""

    fit_end: int
    test_start: int
    test_end: int


@dataclass(frozen=True)
class SplitPlan:
    n: int
    segments: tuple[SplitSegment, ...]
    train_frac: float = 0.8
    val_frac: float = 0.2

    def __post_init__(self):
        if not self.segments:
            raise DataError("plan needs at least one segment")
        prev_end = None
        for seg in self.segments:
            if seg.test_start != seg.fit_end + 1:
                raise DataError("test window must start right after the fit window")
            if seg.test_end < seg.test_start:
                raise DataError("empty test window")
            if prev_end is not None and seg.fit_end != prev_end:
                raise DataError("segments must be contiguous")
            prev_end = seg.test_end
        if self.segments[-1].test_end != self.n:
            raise DataError("last test window must end at the sample end")
        if not math.isclose(self.train_frac + self.val_frac, 1.0):
            raise DataError("train_frac and val_frac must sum to 1")

    def round_train_val(self, k: int) -> tuple[int, int]:
        """(train, val) sizes over the new data seen in round k (0-based)."""
        lo = self.segments[k - 1].fit_end if k > 0 else 0
        block = self.segments[k].fit_end - lo
        train = int(math.floor(self.train_frac * block))
        return train, block - train


def make_split_plan(n: int, breakpoints=DEFAULT_BREAKPOINTS) -> SplitPlan:
    """Build the incremental plan from fractional breakpoints ending at 1.0."""
    if n < 100:
        raise DataError(f"plan needs at least 100 observations, have {n}")
    bps = list(breakpoints)
    if len(bps) < 2:
        raise DataError("need at least two breakpoints (one fit mark plus 1.0)")
    if any(b2 <= b1 for b1, b2 in zip(bps, bps[1:])):
        raise DataError(f"breakpoints must be strictly increasing: {bps}")
    if not all(0 < b <= 1 for b in bps) or bps[-1] != 1.0:
        raise DataError("breakpoints must lie in (0, 1] and end at 1.0")
    bounds = [int(math.floor(n * b)) for b in bps]
    if any(b2 <= b1 for b1, b2 in zip(bounds, bounds[1:])):
        raise DataError(f"breakpoints collapse to identical indices for n={n}")
    segments = []
    for fit_end, test_end in zip(bounds, bounds[1:]):
        if fit_end < MIN_FIT_LENGTH:
            raise DataError(
                f"fit window of {fit_end} observations is shorter than {MIN_FIT_LENGTH}"
            )
        segments.append(SplitSegment(fit_end=fit_end, test_start=fit_end + 1,
                                     test_end=test_end))
    return SplitPlan(n=n, segments=tuple(segments))


@dataclass(frozen=True)
class ModelSpec:
    """What to backtest: model kind, log-space flag, and model options.

    Options: ``char_target`` ("rv"/"bpv"), ``p``/``q`` (ARFIMA orders),
    ``seed`` (optimizer restarts), ``window`` (fixed-width rolling
    estimation window; default expanding).
    """

    kind: str
    log: bool = False
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise DataError(f"unknown model kind {self.kind!r}; expected one of {MODEL_KINDS}")
        if self.kind == "rgarch" and self.log:
            raise DataError(
                "rgarch has no log variant: the model already works on log RV internally"
            )

    @property
    def model_id(self) -> str:
        return self.kind.upper() + ("_log" if self.log else "")


@dataclass(frozen=True)
class ForecastSet:
    """Dated one-day-ahead forecasts of one model for one symbol."""

    model_id: str
    symbol: str
    entries: dict[TradingDay, float]

    def __post_init__(self):
        prev = None
        for d, v in self.entries.items():
            if prev is not None and d <= prev:
                raise DataError(f"{self.model_id}: forecast dates must be strictly increasing")
            prev = d
            if not (np.isfinite(v) and v > 0):
                raise DataError(f"{self.model_id}: forecast on {d} must be finite and > 0, got {v}")

    @property
    def dates(self) -> list[TradingDay]:
        return list(self.entries.keys())

    @property
    def values(self) -> np.ndarray:
        return np.array(list(self.entries.values()), dtype=float)


@dataclass(frozen=True)
class AlignedPanel:
    """Actuals and per-model forecasts inner-joined on dates."""

    symbol: str
    dates: tuple[TradingDay, ...]
    actuals: np.ndarray
    forecasts: dict[str, np.ndarray]

    MIN_PERIODS = 30

    def __post_init__(self):
        p = len(self.dates)
        if p < self.MIN_PERIODS:
            raise DataError(f"panel needs at least {self.MIN_PERIODS} periods, have {p}")
        if len(self.actuals) != p:
            raise DataError("actuals length must match dates")
        if not np.all(np.isfinite(self.actuals)) or np.any(self.actuals < 0):
            raise DataError("actuals must be finite and nonnegative")
        for mid, f in self.forecasts.items():
            if len(f) != p:
                raise DataError(f"{mid}: forecast length must match dates")
            if not np.all(np.isfinite(f)) or np.any(f <= 0):
                raise DataError(f"{mid}: forecasts must be finite and positive")

    @property
    def model_ids(self) -> list[str]:
        return list(self.forecasts.keys())


def run_backtest(series: RvSeries, spec: ModelSpec, plan: SplitPlan,
                 clamp_floor: float = FORECAST_FLOOR) -> ForecastSet:
    """Incremental backtest: per segment, fit once and forecast every test day.

    Forecast inputs always use the actual history up to the previous day;
    parameters stay frozen within a segment. Non-positive forecasts from
    linear models are clamped to ``clamp_floor`` (counted and logged).
    """
    if len(series) != plan.n:
        raise DataError(f"series length {len(series)} != plan n {plan.n}")
    work = to_log(series) if spec.log else series
    x = work.rv
    n_clamped = 0
    entries: dict[TradingDay, float] = {}
    dates = series.dates

    for k, seg in enumerate(plan.segments):
        fit_start = 0
        window = spec.options.get("window")
        if window is not None:
            fit_start = max(0, seg.fit_end - int(window))
        try:
            forecaster = _fit_segment(work, x, spec, fit_start, seg.fit_end, seg.test_end)
        except EstimationError as exc:
            raise EstimationError(f"segment {k + 1} (fit 1..{seg.fit_end}): {exc}",
                                  partial=exc.partial) from exc
        except DataError as exc:
            raise DataError(f"segment {k + 1} (fit 1..{seg.fit_end}): {exc}") from exc
        for t in range(seg.test_start - 1, seg.test_end):
            f = forecaster(t)
            if spec.log:
                f = from_log_forecast(f)
            if not np.isfinite(f):
                raise EstimationError(
                    f"non-finite forecast for {dates[t]} in segment {k + 1}")
            if f <= 0:
                f = clamp_floor
                n_clamped += 1
            entries[dates[t]] = float(f)
    if n_clamped:
        logger.info("%s/%s: clamped %d non-positive forecasts to %g",
                    series.symbol, spec.model_id, n_clamped, clamp_floor)
    return ForecastSet(model_id=spec.model_id, symbol=series.symbol, entries=entries)


def _fit_segment(work: RvSeries, x: np.ndarray, spec: ModelSpec,
                 fit_start: int, fit_end: int, test_end: int):
    """Fit one segment and return a position -> raw forecast callable."""
    seed = int(spec.options.get("seed", 0))

    if spec.kind == "har":
        params, _ = _har.fit_har(x, fit_start, fit_end)
        return lambda t: _har.forecast_har(params, _har.build_har_regressors(x, t))

    if spec.kind == "char":
        bpv = work.bpv
        missing = np.flatnonzero(~np.isfinite(bpv[:test_end]))
        if missing.size:
            raise DataError(
                f"bpv missing at {missing.size} positions needed for CHAR "
                f"(first at {int(missing[0])})")
        target = spec.options.get("char_target", "rv")
        params, _ = _har.fit_char(x, bpv, fit_start, fit_end, char_target=target)
        return lambda t: _har.forecast_char(params, _har.build_har_regressors(bpv, t))

    if spec.kind == "arfima":
        p = int(spec.options.get("p", 1))
        q = int(spec.options.get("q", 1))
        params, _ = _arfima.fit_arfima(x[fit_start:fit_end], p, q, seed=seed)
        # One pass over the prefix ending at this segment's last test day;
        # each forecast only reads values before its own position.
        fvals = _arfima.one_step_forecasts(params, x[:test_end], range(test_end))
        return lambda t: float(fvals[t])

    if spec.kind == "rgarch":
        if work.log_space:
            raise DataError("rgarch pipeline requires the linear series")
        returns = compute_log_returns(work.close)  # position j+1 <-> returns[j]
        lo = max(fit_start, 1)  # first position with a return
        r_fit = returns[lo - 1:fit_end - 1]
        r_fit = r_fit - np.mean(r_fit)
        rv_fit = x[lo:fit_end]
        params, _ = _rgarch.fit_rgarch(r_fit, rv_fit, seed=seed)
        if np.any(~(x[1:test_end] > 0)):
            raise DataError("rgarch needs strictly positive rv over the forecast span")
        lnrv = np.log(x[1:test_end])
        log_h = _rgarch.filter_log_h(params, lnrv)  # index j <-> position j+1
        corr = 0.5 * (params.tau ** 2 + params.sigma_u2)

        def forecast(t):
            return math.exp(params.xi + params.phi * log_h[t - 1] + corr)

        return forecast

    raise DataError(f"unknown model kind {spec.kind!r}")


def align(series: RvSeries, sets, window=None) -> AlignedPanel:
    """Inner-join forecast sets against actuals on common dates."""
    sets = list(sets)
    if not sets:
        raise DataError("need at least one forecast set")
    seen = set()
    for s in sets:
        if s.symbol != series.symbol:
            raise DataError(f"symbol mismatch: {s.symbol} vs {series.symbol}")
        if s.model_id in seen:
            raise DataError(f"duplicate model_id {s.model_id!r}")
        seen.add(s.model_id)
    actual_by_date = {o.date: o.rv for o in series.observations}
    common = set(actual_by_date)
    for s in sets:
        common &= set(s.entries)
    if window is not None:
        lo, hi = window
        common = {d for d in common if (lo is None or d >= lo) and (hi is None or d <= hi)}
    if not common:
        raise DataError("no dates shared by actuals and every forecast set")
    dates = tuple(sorted(common))
    actuals = np.array([actual_by_date[d] for d in dates], dtype=float)
    forecasts = {s.model_id: np.array([s.entries[d] for d in dates], dtype=float)
                 for s in sets}
    return AlignedPanel(symbol=series.symbol, dates=dates, actuals=actuals,
                        forecasts=forecasts)
