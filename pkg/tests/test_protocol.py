import datetime as dt
import math

import numpy as np
import pytest

from rvbench import DataError
from rvbench.fixtures import make_synthetic_forecasts
from rvbench.protocol import (
    ForecastSet,
    ModelSpec,
    align,
    make_split_plan,
    run_backtest,
)
from rvbench.series import RvObservation, RvSeries


class TestSplitPlan:
    def test_paper_breakpoints_n1000(self):
        plan = make_split_plan(1000)
        assert [s.fit_end for s in plan.segments] == [500, 700, 900]
        assert [(s.test_start, s.test_end) for s in plan.segments] == [
            (501, 700), (701, 900), (901, 1000)]
        assert plan.round_train_val(0) == (400, 100)
        assert plan.round_train_val(1) == (160, 40)
        assert plan.round_train_val(2) == (160, 40)

    def test_exact_fractions_n100(self):
        plan = make_split_plan(100)
        assert [s.fit_end for s in plan.segments] == [50, 70, 90]

    def test_floor_boundaries(self):
        plan = make_split_plan(1001)
        assert [s.fit_end for s in plan.segments] == [500, 700, 900]
        assert plan.segments[-1].test_end == 1001

    def test_non_increasing_breakpoints_rejected(self):
        with pytest.raises(DataError, match="increasing"):
            make_split_plan(1000, breakpoints=[0.5, 0.4, 1.0])

    def test_validation(self):
        with pytest.raises(DataError):
            make_split_plan(99)
        with pytest.raises(DataError):
            make_split_plan(1000, breakpoints=[0.5, 0.9])
        with pytest.raises(DataError):
            make_split_plan(1000, breakpoints=[1.0])

    def test_short_fit_window_rejected(self):
        with pytest.raises(DataError, match="shorter"):
            make_split_plan(110, breakpoints=[0.1, 1.0])


class TestRunBacktest:
    def test_har_on_noise_around_constant(self, caplog):
        rng = np.random.default_rng(0)
        n = 400
        c = 1.0
        rv = c + rng.normal(0.0, 0.01, n)
        dates = [dt.date(2005, 1, 3) + dt.timedelta(days=i) for i in range(n)]
        series = RvSeries("T", tuple(
            RvObservation(dates[i], 100.0, float(rv[i])) for i in range(n)))
        plan = make_split_plan(n)
        fs = run_backtest(series, ModelSpec(kind="har"), plan)
        values = fs.values
        assert values.size == n - n // 2
        assert np.all(np.abs(values - c) < 0.05)
        assert np.all(values > 1e-9)  # no clamping triggered

    def test_forecast_count_exact(self, synthetic_series):
        for n in (401, 700):
            series = synthetic_series.window(0, n)
            plan = make_split_plan(n)
            fs = run_backtest(series, ModelSpec(kind="har"), plan)
            assert len(fs.entries) == n - math.floor(0.5 * n)

    def test_log_pipeline_zero_rv_propagates(self):
        n = 200
        dates = [dt.date(2005, 1, 3) + dt.timedelta(days=i) for i in range(n)]
        obs = [RvObservation(dates[i], 100.0, 1e-4) for i in range(n)]
        obs[50] = RvObservation(dates[50], 100.0, 0.0)
        series = RvSeries("T", tuple(obs))
        with pytest.raises(DataError, match="rv <= 0"):
            run_backtest(series, ModelSpec(kind="har", log=True),
                         make_split_plan(n))

    def test_deterministic_rerun(self, synthetic_series):
        series = synthetic_series.window(0, 500)
        plan = make_split_plan(500)
        for spec in (ModelSpec(kind="har"), ModelSpec(kind="arfima"),
                     ModelSpec(kind="char", log=True)):
            a = run_backtest(series, spec, plan)
            b = run_backtest(series, spec, plan)
            assert a.entries == b.entries

    def test_no_lookahead_har(self, synthetic_series):
        series = synthetic_series.window(0, 450)
        plan = make_split_plan(450)
        base = run_backtest(series, ModelSpec(kind="har"), plan)
        # bump one observation late in the final test block
        k = 430
        obs = list(series.observations)
        o = obs[k]
        obs[k] = RvObservation(o.date, o.close * 1.5, o.rv * 3.0, o.bpv)
        bumped = run_backtest(RvSeries(series.symbol, tuple(obs)),
                              ModelSpec(kind="har"), plan)
        cutoff = series.observations[k].date
        for d, v in base.entries.items():
            if d < cutoff:
                assert bumped.entries[d] == v

    def test_rolling_window_option(self, synthetic_series):
        series = synthetic_series.window(0, 400)
        plan = make_split_plan(400)
        expanding = run_backtest(series, ModelSpec(kind="har"), plan)
        rolling = run_backtest(
            series, ModelSpec(kind="har", options={"window": 150}), plan)
        assert expanding.entries != rolling.entries

    def test_length_mismatch(self, synthetic_series):
        with pytest.raises(DataError, match="length"):
            run_backtest(synthetic_series, ModelSpec(kind="har"),
                         make_split_plan(500))

    def test_model_spec_validation(self):
        with pytest.raises(DataError, match="unknown model kind"):
            ModelSpec(kind="garch")
        with pytest.raises(DataError, match="log"):
            ModelSpec(kind="rgarch", log=True)
        assert ModelSpec(kind="har", log=True).model_id == "HAR_log"
        assert ModelSpec(kind="rgarch").model_id == "RGARCH"


class TestForecastSet:
    def test_positive_finite_enforced(self):
        d1, d2 = dt.date(2020, 1, 6), dt.date(2020, 1, 7)
        with pytest.raises(DataError):
            ForecastSet("m", "T", {d1: 1.0, d2: 0.0})
        with pytest.raises(DataError):
            ForecastSet("m", "T", {d2: 1.0, d1: 2.0})


class TestAlign:
    def test_identical_dates(self, synthetic_series):
        f1 = make_synthetic_forecasts(synthetic_series, "a", seed=1)
        f2 = make_synthetic_forecasts(synthetic_series, "b", seed=2)
        panel = align(synthetic_series, [f1, f2])
        assert len(panel.dates) == len(f1.entries)
        assert panel.model_ids == ["a", "b"]

    def test_offset_sets_join_on_overlap(self, synthetic_series):
        dates = synthetic_series.dates
        f1 = make_synthetic_forecasts(synthetic_series, "a", seed=1,
                                      dates=dates[:-1])
        f2 = make_synthetic_forecasts(synthetic_series, "b", seed=2,
                                      dates=dates[1:])
        panel = align(synthetic_series, [f1, f2])
        assert len(panel.dates) == len(dates) - 2

    def test_actuals_bit_exact(self, synthetic_series):
        f1 = make_synthetic_forecasts(synthetic_series, "a", seed=1)
        panel = align(synthetic_series, [f1])
        by_date = {o.date: o.rv for o in synthetic_series.observations}
        for d, a in zip(panel.dates, panel.actuals):
            assert a == by_date[d]

    def test_duplicate_model_rejected(self, synthetic_series):
        f1 = make_synthetic_forecasts(synthetic_series, "a", seed=1)
        f2 = make_synthetic_forecasts(synthetic_series, "a", seed=2)
        with pytest.raises(DataError, match="duplicate"):
            align(synthetic_series, [f1, f2])

    def test_empty_intersection_rejected(self, synthetic_series):
        other_dates = [dt.date(1990, 1, 1) + dt.timedelta(days=i) for i in range(40)]
        f1 = ForecastSet("a", "SYN", {d: 1.0 for d in other_dates})
        with pytest.raises(DataError, match="shared"):
            align(synthetic_series, [f1])

    def test_window_filter(self, synthetic_series):
        f1 = make_synthetic_forecasts(synthetic_series, "a", seed=1)
        dates = synthetic_series.dates
        panel = align(synthetic_series, [f1], window=(dates[100], dates[200]))
        assert panel.dates[0] >= dates[100]
        assert panel.dates[-1] <= dates[200]

    def test_min_periods(self, synthetic_series):
        f1 = make_synthetic_forecasts(synthetic_series, "a", seed=1,
                                      dates=synthetic_series.dates[:10])
        with pytest.raises(DataError, match="30"):
            align(synthetic_series, [f1])
