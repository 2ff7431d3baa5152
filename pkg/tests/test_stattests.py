import math

import numpy as np
import pytest
from scipy.stats import chisquare

from rvbench.errors import DataError, DegenerateInputError
from rvbench.losses import LossKind, LossSeries
from rvbench.stattests import (
    BootstrapConfig,
    dm_test,
    gw_test,
    mcs,
    newey_west_lags,
    newey_west_lrv,
    stationary_bootstrap,
)


def ls(values, kind=LossKind.MSE, model="m"):
    v = np.asarray(values, dtype=float)
    return LossSeries(kind, model, v, tuple(range(v.size)))


class TestNeweyWest:
    def test_zero_lags_equals_population_variance(self):
        x = np.random.default_rng(0).normal(size=200)
        mean = sum(x) / len(x)
        oracle = sum((v - mean) ** 2 for v in x) / len(x)
        assert newey_west_lrv(x, lags=0) == pytest.approx(oracle, rel=1e-12)

    def test_iid_consistency(self):
        x = np.random.default_rng(1).normal(size=10_000)
        assert 0.9 <= newey_west_lrv(x) <= 1.1

    def test_ma1_analytic_oracle(self):
        # x_t = e_t + 0.5 e_{t-1}: long-run variance (1 + 0.5)^2 = 2.25
        rng = np.random.default_rng(2)
        e = rng.normal(size=20_001)
        x = e[1:] + 0.5 * e[:-1]
        assert newey_west_lrv(x) == pytest.approx(2.25, rel=0.15)

    def test_constant_is_degenerate(self):
        with pytest.raises(DegenerateInputError):
            newey_west_lrv(np.full(100, 3.0))

    def test_auto_lag_rule(self):
        assert newey_west_lags(100) == 4
        assert newey_west_lags(1000) == math.floor(4 * 10 ** (2 / 9))

    def test_short_series_rejected(self):
        with pytest.raises(DataError):
            newey_west_lrv(np.arange(5.0))


class TestDmTest:
    def test_identical_series_degenerate(self):
        a = ls(np.random.default_rng(3).normal(size=50))
        b = ls(a.values.copy(), model="other")
        r = dm_test(a, b)
        assert r.degenerate
        assert math.isnan(r.p_one_sided)

    def test_antisymmetry_and_p_sum(self):
        rng = np.random.default_rng(4)
        a, b = ls(rng.normal(size=100)), ls(rng.normal(size=100), model="b")
        fwd, rev = dm_test(a, b), dm_test(b, a)
        assert fwd.statistic == -rev.statistic
        assert fwd.p_one_sided + rev.p_one_sided == pytest.approx(1.0, abs=1e-12)
        assert fwd.p_two_sided == pytest.approx(
            2 * min(fwd.p_one_sided, 1 - fwd.p_one_sided), abs=1e-12)

    def test_location_shift_detected(self):
        rng = np.random.default_rng(5)
        base = rng.normal(size=200)
        worse = base + 1.0 + rng.normal(0, 0.1, 200)
        r = dm_test(ls(worse), ls(base, model="b"))
        assert r.statistic > 0
        assert r.p_one_sided < 0.01

    def test_calibration_under_null(self):
        rejections = 0
        for seed in range(300):
            d = np.random.default_rng(seed).normal(size=200)
            r = dm_test(ls(d), ls(np.zeros(200), model="b"))
            rejections += r.p_two_sided < 0.05
        assert 0.015 <= rejections / 300 <= 0.10

    def test_preconditions(self):
        a = ls(np.random.default_rng(6).normal(size=100))
        short = ls(np.random.default_rng(7).normal(size=20), model="b")
        with pytest.raises(DataError):
            dm_test(a, short)
        other_kind = ls(np.random.default_rng(8).normal(size=100),
                        kind=LossKind.MAE, model="b")
        with pytest.raises(DataError, match="kinds"):
            dm_test(a, other_kind)


class TestGwTest:
    def test_constant_instruments_match_dm_squared(self):
        for seed in range(10):
            rng = np.random.default_rng(seed)
            a, b = ls(rng.normal(size=150)), ls(rng.normal(size=150), model="b")
            dm = dm_test(a, b)
            gw = gw_test(a, b, instruments="constant")
            assert gw.statistic == pytest.approx(dm.statistic ** 2, abs=1e-10)
            assert gw.k == 1

    def test_identical_series_degenerate(self):
        a = ls(np.ones(60))
        b = ls(np.ones(60), model="b")
        assert gw_test(a, b).degenerate

    def test_conditional_mode_detects_predictability(self):
        const_rej = cond_rej = 0
        for seed in range(200):
            rng = np.random.default_rng(seed)
            e = rng.normal(size=201)
            d = np.empty(201)
            d[0] = e[0]
            for t in range(1, 201):
                d[t] = 0.6 * d[t - 1] + e[t]
            a, b = ls(d[1:]), ls(np.zeros(200), model="b")
            const_rej += gw_test(a, b, "constant").p_value < 0.05
            cond_rej += gw_test(a, b, "constant+lag").p_value < 0.05
        assert cond_rej > const_rej

    def test_conditional_k_is_two(self):
        rng = np.random.default_rng(11)
        a, b = ls(rng.normal(size=100)), ls(rng.normal(size=100), model="b")
        assert gw_test(a, b, "constant+lag").k == 2

    def test_unknown_instruments(self):
        a = ls(np.random.default_rng(12).normal(size=60))
        b = ls(np.random.default_rng(13).normal(size=60), model="b")
        with pytest.raises(DataError):
            gw_test(a, b, instruments="quadratic")


class TestStationaryBootstrap:
    def test_deterministic_given_seed(self):
        cfg = BootstrapConfig(replications=100, expected_block_length=5.0, seed=9)
        a = stationary_bootstrap(50, cfg)
        b = stationary_bootstrap(50, cfg)
        np.testing.assert_array_equal(a, b)

    def test_shape_and_range(self):
        cfg = BootstrapConfig(replications=120, expected_block_length=3.0, seed=1)
        idx = stationary_bootstrap(37, cfg)
        assert idx.shape == (120, 37)
        assert idx.min() >= 0 and idx.max() < 37

    def test_near_unit_block_length_is_iid_uniform(self):
        cfg = BootstrapConfig(replications=400, expected_block_length=1.0 + 1e-9,
                              seed=2)
        idx = stationary_bootstrap(20, cfg)
        counts = np.bincount(idx.ravel(), minlength=20)
        assert chisquare(counts).pvalue > 0.01

    def test_mean_block_length_matches_configuration(self):
        n, target = 300, 12.0
        cfg = BootstrapConfig(replications=500, expected_block_length=target, seed=3)
        idx = stationary_bootstrap(n, cfg)
        # block starts show up as discontinuities in the circular index walk
        breaks = int((idx[:, 1:] != (idx[:, :-1] + 1) % n).sum()) + idx.shape[0]
        assert idx.size / breaks == pytest.approx(target, rel=0.10)

    def test_config_validation(self):
        with pytest.raises(DataError):
            BootstrapConfig(replications=50, expected_block_length=5.0, seed=0)
        with pytest.raises(DataError):
            BootstrapConfig(replications=100, expected_block_length=1.0, seed=0)
        cfg = BootstrapConfig(replications=100, expected_block_length=5.0, seed=0)
        with pytest.raises(DataError):
            stationary_bootstrap(1, cfg)


class TestMcs:
    def cfg(self, seed=0, reps=200):
        return BootstrapConfig(replications=reps, expected_block_length=12.0,
                               seed=seed)

    def test_identical_losses_retain_all(self):
        x = np.random.default_rng(0).normal(1.0, 0.1, 100)
        res = mcs({"a": x, "b": x.copy(), "c": x.copy()}, self.cfg(), level=0.95)
        assert res.retained == {"a", "b", "c"}
        assert all(p == 1.0 for p in res.mcs_p.values())
        assert res.eliminated == ()

    def test_dominated_model_eliminated(self):
        rng = np.random.default_rng(1)
        base = rng.normal(1.0, 0.1, 500)
        worse = base + 1.0 + rng.normal(0, 0.1, 500)
        res = mcs({"good": base, "bad": worse}, self.cfg(seed=1), level=0.95)
        assert res.retained == {"good"}
        assert res.eliminated[0][0] == "bad"

    def test_elimination_pvalues_nondecreasing(self):
        rng = np.random.default_rng(2)
        base = rng.normal(1.0, 0.5, 300)
        losses = {f"m{k}": base + 0.02 * k + rng.normal(0, 0.3, 300)
                  for k in range(5)}
        res = mcs(losses, self.cfg(seed=2), level=0.999)
        ps = [p for _, p in res.eliminated]
        assert ps == sorted(ps)

    def test_level_monotonicity(self):
        rng = np.random.default_rng(3)
        base = rng.normal(1.0, 0.5, 300)
        losses = {f"m{k}": base + 0.05 * k + rng.normal(0, 0.3, 300)
                  for k in range(4)}
        r90 = mcs(losses, self.cfg(seed=3), level=0.90)
        r95 = mcs(losses, self.cfg(seed=3), level=0.95)
        assert r90.retained <= r95.retained

    def test_bit_reproducible(self):
        rng = np.random.default_rng(4)
        losses = {f"m{k}": rng.normal(1.0, 0.3, 200) for k in range(3)}
        r1 = mcs(losses, self.cfg(seed=4))
        r2 = mcs(losses, self.cfg(seed=4))
        assert r1.mcs_p == r2.mcs_p
        assert r1.retained == r2.retained

    def test_accepts_loss_series(self):
        rng = np.random.default_rng(5)
        a = ls(rng.normal(1.0, 0.2, 120))
        b = ls(rng.normal(1.0, 0.2, 120), model="b")
        res = mcs({"a": a, "b": b}, self.cfg(seed=5))
        assert res.retained  # at least one model survives

    def test_validation(self):
        x = np.random.default_rng(6).normal(size=100)
        with pytest.raises(DataError):
            mcs({"a": x}, self.cfg())
        with pytest.raises(DataError):
            mcs({"a": x, "b": x[:50]}, self.cfg())
        with pytest.raises(DataError):
            mcs({"a": x, "b": x}, self.cfg(), level=0.4)
        with pytest.raises(DataError):
            mcs({"a": x, "b": x}, self.cfg(), statistic="T_med")

    def test_t_max_variant_runs(self):
        rng = np.random.default_rng(7)
        base = rng.normal(1.0, 0.1, 300)
        worse = base + 1.0
        res = mcs({"good": base, "bad": worse}, self.cfg(seed=7),
                  statistic="T_max")
        assert res.retained == {"good"}
