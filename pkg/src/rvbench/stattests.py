"""Forecast-comparison inference: HAC variance, DM and GW tests, MCS.

All bootstrap-dependent outputs are bit-reproducible: every replication
draws from a generator seeded with (seed, replication index), so results do
not depend on execution order.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2, norm

from .errors import DataError, DegenerateInputError
from .losses import LossSeries

logger = logging.getLogger(__name__)

MIN_PERIODS = 30


def newey_west_lags(n: int) -> int:
    """Textbook automatic bandwidth: floor(4 * (n/100)^(2/9))."""
    return int(math.floor(4.0 * (n / 100.0) ** (2.0 / 9.0)))


def newey_west_lrv(x, lags: int | None = None) -> float:
    """Bartlett-weighted long-run variance of a scalar series.

    Autocovariances divide by n. A non-positive estimate (possible with
    strongly negative autocovariances) is floored at a small multiple of
    the zero-lag variance and logged as degenerate.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 10:
        raise DataError(f"long-run variance needs at least 10 observations, have {n}")
    xc = x - np.mean(x)
    gamma0 = float(xc @ xc) / n
    if gamma0 == 0.0:
        raise DegenerateInputError("constant input has no long-run variance")
    L = newey_west_lags(n) if lags is None else int(lags)
    if L < 0:
        raise DataError("lags must be nonnegative")
    s = gamma0
    for j in range(1, min(L, n - 1) + 1):
        gj = float(xc[j:] @ xc[:-j]) / n
        s += 2.0 * (1.0 - j / (L + 1.0)) * gj
    if s <= 0.0:
        floor = 1e-12 * gamma0
        logger.warning("non-positive long-run variance %g floored at %g", s, floor)
        return floor
    return float(s)


@dataclass(frozen=True)
class DmResult:
    statistic: float
    p_one_sided: float
    p_two_sided: float
    n: int
    hac_lags: int
    degenerate: bool = False


def _check_pair(loss_a: LossSeries, loss_b: LossSeries) -> np.ndarray:
    if loss_a.kind is not loss_b.kind:
        raise DataError(f"loss kinds differ: {loss_a.kind} vs {loss_b.kind}")
    if len(loss_a.values) != len(loss_b.values):
        raise DataError("loss series lengths differ")
    if loss_a.dates != loss_b.dates:
        raise DataError("loss series cover different dates")
    if len(loss_a.values) < MIN_PERIODS:
        raise DataError(f"need at least {MIN_PERIODS} periods, have {len(loss_a.values)}")
    return np.asarray(loss_a.values, dtype=float) - np.asarray(loss_b.values, dtype=float)


def dm_test(loss_a: LossSeries, loss_b: LossSeries, lags: int | None = None) -> DmResult:
    """Diebold-Mariano test on the loss differential a - b.

    The statistic studentizes the mean differential with the Newey-West
    variance; the one-sided p-value tests H1 "model a is worse". A constant
    differential has no HAC variance and yields a flagged NaN result.
    """
    d = _check_pair(loss_a, loss_b)
    n = d.size
    L = newey_west_lags(n) if lags is None else int(lags)
    if np.ptp(d) == 0.0:
        return DmResult(math.nan, math.nan, math.nan, n, L, degenerate=True)
    lrv = newey_west_lrv(d, L)
    stat = float(np.mean(d) / math.sqrt(lrv / n))
    p_one = float(norm.sf(stat))
    p_two = 2.0 * min(p_one, 1.0 - p_one)
    return DmResult(stat, p_one, p_two, n, L)


@dataclass(frozen=True)
class GwResult:
    statistic: float
    p_value: float
    k: int
    degenerate: bool = False


INSTRUMENTS = ("constant", "constant+lag")


def gw_test(loss_a: LossSeries, loss_b: LossSeries, instruments: str = "constant",
            lags: int | None = None) -> GwResult:
    """Giacomini-White test of equal conditional predictive ability.

    "constant" instruments reduce to the squared DM statistic against a
    chi-square(1); "constant+lag" regresses the differential on (1, lagged
    differential) and refers m*R^2 to a chi-square(2).
    """
    if instruments not in INSTRUMENTS:
        raise DataError(f"instruments must be one of {INSTRUMENTS}")
    d = _check_pair(loss_a, loss_b)
    n = d.size
    if np.ptp(d) == 0.0:
        return GwResult(math.nan, math.nan, 1 if instruments == "constant" else 2,
                        degenerate=True)
    if instruments == "constant":
        lrv = newey_west_lrv(d, newey_west_lags(n) if lags is None else int(lags))
        stat = float(n * np.mean(d) ** 2 / lrv)
        return GwResult(stat, float(chi2.sf(stat, 1)), 1)
    y = d[1:]
    X = np.column_stack((np.ones(n - 1), d[:-1]))
    xtx = X.T @ X
    if np.linalg.matrix_rank(xtx) < 2:
        raise DataError("singular instrument moment matrix")
    beta = np.linalg.solve(xtx, X.T @ y)
    resid = y - X @ beta
    yy = float(y @ y)
    if yy == 0.0:
        return GwResult(math.nan, math.nan, 2, degenerate=True)
    r2 = 1.0 - float(resid @ resid) / yy
    stat = float((n - 1) * r2)
    return GwResult(stat, float(chi2.sf(stat, 2)), 2)


@dataclass(frozen=True)
class BootstrapConfig:
    replications: int
    expected_block_length: float
    seed: int

    def __post_init__(self):
        if self.replications < 100:
            raise DataError("need at least 100 bootstrap replications")
        if not self.expected_block_length > 1.0:
            raise DataError("expected block length must exceed 1")
        if not 0 <= self.seed < 2 ** 64:
            raise DataError("seed must fit in 64 bits")


def stationary_bootstrap(n: int, config: BootstrapConfig) -> np.ndarray:
    """Index matrix (replications x n) of circular geometric blocks.

    Each position either continues the previous index (mod n) with
    probability 1 - 1/expected_block_length or restarts uniformly. Per
    replication, the generator is seeded with (seed, replication).
    """
    if n < 2:
        raise DataError("bootstrap needs at least two observations")
    p_new = 1.0 / config.expected_block_length
    pos = np.arange(n)
    out = np.empty((config.replications, n), dtype=np.int64)
    for b in range(config.replications):
        rng = np.random.default_rng([config.seed, b])
        starts = rng.integers(0, n, size=n)
        fresh = rng.random(n) < p_new
        fresh[0] = True
        anchors = np.maximum.accumulate(np.where(fresh, pos, -1))
        out[b] = (starts[anchors] + (pos - anchors)) % n
    return out


@dataclass(frozen=True)
class McsResult:
    """Superior set, elimination trail, and per-model MCS p-values."""

    retained: frozenset[str]
    eliminated: tuple[tuple[str, float], ...]
    mcs_p: dict[str, float]
    level: float
    statistic: str


MCS_STATISTICS = ("T_R", "T_max")

_VAR_FLOOR = 1e-300
_BOOT_CHUNK = 64


def _bootstrap_means(L: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Per-replication model means, chunked to bound memory."""
    B = idx.shape[0]
    out = np.empty((B, L.shape[1]))
    for lo in range(0, B, _BOOT_CHUNK):
        hi = min(lo + _BOOT_CHUNK, B)
        out[lo:hi] = L[idx[lo:hi]].mean(axis=1)
    return out


def mcs(losses, config: BootstrapConfig, level: float = 0.95,
        statistic: str = "T_R") -> McsResult:
    """Model Confidence Set by sequential elimination.

    ``losses`` maps model_id to a LossSeries (or plain array) of per-period
    losses, lower is better. Models are eliminated while the bootstrap
    equivalence test rejects; the recorded p-value is the running maximum,
    and the retained set keeps every model whose p-value reaches 1 - level.
    """
    if not 0.5 < level < 1.0:
        raise DataError(f"level must be in (0.5, 1), got {level}")
    if statistic not in MCS_STATISTICS:
        raise DataError(f"statistic must be one of {MCS_STATISTICS}")
    ids = list(losses)
    if len(ids) < 2:
        raise DataError("MCS needs at least two models")
    cols = []
    for m in ids:
        v = losses[m]
        cols.append(np.asarray(v.values if isinstance(v, LossSeries) else v, dtype=float))
    T = cols[0].size
    if any(c.size != T for c in cols):
        raise DataError("loss series must have equal length")
    L = np.column_stack(cols)
    alpha = 1.0 - level

    if np.all(L == L[:, [0]]):
        return McsResult(retained=frozenset(ids), eliminated=(),
                         mcs_p={m: 1.0 for m in ids}, level=level, statistic=statistic)

    idx = stationary_bootstrap(T, config)
    means = L.mean(axis=0)
    bmeans = _bootstrap_means(L, idx)

    surviving = list(range(len(ids)))
    trail: list[tuple[str, float]] = []
    p_run = 0.0
    while len(surviving) > 1:
        s = np.asarray(surviving)
        m = s.size
        mu = means[s]
        bmu = bmeans[:, s]
        dbar = mu[:, None] - mu[None, :]
        bdbar = bmu[:, :, None] - bmu[:, None, :]
        var_ij = np.maximum(((bdbar - dbar[None]) ** 2).mean(axis=0), _VAR_FLOOR)
        ddot = dbar.sum(axis=1) / (m - 1)
        bddot = (m * bmu - bmu.sum(axis=1, keepdims=True)) / (m - 1)
        var_i = np.maximum(((bddot - ddot[None]) ** 2).mean(axis=0), _VAR_FLOOR)
        t_i = ddot / np.sqrt(var_i)
        if statistic == "T_R":
            stat = float(np.max(np.abs(dbar) / np.sqrt(var_ij)))
            bstat = (np.abs(bdbar - dbar[None]) / np.sqrt(var_ij)[None]).max(axis=(1, 2))
        else:
            stat = float(np.max(t_i))
            bstat = ((bddot - ddot[None]) / np.sqrt(var_i)[None]).max(axis=1)
        p_run = max(p_run, float(np.mean(bstat >= stat)))
        worst = int(s[np.argmax(t_i)])
        trail.append((ids[worst], p_run))
        surviving.remove(worst)

    mcs_p = {mid: p for mid, p in trail}
    mcs_p[ids[surviving[0]]] = 1.0
    eliminated = tuple((mid, p) for mid, p in trail if p < alpha)
    out = frozenset(m for m in ids if mcs_p[m] >= alpha)
    return McsResult(retained=out, eliminated=eliminated, mcs_p=mcs_p,
                     level=level, statistic=statistic)
