"""The six forecast losses, skill-score matrices, and decile reports.

Per-period contributions are kept as series so the statistical tests can
work on loss differentials; aggregation applies the mean and, for the
percentage-style losses (MAPE, MDA, SMAPE), a factor of 100. MDA is an
accuracy (higher is better); everything else is an error.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .protocol import AlignedPanel


class LossKind(enum.Enum):
    MSE = "mse"
    MAE = "mae"
    MAPE = "mape"
    MDA = "mda"
    QLIKE = "qlike"
    SMAPE = "smape"

    @classmethod
    def from_name(cls, name: str) -> "LossKind":
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise DataError(f"unknown loss {name!r}; expected one of "
                            f"{[k.value for k in cls]}") from None

    @property
    def higher_is_better(self) -> bool:
        return self is LossKind.MDA

    @property
    def percent(self) -> bool:
        return self in (LossKind.MAPE, LossKind.MDA, LossKind.SMAPE)


# Losses whose per-period term divides by the actual value.
_NEEDS_POSITIVE_ACTUALS = (LossKind.MAPE, LossKind.QLIKE, LossKind.SMAPE)


@dataclass(frozen=True)
class LossSeries:
    """Per-period loss contributions of one model under one loss kind.

    For MDA the series holds the directional-hit indicators for periods
    2..P (the first period has no previous change), so its length is P - 1.
    """

    kind: LossKind
    model_id: str
    values: np.ndarray
    dates: tuple

    def __post_init__(self):
        if len(self.values) != len(self.dates):
            raise DataError("values and dates must have equal length")
        if len(self.values) == 0:
            raise DataError("empty loss series")


def qlike_term(actual: float, forecast: float) -> float:
    """QLIKE contribution: ratio minus its log minus one; zero iff equal."""
    ratio = actual / forecast
    return ratio - math.log(ratio) - 1.0


def loss_series(kind: LossKind, panel: AlignedPanel, model_id: str) -> LossSeries:
    """Per-period contributions of ``model_id`` against the panel actuals."""
    if model_id not in panel.forecasts:
        raise DataError(f"model {model_id!r} not present in panel")
    a = panel.actuals
    f = panel.forecasts[model_id]
    if kind in _NEEDS_POSITIVE_ACTUALS:
        bad = [panel.dates[i] for i in np.flatnonzero(~(a > 0))]
        if bad:
            raise DataError(
                f"{kind.value} undefined for zero actuals on "
                f"{', '.join(str(d) for d in bad[:10])}"
                + ("..." if len(bad) > 10 else ""))
    if kind is LossKind.MSE:
        vals = (a - f) ** 2
    elif kind is LossKind.MAE:
        vals = np.abs(a - f)
    elif kind is LossKind.MAPE:
        vals = np.abs((a - f) / a)
    elif kind is LossKind.QLIKE:
        ratio = a / f
        vals = ratio - np.log(ratio) - 1.0
    elif kind is LossKind.SMAPE:
        vals = 2.0 * np.abs(a - f) / (np.abs(a) + np.abs(f))
    elif kind is LossKind.MDA:
        if len(a) < 2:
            raise DataError("MDA needs at least two periods")
        hits = np.sign(np.diff(a)) == np.sign(np.diff(f))
        vals = hits.astype(float)
        return LossSeries(kind, model_id, vals, tuple(panel.dates[1:]))
    else:  # pragma: no cover - enum is closed
        raise DataError(f"unhandled loss kind {kind}")
    return LossSeries(kind, model_id, vals, tuple(panel.dates))


def aggregate_loss(series: LossSeries) -> float:
    """Mean contribution, scaled by 100 for the percentage losses."""
    mean = float(np.mean(series.values))
    return 100.0 * mean if series.kind.percent else mean


@dataclass(frozen=True)
class SkillMatrix:
    """Pairwise aggregate ratios: entry [row, col] = aggregate(col)/aggregate(row).

    For error losses a value above 1 means the column model errs more than
    the row benchmark. For MDA the same raw ratio of accuracies is reported
    and ``higher_is_better`` is set.
    """

    kind: LossKind
    model_ids: tuple[str, ...]
    ratios: np.ndarray
    higher_is_better: bool

    def as_dict(self):
        return {
            row: {col: float(self.ratios[i, j]) for j, col in enumerate(self.model_ids)}
            for i, row in enumerate(self.model_ids)
        }


def skill_matrix(kind: LossKind, panel: AlignedPanel) -> SkillMatrix:
    """All pairwise aggregate-loss ratios over the panel's models."""
    ids = panel.model_ids
    if len(ids) < 2:
        raise DataError("skill matrix needs at least two models")
    aggs = np.array([aggregate_loss(loss_series(kind, panel, m)) for m in ids])
    zero = [ids[i] for i in np.flatnonzero(aggs == 0)]
    if zero:
        raise DataError(f"zero aggregate loss for {zero}: cannot form ratios")
    ratios = aggs[None, :] / aggs[:, None]
    np.fill_diagonal(ratios, 1.0)
    return SkillMatrix(kind=kind, model_ids=tuple(ids), ratios=ratios,
                       higher_is_better=kind.higher_is_better)


DECILES = tuple((k / 10.0, (k + 1) / 10.0) for k in range(10))


@dataclass(frozen=True)
class DecileReport:
    """Aggregate losses relative to a benchmark, by actual-variance decile."""

    kind: LossKind
    benchmark_id: str
    deciles: tuple[tuple[float, float], ...]
    relative_losses: dict[str, list[float]]
    group_sizes: tuple[int, ...]


def decile_report(kind: LossKind, panel: AlignedPanel, benchmark_id: str,
                  quantile_groups=DECILES) -> DecileReport:
    """Per-quantile-group aggregates relative to the benchmark model.

    Periods are ranked by actual realized variance (ties keep date order);
    group (lo, hi) takes ranks [floor(P*lo), floor(P*hi)).
    """
    groups = [(float(lo), float(hi)) for lo, hi in quantile_groups]
    if not groups or groups[0][0] != 0.0 or groups[-1][1] != 1.0:
        raise DataError("quantile groups must start at 0.0 and end at 1.0")
    for (_, hi1), (lo2, _) in zip(groups, groups[1:]):
        if not math.isclose(hi1, lo2):
            raise DataError("quantile groups must partition (0, 1]")
    if benchmark_id not in panel.forecasts:
        raise DataError(f"benchmark {benchmark_id!r} not present in panel")

    p = len(panel.dates)
    order = np.argsort(panel.actuals, kind="stable")
    series = {m: loss_series(kind, panel, m) for m in panel.model_ids}

    sizes = []
    rel = {m: [] for m in panel.model_ids}
    for lo, hi in groups:
        sel = order[int(math.floor(p * lo)):int(math.floor(p * hi))]
        if sel.size < 5:
            raise DataError(f"quantile group ({lo}, {hi}) has {sel.size} periods (< 5)")
        sizes.append(int(sel.size))
        aggs = {}
        for m, ls in series.items():
            if kind is LossKind.MDA:
                # Indicator i covers period i+1; keep indicators whose
                # period fell in this group.
                mask = np.isin(np.arange(1, p), sel)
                vals = ls.values[mask]
                if vals.size == 0:
                    raise DataError(f"group ({lo}, {hi}) has no MDA terms")
            else:
                vals = ls.values[sel]
            aggs[m] = (100.0 if kind.percent else 1.0) * float(np.mean(vals))
        bench = aggs[benchmark_id]
        if bench == 0:
            raise DataError(f"benchmark aggregate is zero in group ({lo}, {hi})")
        for m in panel.model_ids:
            rel[m].append(aggs[m] / bench)
    return DecileReport(kind=kind, benchmark_id=benchmark_id, deciles=tuple(groups),
                        relative_losses=rel, group_sizes=tuple(sizes))
