"""rvbench: realized-variance forecasting benchmarks and evaluation.

Estimators and transforms live in :mod:`rvbench.series`, the econometric
models in :mod:`rvbench.models`, the backtest protocol in
:mod:`rvbench.protocol`, losses and reports in :mod:`rvbench.losses`,
inference in :mod:`rvbench.stattests`, and file formats plus the CLI in
:mod:`rvbench.io` / :mod:`rvbench.cli`.
"""

from .errors import DataError, DegenerateInputError, EstimationError, FormatError, RvBenchError
from .series import (
    IntradayReturns,
    RvObservation,
    RvSeries,
    TradingDay,
    compute_bpv,
    compute_log_returns,
    compute_rv,
    from_log,
    from_log_forecast,
    summary_stats,
    to_log,
)
from .protocol import (
    AlignedPanel,
    ForecastSet,
    ModelSpec,
    SplitPlan,
    SplitSegment,
    align,
    make_split_plan,
    run_backtest,
)
from .losses import (
    DecileReport,
    LossKind,
    LossSeries,
    SkillMatrix,
    aggregate_loss,
    decile_report,
    loss_series,
    skill_matrix,
)
from .stattests import (
    BootstrapConfig,
    DmResult,
    GwResult,
    McsResult,
    dm_test,
    gw_test,
    mcs,
    newey_west_lrv,
    stationary_bootstrap,
)

__version__ = "0.1.0"

__all__ = [
    "RvBenchError", "DataError", "FormatError", "EstimationError", "DegenerateInputError",
    "TradingDay", "RvObservation", "RvSeries", "IntradayReturns",
    "compute_log_returns", "compute_rv", "compute_bpv",
    "to_log", "from_log", "from_log_forecast", "summary_stats",
    "SplitPlan", "SplitSegment", "ModelSpec", "ForecastSet", "AlignedPanel",
    "make_split_plan", "run_backtest", "align",
    "LossKind", "LossSeries", "SkillMatrix", "DecileReport",
    "loss_series", "aggregate_loss", "skill_matrix", "decile_report",
    "DmResult", "GwResult", "BootstrapConfig", "McsResult",
    "newey_west_lrv", "dm_test", "gw_test", "stationary_bootstrap", "mcs",
]
