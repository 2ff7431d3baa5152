"""Benchmark model estimation and forecasting."""

from .base import FitDiagnostics
from .har import (
    CharParams,
    HarParams,
    build_har_regressors,
    fit_char,
    fit_har,
    forecast_char,
    forecast_har,
)
from .arfima import (
    ArfimaParams,
    fit_arfima,
    forecast_arfima,
    frac_diff,
    frac_diff_weights,
    frac_integrate,
    simulate_arfima,
)
from .rgarch import (
    RgarchParams,
    filter_log_h,
    fit_rgarch,
    forecast_rgarch,
    rgarch_nll,
    select_rgarch_order,
)

__all__ = [
    "FitDiagnostics",
    "HarParams", "CharParams", "build_har_regressors", "fit_har", "fit_char",
    "forecast_har", "forecast_char",
    "ArfimaParams", "frac_diff", "frac_diff_weights", "frac_integrate",
    "fit_arfima", "forecast_arfima", "simulate_arfima",
    "RgarchParams", "rgarch_nll", "fit_rgarch", "forecast_rgarch",
    "filter_log_h", "select_rgarch_order",
]
