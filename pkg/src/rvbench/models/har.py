"""Heterogeneous autoregressions on realized measures (HAR and CHAR).

Both models regress a daily variance target on the previous day's value and
on 5-day and 22-day trailing means of a driving measure: the measure is the
target itself for HAR, and bipower variation for CHAR. Estimation is
ordinary least squares on an expanding window; forecasting is the linear
one-step conditional mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError, EstimationError
from .base import FitDiagnostics, make_diagnostics

# Trailing-mean horizons (trading days).
WEEK = 5
MONTH = 22

# Minimum usable regression rows after the 22-lag warm-up.
MIN_ROWS = 50

N_COEF = 4  # intercept + daily + weekly + monthly


@dataclass(frozen=True)
class HarParams:
    """OLS coefficients of a HAR-type regression."""

    omega: float
    beta_d: float
    beta_w: float
    beta_m: float
    resid_var: float

    def __post_init__(self):
        vals = (self.omega, self.beta_d, self.beta_w, self.beta_m, self.resid_var)
        if not all(np.isfinite(v) for v in vals):
            raise DataError("HAR parameters must be finite")
        if self.resid_var < 0:
            raise DataError("residual variance must be nonnegative")


# CHAR coefficients have the same shape; keep a distinct name so call sites
# say which measure drives the regressors.
CharParams = HarParams


def build_har_regressors(values, t: int) -> tuple[float, float, float]:
    """Daily/weekly/monthly regressors for position ``t`` (0-based).

    Uses only values strictly before ``t``: the previous value, the mean of
    the last 5, and the mean of the last 22.
    """
    x = np.asarray(values, dtype=float)
    if t < MONTH:
        raise DataError(
            f"need {MONTH} prior observations to build regressors, have {t}"
        )
    if t > x.size:
        raise DataError(f"index {t} out of range for series of length {x.size}")
    return (
        float(x[t - 1]),
        float(np.mean(x[t - WEEK:t])),
        float(np.mean(x[t - MONTH:t])),
    )


def _design(target, driver, start: int, stop: int):
    """Regression design over target positions [start, stop)."""
    y_rows, x_rows = [], []
    first = max(start, MONTH)
    for t in range(first, stop):
        d, w, m = build_har_regressors(driver, t)
        x_rows.append((1.0, d, w, m))
        y_rows.append(target[t])
    return np.asarray(x_rows, dtype=float), np.asarray(y_rows, dtype=float)


def _ols(X: np.ndarray, y: np.ndarray) -> tuple[HarParams, FitDiagnostics]:
    n = y.size
    if n < MIN_ROWS:
        raise DataError(f"need at least {MIN_ROWS} usable rows, have {n}")
    if np.linalg.matrix_rank(X) < N_COEF:
        raise EstimationError(
            "design matrix is rank deficient (collinear regressors, e.g. a constant series)"
        )
    coef, _, _, _ = np.linalg.lstsq(X, y, rcond=None)
    resid = y - X @ coef
    ssr = float(resid @ resid)
    sigma2_ml = ssr / n
    loglik = -0.5 * n * (np.log(2 * np.pi) + np.log(max(sigma2_ml, 1e-300)) + 1.0)
    params = HarParams(
        omega=float(coef[0]),
        beta_d=float(coef[1]),
        beta_w=float(coef[2]),
        beta_m=float(coef[3]),
        resid_var=ssr / (n - N_COEF),
    )
    diags = make_diagnostics(loglik, n_params=N_COEF + 1, n_obs=n, converged=True,
                             iterations=0)
    return params, diags


def fit_har(values, start: int = 0, stop: int | None = None):
    """Fit HAR by OLS on target positions [start, stop) of ``values``."""
    x = np.asarray(values, dtype=float)
    stop = x.size if stop is None else stop
    X, y = _design(x, x, start, stop)
    return _ols(X, y)


def fit_char(target_values, bpv_values, start: int = 0, stop: int | None = None,
             char_target: str = "rv"):
    """Fit CHAR: bipower-driven regressors, target rv (or bpv when requested).

    ``char_target="bpv"`` reproduces the pure bipower autoregression; the
    default targets rv so forecasts are comparable to realized variance.
    """
    rv = np.asarray(target_values, dtype=float)
    bpv = np.asarray(bpv_values, dtype=float)
    if rv.size != bpv.size:
        raise DataError("target and bpv series must have equal length")
    stop = rv.size if stop is None else stop
    missing = np.flatnonzero(~np.isfinite(bpv[:stop]))
    if missing.size:
        raise DataError(
            f"bpv missing at {missing.size} positions in fit range "
            f"(first at {int(missing[0])})"
        )
    if char_target == "rv":
        target = rv
    elif char_target == "bpv":
        target = bpv
    else:
        raise DataError(f"unknown char_target {char_target!r}")
    X, y = _design(target, bpv, start, stop)
    return _ols(X, y)


def forecast_har(params: HarParams, regressors: tuple[float, float, float]) -> float:
    """One-step conditional mean given (daily, weekly, monthly) regressors."""
    d, w, m = regressors
    return params.omega + params.beta_d * d + params.beta_w * w + params.beta_m * m


forecast_char = forecast_har
