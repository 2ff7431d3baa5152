"""Long-memory ARFIMA(p, d, q) estimation and one-step forecasting.

The series is demeaned, fractionally differenced with the binomial-weight
recurrence, and the ARMA part is estimated by conditional sum of squares.
The differencing order lives in (0, 1) via a logistic transform; AR and MA
coefficients are kept stationary/invertible through a partial-autocorrelation
parameterization. Differencing truncation defaults to the full available
history.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve, lfilter

from ..errors import DataError, EstimationError
from .base import FitDiagnostics, make_diagnostics, minimize_with_restarts

MIN_FIT_OBS = 200
MAX_ORDER = 2

# Direct convolution below this length; FFT above (fit path only).
_FFT_CUTOFF = 2048


@dataclass(frozen=True)
class ArfimaParams:
    """Estimated ARFIMA coefficients.

    ``ar``/``ma`` hold the AR polynomial 1 - sum(ar_i B^i) and MA polynomial
    1 + sum(ma_j B^j) coefficients; ``mu`` is the mean removed before
    differencing.
    """

    d: float
    p: int
    q: int
    ar: tuple[float, ...]
    ma: tuple[float, ...]
    mu: float
    innovation_var: float

    def __post_init__(self):
        if len(self.ar) != self.p or len(self.ma) != self.q:
            raise DataError("ar/ma lengths must match declared orders")
        if not -0.5 < self.d < 1.0:
            raise DataError(f"fractional order d={self.d} outside (-0.5, 1)")
        for poly, name in ((self.ar, "AR"), (self.ma, "MA")):
            if poly and _min_root_modulus(poly, name == "AR") <= 1.0:
                raise DataError(f"{name} polynomial root inside the unit circle")


def _min_root_modulus(coefs, is_ar: bool) -> float:
    # AR: 1 - a1 z - a2 z^2 ...; MA: 1 + m1 z + m2 z^2 ...
    sign = -1.0 if is_ar else 1.0
    poly = np.concatenate(([1.0], sign * np.asarray(coefs, dtype=float)))
    roots = np.roots(poly[::-1])
    if roots.size == 0:
        return np.inf
    return float(np.min(np.abs(roots)))


def frac_diff_weights(d: float, truncation: int) -> np.ndarray:
    """Binomial weights pi_0..pi_truncation of (1 - B)^d."""
    if truncation < 1:
        raise DataError("truncation must be >= 1")
    k = np.arange(1, truncation + 1, dtype=float)
    return np.concatenate(([1.0], np.cumprod((k - 1.0 - d) / k)))


def _truncated_convolve(x: np.ndarray, w: np.ndarray, fft: bool) -> np.ndarray:
    if fft and x.size >= _FFT_CUTOFF:
        return fftconvolve(x, w)[: x.size]
    return np.convolve(x, w)[: x.size]


def frac_diff(x, d: float, truncation: int | None = None, fft: bool = False) -> np.ndarray:
    """Apply (1 - B)^d with weights truncated at ``truncation`` lags.

    Output has the same length as the input; early values use only the
    available history. ``fft`` switches to FFT convolution for long fit
    windows (same values up to roundoff, not bit-identical to direct).
    """
    x = np.asarray(x, dtype=float)
    if not -1.0 <= d <= 1.0:
        raise DataError(f"d={d} outside [-1, 1]")
    truncation = x.size if truncation is None else truncation
    w = frac_diff_weights(d, max(truncation, 1))
    return _truncated_convolve(x, w, fft)


def frac_integrate(y, d: float, truncation: int | None = None, fft: bool = False) -> np.ndarray:
    """Apply (1 - B)^(-d): the inverse transform of :func:`frac_diff`."""
    return frac_diff(y, -d, truncation, fft)


def _pacf_to_ar(pacf: np.ndarray) -> np.ndarray:
    """Durbin-Levinson map from partial autocorrelations to AR coefficients."""
    phi = np.empty(0)
    for k in pacf:
        phi = np.concatenate((phi - k * phi[::-1], [k]))
    return phi


def _unpack(raw: np.ndarray, p: int, q: int):
    # clamp the logit so the logistic stays strictly inside (0, 1) in floats
    d = 1.0 / (1.0 + np.exp(-np.clip(raw[0], -35.0, 35.0)))
    ar = _pacf_to_ar(np.tanh(raw[1:1 + p]))
    ma = -_pacf_to_ar(np.tanh(raw[1 + p:1 + p + q]))
    return d, ar, ma


def _innovations(y: np.ndarray, ar: np.ndarray, ma: np.ndarray) -> np.ndarray:
    """One-step residuals of the ARMA recursion with zero start-up values."""
    b = np.concatenate(([1.0], -np.asarray(ar, dtype=float)))
    a = np.concatenate(([1.0], np.asarray(ma, dtype=float)))
    return lfilter(b, a, y)


def fit_arfima(values, p: int = 1, q: int = 1, seed: int = 0,
               truncation: int | None = None) -> tuple[ArfimaParams, FitDiagnostics]:
    """Estimate (d, AR, MA) by conditional sum of squares."""
    x = np.asarray(values, dtype=float)
    if x.size < MIN_FIT_OBS:
        raise DataError(f"ARFIMA fit needs >= {MIN_FIT_OBS} observations, have {x.size}")
    if not (0 <= p <= MAX_ORDER and 0 <= q <= MAX_ORDER):
        raise DataError(f"orders must be in 0..{MAX_ORDER}, got p={p}, q={q}")
    mu = float(np.mean(x))
    z = x - mu
    trunc = x.size if truncation is None else truncation

    def css(raw):
        d, ar, ma = _unpack(raw, p, q)
        y = frac_diff(z, d, trunc, fft=True)
        eps = _innovations(y, ar, ma)
        val = float(eps @ eps)
        return val if np.isfinite(val) else np.inf

    # Start near d = 0.3 with zero ARMA terms.
    raw0 = np.concatenate(([np.log(0.3 / 0.7)], np.zeros(p + q)))
    res = minimize_with_restarts(css, raw0, seed=seed)
    d, ar, ma = _unpack(res.x, p, q)
    n = x.size
    sigma2 = max(res.fun / n, 1e-300)
    params = ArfimaParams(
        d=float(d), p=p, q=q,
        ar=tuple(float(v) for v in ar),
        ma=tuple(float(v) for v in ma),
        mu=mu,
        innovation_var=res.fun / n,
    )
    loglik = -0.5 * n * (np.log(2 * np.pi) + np.log(sigma2) + 1.0)
    diags = make_diagnostics(loglik, n_params=p + q + 3, n_obs=n,
                             converged=bool(res.success), iterations=res.total_nit)
    if not res.success:
        raise EstimationError(
            f"ARFIMA CSS optimizer did not converge in {res.total_nit} iterations",
            partial=(params, diags),
        )
    return params, diags


def forecast_arfima(params: ArfimaParams, history, truncation: int | None = None) -> float:
    """One-step-ahead conditional mean given the observed history.

    Differences the demeaned history, forecasts the ARMA step, and undoes
    the differencing against the observed past.
    """
    x = np.asarray(history, dtype=float)
    need = max(params.p, params.q, 1)
    if x.size < need:
        raise DataError(f"need at least {need} observations to forecast, have {x.size}")
    n = x.size
    trunc = min(n, n if truncation is None else truncation)
    z = x - params.mu
    y = frac_diff(z, params.d, trunc)
    eps = _innovations(y, np.asarray(params.ar), np.asarray(params.ma))
    yhat = 0.0
    for i, phi in enumerate(params.ar, start=1):
        yhat += phi * y[n - i]
    for j, theta in enumerate(params.ma, start=1):
        yhat += theta * eps[n - j]
    w = frac_diff_weights(params.d, trunc)
    tail = float(np.dot(w[1:], z[n - 1:: -1][: w.size - 1]))
    return params.mu + yhat - tail


def one_step_forecasts(params: ArfimaParams, values, positions) -> np.ndarray:
    """One-step forecasts for each position t, using only data before t.

    Equivalent to calling :func:`forecast_arfima` on ``values[:t]`` for every
    t, but computed in one pass: the forecast at t is the observation minus
    its own ARMA innovation.
    """
    x = np.asarray(values, dtype=float)
    z = x - params.mu
    y = frac_diff(z, params.d, x.size)
    eps = _innovations(y, np.asarray(params.ar), np.asarray(params.ma))
    f = params.mu + z - eps
    idx = np.asarray(list(positions), dtype=int)
    return f[idx]


def simulate_arfima(n: int, d: float, ar=(), ma=(), sigma: float = 1.0,
                    mu: float = 0.0, seed: int = 0, burn: int = 500) -> np.ndarray:
    """Generate an ARFIMA path (used for estimator-recovery checks)."""
    rng = np.random.default_rng(seed)
    total = n + burn
    eps = rng.normal(0.0, sigma, total)
    b = np.concatenate(([1.0], np.asarray(ma, dtype=float)))
    a = np.concatenate(([1.0], -np.asarray(ar, dtype=float)))
    y = lfilter(b, a, eps)
    x = frac_integrate(y, d, total, fft=True)
    return mu + x[burn:]
