"""Shared fit diagnostics and the derivative-free optimizer driver."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize


@dataclass(frozen=True)
class FitDiagnostics:
    """Common fit metadata: aic = 2*k - 2*loglik with k = n_params."""

    loglik: float
    aic: float
    n_obs: int
    converged: bool
    iterations: int
    n_params: int

    def __post_init__(self):
        if not np.isclose(self.aic, 2 * self.n_params - 2 * self.loglik):
            raise ValueError("aic inconsistent with loglik and parameter count")


def make_diagnostics(loglik: float, n_params: int, n_obs: int, converged: bool,
                     iterations: int) -> FitDiagnostics:
    return FitDiagnostics(
        loglik=float(loglik),
        aic=float(2 * n_params - 2 * loglik),
        n_obs=int(n_obs),
        converged=bool(converged),
        iterations=int(iterations),
        n_params=int(n_params),
    )


def minimize_with_restarts(objective, x0, seed: int = 0, n_restarts: int = 3,
                           spread: float = 0.3, maxiter: int = 2000,
                           xatol: float = 1e-8, fatol: float = 1e-10):
    """Nelder-Mead from x0 plus seeded random restarts; returns the best result.

    Restart points are drawn from a generator seeded with ``seed`` only, so
    repeated calls are bit-reproducible.
    """
    x0 = np.asarray(x0, dtype=float)
    rng = np.random.default_rng(seed)
    starts = [x0] + [x0 + spread * rng.standard_normal(x0.size) for _ in range(n_restarts)]
    best = None
    iterations = 0
    for s in starts:
        with warnings.catch_warnings():
            # objectives signal infeasible points with +inf by design
            warnings.filterwarnings("ignore", "invalid value encountered",
                                    RuntimeWarning)
            res = minimize(
                objective, s, method="Nelder-Mead",
                options={"maxiter": maxiter, "xatol": xatol, "fatol": fatol},
            )
        iterations += res.nit
        if best is None or res.fun < best.fun:
            best = res
    best.total_nit = iterations
    return best


def polish_minimum(objective, x0, maxiter: int = 200):
    """Quasi-Newton polish of an already-located minimum.

    Runs BFGS with numerical gradients from ``x0``; returns the polished
    result if it did not get worse, else None. Used to push the gradient at
    the reported optimum to near zero, which simplex descent alone does not
    guarantee.
    """
    try:
        with warnings.catch_warnings():
            warnings.filterwarnings("ignore", "invalid value encountered",
                                    RuntimeWarning)
            res = minimize(objective, np.asarray(x0, dtype=float), method="BFGS",
                           options={"maxiter": maxiter})
    except (ValueError, FloatingPointError):
        return None
    if not np.isfinite(res.fun):
        return None
    if res.fun <= objective(np.asarray(x0, dtype=float)) + 1e-12:
        return res
    return None
