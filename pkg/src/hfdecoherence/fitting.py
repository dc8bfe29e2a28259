"""Damped least-squares machinery shared by the relaxation and coherence fits."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

__all__ = ["FitResult", "LeastSquaresOutcome", "weighted_least_squares", "delta_method_std"]


@dataclass(frozen=True)
class FitResult:
    """Outcome of a fit.

    ``estimate`` is NaN unless ``converged``. ``degenerate`` marks data
    that carry no measurable decay (estimate consistent with zero).
    """

    estimate: float
    std_error: float
    converged: bool
    iterations: int
    residual_norm: float
    degenerate: bool = False
    params: dict = field(default_factory=dict)
    message: str = ""


@dataclass(frozen=True)
class LeastSquaresOutcome:
    params: np.ndarray
    cov: np.ndarray
    nfev: int
    converged: bool
    residual_norm: float
    message: str


def weighted_least_squares(model, t, y, weights, x0, *, bounds=None, max_nfev=2000,
                           absolute_sigma=False) -> LeastSquaresOutcome:
    """Damped least-squares fit of ``model(t, *params)`` to ``y``.

    Levenberg-Marquardt when unconstrained, trust-region reflective when
    ``bounds=(lower, upper)`` is given. ``weights`` are inverse variances.
    With ``absolute_sigma=False`` the covariance is rescaled by the reduced
    chi-square, as for unknown noise scale.
    """
    sw = np.sqrt(weights)
    x0 = np.asarray(x0, dtype=float)

    def residual(x):
        return sw * (model(t, *x) - y)

    if bounds is None:
        # lm needs at least as many residuals as parameters
        method, bounds = ("lm" if t.size >= x0.size else "trf"), (-np.inf, np.inf)
    else:
        method = "trf"
        x0 = np.clip(x0, bounds[0], bounds[1])
    res = least_squares(residual, x0, method=method, bounds=bounds, max_nfev=max_nfev,
                        x_scale="jac", ftol=1e-12, xtol=1e-12, gtol=1e-12)
    J = res.jac
    with np.errstate(all="ignore"):
        cov = np.linalg.pinv(J.T @ J)
    dof = t.size - x0.size
    chi2 = float(res.fun @ res.fun)
    if not absolute_sigma:
        cov = cov * (chi2 / dof if dof > 0 else np.inf)
    converged = bool(res.success) and res.status > 0 and np.all(np.isfinite(res.x))
    return LeastSquaresOutcome(params=res.x, cov=cov, nfev=int(res.nfev), converged=converged,
                               residual_norm=float(np.sqrt(chi2)), message=str(res.message))


def delta_method_std(gradient, cov) -> float:
    g = np.asarray(gradient, dtype=float)
    var = float(g @ cov @ g)
    return float(np.sqrt(var)) if var >= 0 else float("nan")
