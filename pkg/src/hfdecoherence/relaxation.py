"""Population relaxation among the eight ground sublevels.

The full dynamics is the linear rate equation dp/dt = G p with
G[f, i] = Gamma_{i->f} for i != f and columns summing to zero. The
measured qubit-state survival probability is modeled by the two coupled
rate equations for |up>, |down> with independent leakage, whose solution
is

    P(t) = exp(-beta t) / (2 alpha) * (kappa sinh(alpha t) + 2 alpha cosh(alpha t))

For the 2x2 sub-generator [[-a, c], [b, -d]] (a, d: total Raman rates out
of the initial and the other qubit state; b, c: exchange rates) this is
reproduced by

    beta  = (a + d) / 2
    alpha = sqrt(((a - d) / 2)**2 + b c)
    kappa = d - a

so the Raman rate out of the initial state is recovered as
beta - kappa / 2, which is also -P'(0).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_series, check_times
from .atomic_structure import DOWN, UP, GroundState, enumerate_ground, ground_index
from .detection import BRIGHT_MEAN, DARK_MEAN, probability_and_weight, simulate_detection
from .fitting import FitResult, delta_method_std, weighted_least_squares
from .scattering import LaserParams, rate_table

__all__ = [
    "RateMatrix",
    "TwoLevelModel",
    "RelaxationData",
    "build_rate_matrix",
    "evolve_populations",
    "qubit_subgenerator",
    "closed_partner",
    "reduce_to_two_level",
    "two_level_curve",
    "eval_two_level",
    "TwoLevelRelaxationRegressor",
    "fit_relaxation",
    "design_times",
    "simulate_relaxation",
]

_BASIS = tuple(enumerate_ground())
_QUBIT = (UP, DOWN)


@dataclass(frozen=True)
class RateMatrix:
    """Generator of ground-state population flow, 1/s (dp/dt = generator @ p)."""

    generator: np.ndarray
    basis: tuple = _BASIS

    def __post_init__(self):
        G = np.array(self.generator, dtype=float)
        n = len(self.basis)
        if G.shape != (n, n):
            raise ValueError(f"generator must be {n}x{n}, got {G.shape}")
        off = G - np.diag(np.diag(G))
        if np.any(off < 0):
            raise ValueError("off-diagonal rates must be non-negative")
        scale = max(float(np.abs(G).max()), 1e-300)
        if np.any(np.abs(G.sum(axis=0)) > 1e-12 * scale):
            raise ValueError("generator columns must sum to zero")
        G.setflags(write=False)
        object.__setattr__(self, "generator", G)

    def index(self, state: GroundState) -> int:
        return self.basis.index(state)


@dataclass(frozen=True)
class TwoLevelModel:
    alpha: float
    beta: float
    kappa: float
    initial: GroundState = UP

    def __post_init__(self):
        if self.initial not in _QUBIT:
            raise ValueError("initial must be UP or DOWN")
        if self.beta < abs(self.alpha) * (1 - 1e-12) - 1e-300:
            raise ValueError(f"beta={self.beta} < |alpha|={abs(self.alpha)}: solution would grow")

    @property
    def raman_rate(self) -> float:
        """Total Raman rate out of the initial state."""
        return self.beta - self.kappa / 2


@dataclass(frozen=True)
class RelaxationData:
    t: np.ndarray
    survival_probability: np.ndarray
    weight: np.ndarray

    def __post_init__(self):
        t, p, w = (np.asarray(x, dtype=float) for x in (self.t, self.survival_probability, self.weight))
        if not (t.shape == p.shape == w.shape) or t.ndim != 1:
            raise ValueError("t, survival_probability and weight must be equal-length 1-d arrays")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "survival_probability", p)
        object.__setattr__(self, "weight", w)


def build_rate_matrix(laser: LaserParams) -> RateMatrix:
    R = rate_table(laser)  # R[i, f]
    G = R.T.copy()
    np.fill_diagonal(G, 0.0)
    np.fill_diagonal(G, -G.sum(axis=0))
    return RateMatrix(G)


def evolve_populations(m: RateMatrix, p0, t):
    """Propagate populations with the matrix exponential.

    ``t`` may be a scalar (returns an 8-vector) or a 1-d array (returns
    shape (len(t), 8)). Round-off negatives above -1e-12 are clamped to 0.
    """
    p0 = np.asarray(p0, dtype=float)
    if p0.shape != (len(m.basis),):
        raise ValueError(f"p0 must have length {len(m.basis)}")
    if np.any(p0 < 0) or abs(p0.sum() - 1.0) > 1e-9:
        raise ValueError("p0 must be a probability vector")
    times = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(times < 0) or not np.all(np.isfinite(times)):
        raise ValueError("times must be finite and non-negative")
    out = np.empty((times.size, p0.size))
    for k, tk in enumerate(times):
        p = expm(m.generator * tk) @ p0
        if np.any(p < -1e-12) or not np.all(np.isfinite(p)):
            raise FloatingPointError(f"population propagation failed at t={tk}")
        out[k] = np.clip(p, 0.0, None)
    return out[0] if np.ndim(t) == 0 else out


def qubit_subgenerator(m: RateMatrix) -> np.ndarray:
    """2x2 block of the generator on (|up>, |down>); leakage stays in the diagonal."""
    idx = [m.index(UP), m.index(DOWN)]
    return np.array(m.generator[np.ix_(idx, idx)])


def closed_partner(m: RateMatrix, initial: GroundState) -> GroundState | None:
    """The state that, together with ``initial``, forms a closed exchange pair.

    A pair is closed when nothing that leaves it ever returns. The survival
    of ``initial`` is then exactly of the two-level form with the pair's
    2x2 block. Returns None if no such partner exists.
    """
    G = m.generator
    n = len(m.basis)
    i = m.index(initial)
    reach = (G > 0).astype(int)  # reach[f, i]: direct flow i -> f
    closure = np.linalg.matrix_power(np.eye(n, dtype=int) + reach, n) > 0
    best, best_rate = None, -1.0
    for j in range(n):
        if j == i:
            continue
        pair = {i, j}
        outside = [k for k in range(n) if k not in pair]
        leaks_back = any(closure[p, k] for k in outside for p in pair
                         if any(G[k, q] > 0 for q in pair))
        if leaks_back:
            continue
        rate = G[j, i] * G[i, j]
        if rate > best_rate:
            best, best_rate = m.basis[j], rate
    return best


def reduce_to_two_level(m: RateMatrix, initial: GroundState = UP,
                        partner: GroundState | str | None = None) -> TwoLevelModel:
    """Map the 8-level generator onto the constants of the two-level curve.

    By default the pair is (|up>, |down>) and population leaving the qubit
    is treated as lost. ``partner`` replaces the other qubit state by any
    ground state; ``partner="auto"`` picks ``closed_partner``, for which
    the two-level curve is the exact survival of the full evolution.
    """
    if initial not in _QUBIT:
        raise ValueError("initial must be UP or DOWN")
    if partner is None:
        partner = DOWN if initial == UP else UP
    elif partner == "auto":
        partner = closed_partner(m, initial)
        if partner is None:
            raise ValueError(f"no closed exchange partner for {initial}")
    if partner == initial:
        raise ValueError("partner must differ from the initial state")
    idx = [m.index(initial), m.index(partner)]
    M = m.generator[np.ix_(idx, idx)]
    out_initial, out_other = -M[0, 0], -M[1, 1]
    beta = 0.5 * (out_initial + out_other)
    alpha = math.sqrt(0.25 * (out_initial - out_other) ** 2 + M[0, 1] * M[1, 0])
    return TwoLevelModel(alpha=alpha, beta=beta, kappa=out_other - out_initial, initial=initial)


def two_level_curve(t, alpha, beta, kappa):
    """Vectorized survival probability; finite for every alpha including 0."""
    t = np.asarray(t, dtype=float)
    a = abs(alpha)
    x = a * t
    with np.errstate(over="ignore", invalid="ignore"):
        slow = np.exp(-(beta - a) * t)
        fast = np.exp(-(beta + a) * t)
        cosh_part = 0.5 * (slow + fast)
        small = x < 1e-4
        safe_a = a if a > 0 else 1.0
        sinh_over_a = np.where(
            small,
            t * np.exp(-beta * t) * (1.0 + x * x / 6.0),
            (slow - fast) / (2.0 * safe_a),
        )
    return cosh_part + 0.5 * kappa * sinh_over_a


def eval_two_level(model: TwoLevelModel, t):
    """Survival probability of the two-level model at time(s) ``t`` >= 0."""
    if np.any(np.asarray(t) < 0):
        raise ValueError("t must be non-negative")
    out = two_level_curve(t, model.alpha, model.beta, model.kappa)
    return float(out) if np.ndim(t) == 0 else out


def _alpha_zero_curve(t, beta, kappa):
    return np.exp(-beta * t) * (1.0 + 0.5 * kappa * t)


def _two_exponential(t, slow, gap, c_fast):
    return (1.0 - c_fast) * np.exp(-slow * t) + c_fast * np.exp(-(slow + gap) * t)


class TwoLevelRelaxationRegressor(RegressorMixin, BaseEstimator):
    """Least-squares fit of the two-level survival curve.

    ``fit(X, y)`` takes times (shape (n,) or (n, 1)) and measured survival
    probabilities; ``sample_weight`` are inverse variances. The fitted Raman
    rate out of the initial state is ``gamma_raman_``.

    Without ``shape`` all three constants are free. They are fitted as the
    equivalent two-exponential form (1 - c) exp(-s t) + c exp(-(s + g) t)
    with s, g >= 0 and 0 <= c <= 1, which is exactly the set of curves
    produced by non-negative 2x2 rate models (beta >= alpha, |kappa| <= 2 alpha).
    With ``shape`` (a TwoLevelModel, e.g. from ``reduce_to_two_level``) only
    an overall rate scale is fitted, keeping alpha:beta:kappa fixed.

    Parameters
    ----------
    shape : TwoLevelModel or None
        Fix the ratios of the constants and fit only their scale.
    alpha_significance : float
        If the fitted alpha is below this many standard errors, the
        alpha -> 0 limit form is fitted instead.
    max_rate_factor : float
        Upper bound on the fast-slow rate gap, in units of one over the
        shortest nonzero sampling time; faster components are unresolvable.
    max_nfev : int
        Function-evaluation budget per least-squares run.
    absolute_sigma : bool
        Treat weights as exact inverse variances instead of relative ones.
    """

    def __init__(self, shape=None, alpha_significance=2.0, max_rate_factor=3.0,
                 max_nfev=2000, absolute_sigma=False):
        self.shape = shape
        self.alpha_significance = alpha_significance
        self.max_rate_factor = max_rate_factor
        self.max_nfev = max_nfev
        self.absolute_sigma = absolute_sigma

    @staticmethod
    def _prefit(t, y):
        """Slow rate from a log-linear fit of the late-time tail, and -P'(0)."""
        span = t[-1] - t[0]
        if span <= 0:
            raise ValueError("times must span a non-zero interval")
        tail = (t >= t[0] + 0.5 * span) & (y > 0.02)
        slow = 0.0
        if tail.sum() >= 2:
            slow = max(-np.polyfit(t[tail], np.log(y[tail]), 1)[0], 0.0)
        head = min(4, t.size)
        initial_slope = -np.polyfit(t[:head], y[:head], 1)[0]
        if not initial_slope > 0:
            initial_slope = slow
        return slow, initial_slope, span

    def _fit_free(self, t, y, w):
        slow_tail, slope0, span = self._prefit(t, y)
        positive = t[t > 0]
        gap_cap = self.max_rate_factor / positive.min() if positive.size else np.inf
        scale = max(slope0, 1e-3 / span)
        bounds = ([0.0, 0.0, 0.0], [np.inf, gap_cap, 1.0])
        starts = [0.3 * scale, 0.6 * scale, 0.9 * scale]
        if 0 < slow_tail < scale:
            starts.append(slow_tail)
        best = None
        for s0 in starts:
            for c0 in (0.2, 0.5, 0.8):
                # match the initial slope: (1 - c) s + c (s + g) = scale
                gap0 = min(max((scale - s0) / c0, 0.1 * scale), 0.9 * gap_cap)
                out = weighted_least_squares(_two_exponential, t, y, w, (s0, gap0, c0), bounds=bounds,
                                             max_nfev=self.max_nfev, absolute_sigma=self.absolute_sigma)
                if best is None or (out.converged, -out.residual_norm) > (best.converged, -best.residual_norm):
                    best = out
        slow, gap, c = best.params
        std = delta_method_std([1.0, c, gap], best.cov)
        gap_std = float(np.sqrt(max(best.cov[1, 1], 0.0)))
        alpha, beta, kappa = 0.5 * gap, slow + 0.5 * gap, gap * (1.0 - 2.0 * c)
        limit = False
        if not gap > self.alpha_significance * gap_std:
            # coincident rates: the critically damped form is a separate candidate
            out = weighted_least_squares(_alpha_zero_curve, t, y, w, (beta, kappa),
                                         max_nfev=self.max_nfev, absolute_sigma=self.absolute_sigma)
            if out.converged and out.residual_norm < best.residual_norm:
                best, limit = out, True
                alpha, (beta, kappa) = 0.0, out.params
                std = delta_method_std([1.0, -0.5], out.cov)
        return best, (alpha, beta, kappa), std, limit

    def _fit_shape(self, t, y, w):
        shape = self.shape
        unit = shape.raman_rate
        if not unit > 0:
            raise ValueError("shape must have a positive Raman rate")
        _, slope0, span = self._prefit(t, y)
        s0 = max(slope0, 1e-3 / span) / unit

        def curve(tt, s):
            return two_level_curve(tt, s * shape.alpha, s * shape.beta, s * shape.kappa)

        out = weighted_least_squares(curve, t, y, w, (s0,), bounds=([0.0], [np.inf]),
                                     max_nfev=self.max_nfev, absolute_sigma=self.absolute_sigma)
        s = out.params[0]
        std = unit * float(np.sqrt(max(out.cov[0, 0], 0.0)))
        return out, (s * shape.alpha, s * shape.beta, s * shape.kappa), std, False

    def fit(self, X, y, sample_weight=None):
        t, y, w = check_series(X, y, sample_weight, min_samples=5)
        if self.shape is None:
            best, params, std, limit = self._fit_free(t, y, w)
        else:
            best, params, std, limit = self._fit_shape(t, y, w)
        self.alpha_, self.beta_, self.kappa_ = (float(x) for x in params)
        self.limit_form_ = bool(limit)
        self.converged_ = bool(best.converged)
        self.n_iter_ = best.nfev
        self.residual_norm_ = best.residual_norm
        estimate = self.beta_ - 0.5 * self.kappa_
        self.gamma_raman_ = estimate if self.converged_ else math.nan
        self.gamma_raman_std_ = std
        span = t[-1] - t[0]
        self.degenerate_ = bool(abs(estimate) * span < 1e-6 or abs(estimate) < 2.0 * std)
        self.message_ = best.message
        return self

    def predict(self, X):
        check_is_fitted(self, "gamma_raman_")
        return two_level_curve(check_times(X), self.alpha_, self.beta_, self.kappa_)

    def to_result(self) -> FitResult:
        check_is_fitted(self, "gamma_raman_")
        return FitResult(
            estimate=self.gamma_raman_,
            std_error=self.gamma_raman_std_,
            converged=self.converged_,
            iterations=self.n_iter_,
            residual_norm=self.residual_norm_,
            degenerate=self.degenerate_,
            params={"alpha": self.alpha_, "beta": self.beta_, "kappa": self.kappa_,
                    "limit_form": self.limit_form_},
            message=self.message_,
        )


def fit_relaxation(samples, shape: TwoLevelModel | None = None, **kwargs) -> FitResult:
    """Fit (t, P) or (t, P, weight) samples, or a RelaxationData, to the survival curve.

    ``shape`` selects the one-parameter family with fixed constant ratios;
    by default alpha, beta and kappa are all free.
    """
    if isinstance(samples, RelaxationData):
        t, p, w = samples.t, samples.survival_probability, samples.weight
    else:
        arr = np.asarray(samples, dtype=float)
        if arr.ndim != 2 or arr.shape[1] not in (2, 3):
            raise ValueError("samples must be rows of (t, P) or (t, P, weight)")
        t, p = arr[:, 0], arr[:, 1]
        w = arr[:, 2] if arr.shape[1] == 3 else None
    return TwoLevelRelaxationRegressor(shape=shape, **kwargs).fit(t, p, sample_weight=w).to_result()


def design_times(rate: float, n: int = 30, span: float = 3.0) -> np.ndarray:
    """Sampling grid t = (span / rate) u^2, u uniform on [0, 1].

    Dense early sampling resolves the fast component and the initial slope.
    """
    if not rate > 0 or n < 2:
        raise ValueError("rate must be positive and n >= 2")
    return (span / rate) * np.linspace(0.0, 1.0, n) ** 2


def simulate_relaxation(laser: LaserParams, times, initial: GroundState = UP, *,
                        repetitions: int | None = 400, seed=None, model: str = "rate_equations",
                        bright_mean: float = BRIGHT_MEAN, dark_mean: float = DARK_MEAN) -> RelaxationData:
    """Survival of ``initial`` under the decohering beam, optionally with detection noise.

    ``model`` is ``"rate_equations"`` (full 8-level evolution) or
    ``"two_level"`` (the reduced model). With ``repetitions=None`` the
    exact probabilities are returned with unit weights.
    """
    times = check_times(times, name="times")
    m = build_rate_matrix(laser)
    if model == "rate_equations":
        p0 = np.zeros(len(m.basis))
        p0[m.index(initial)] = 1.0
        truth = evolve_populations(m, p0, times)[:, m.index(initial)]
    elif model == "two_level":
        truth = eval_two_level(reduce_to_two_level(m, initial), times)
    else:
        raise ValueError(f"unknown model {model!r}")
    truth = np.clip(truth, 0.0, 1.0)
    if repetitions is None:
        return RelaxationData(times, truth, np.ones_like(truth))
    streams = np.random.SeedSequence(seed).spawn(times.size)
    p_hat, weights = np.empty_like(truth), np.empty_like(truth)
    for k, (p, ss) in enumerate(zip(truth, streams)):
        counts = simulate_detection(p, repetitions, np.random.default_rng(ss),
                                    bright_mean=bright_mean, dark_mean=dark_mean)
        p_hat[k], weights[k] = probability_and_weight(counts, bright_mean, dark_mean)
    return RelaxationData(times, p_hat, weights)
