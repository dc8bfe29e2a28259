"""Ramsey/spin-echo coherence measurement under the decohering beam.

The sequence is a pi/2 pulse, n_pi echo pulses of alternating phase
separated by 2 tau_echo (tau_echo before the first and after the last),
and a final pi/2 pulse at the Ramsey phase. The beam is on only between
pulses, so the total decohering time is tau = 2 n_pi tau_echo. Pulses are
ideal instantaneous rotations of the {|up>, |down>} pair; population that
has left the pair is not addressed by them.

Two models of the windows are provided. The analytic channel evolves the
qubit density matrix with the reduced 2x2 rate model and a coherence
decay gamma_dec = (Gamma_out(up) + Gamma_out(down)) / 2. The trajectory
simulator unravels the full 8-level dynamics: a Raman event collapses the
qubit onto the destination sublevel, a Rayleigh event changes nothing.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import expm
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_series, check_times
from .atomic_structure import DOWN, UP, ground_index
from .detection import BRIGHT_MEAN, DARK_MEAN, simulate_detection
from .fitting import FitResult, weighted_least_squares
from .relaxation import build_rate_matrix, qubit_subgenerator
from .scattering import LaserParams, differential_stark, rate_table, scattering_amplitudes

__all__ = [
    "EchoSequence",
    "QubitState",
    "QubitChannel",
    "TrajectoryResult",
    "RamseyData",
    "echo_sweep",
    "qubit_channel",
    "rotate",
    "decohere_window",
    "run_sequence",
    "analytic_contrast",
    "run_trajectories",
    "simulate_detection",
    "simulate_ramsey_data",
    "ExponentialDecayRegressor",
    "fit_coherence_decay",
]

PI_TIME = 5e-6
MIN_PI, MAX_PI = 2, 18
_UP, _DOWN = ground_index(UP), ground_index(DOWN)
_QUBIT_INDEX = (_UP, _DOWN)
_TOL = 1e-9


@dataclass(frozen=True)
class EchoSequence:
    """Pulse timing. Times in seconds, phases in radians."""

    tau_echo: float
    n_pi: int = 2
    ramsey_phase: float = 0.0
    pi_time: float = PI_TIME
    pi_phases: tuple = None

    def __post_init__(self):
        if not (self.tau_echo > 0 and math.isfinite(self.tau_echo)):
            raise ValueError("tau_echo must be positive and finite")
        if int(self.n_pi) != self.n_pi or not MIN_PI <= self.n_pi <= MAX_PI:
            raise ValueError(f"n_pi must be an integer in [{MIN_PI}, {MAX_PI}], got {self.n_pi}")
        if self.pi_time < 0:
            raise ValueError("pi_time must be non-negative")
        phases = self.pi_phases
        if phases is None:
            phases = tuple(math.pi * (k % 2) for k in range(self.n_pi))
        phases = tuple(float(p) for p in phases)
        if len(phases) != self.n_pi:
            raise ValueError("pi_phases must have one entry per pi pulse")
        object.__setattr__(self, "n_pi", int(self.n_pi))
        object.__setattr__(self, "pi_phases", phases)

    @classmethod
    def from_total(cls, tau: float, n_pi: int = 2, **kwargs) -> "EchoSequence":
        return cls(tau_echo=tau / (2 * n_pi), n_pi=n_pi, **kwargs)

    @property
    def tau(self) -> float:
        """Total decohering time."""
        return math.fsum(d for _, d in self.decohering_windows)

    @property
    def window_durations(self) -> list:
        return [self.tau_echo] + [2 * self.tau_echo] * (self.n_pi - 1) + [self.tau_echo]

    @property
    def decohering_windows(self) -> list:
        """(start, duration) of each beam window on the sequence clock."""
        out, t = [], 0.5 * self.pi_time
        for d in self.window_durations:
            out.append((t, d))
            t += d + self.pi_time
        return out

    @property
    def contrast_sign(self) -> int:
        # an odd number of pi pulses inverts the Ramsey fringe
        return -1 if self.n_pi % 2 else 1

    def with_phase(self, phase: float) -> "EchoSequence":
        return replace(self, ramsey_phase=phase)

    def events(self):
        """Pulses ("pulse", theta, phi) and beam windows ("window", dt), in order,
        up to but excluding the final Ramsey pulse."""
        yield ("pulse", math.pi / 2, 0.0)
        durations = self.window_durations
        for k, phase in enumerate(self.pi_phases):
            yield ("window", durations[k])
            yield ("pulse", math.pi, phase)
        yield ("window", durations[-1])


def echo_sweep(tau_echo: float, n_pis=range(2, 19, 2), **kwargs) -> list:
    """Sequences at fixed tau_echo and varying pulse number, as in the measurement."""
    return [EchoSequence(tau_echo=tau_echo, n_pi=n, **kwargs) for n in n_pis]


@dataclass(frozen=True)
class QubitState:
    """Density matrix on (|up>, |down>) plus population outside the pair."""

    density: np.ndarray
    leaked: float = 0.0

    def __post_init__(self):
        rho = np.array(self.density, dtype=complex)
        if rho.shape != (2, 2):
            raise ValueError("density must be 2x2")
        problems = _physicality_problems(rho, self.leaked)
        if problems:
            raise ValueError("unphysical qubit state: " + "; ".join(problems))
        rho.setflags(write=False)
        object.__setattr__(self, "density", rho)
        object.__setattr__(self, "leaked", float(self.leaked))

    @classmethod
    def up(cls) -> "QubitState":
        return cls(np.array([[1, 0], [0, 0]], dtype=complex))

    @classmethod
    def down(cls) -> "QubitState":
        return cls(np.array([[0, 0], [0, 1]], dtype=complex))

    @property
    def populations(self) -> np.ndarray:
        return self.density.diagonal().real.copy()

    @property
    def coherence(self) -> complex:
        return complex(self.density[0, 1])


def _physicality_problems(rho, leaked) -> list:
    out = []
    if not np.all(np.isfinite(rho)) or not math.isfinite(leaked):
        return ["non-finite entries"]
    if np.abs(rho - rho.conj().T).max() > _TOL:
        out.append("not Hermitian")
    p = rho.diagonal().real
    if p.min() < -_TOL or not -_TOL <= leaked <= 1 + _TOL:
        out.append("negative probability")
    if abs(p.sum() + leaked - 1.0) > _TOL:
        out.append(f"trace + leaked = {p.sum() + leaked!r}")
    if abs(rho[0, 1]) ** 2 > max(p[0], 0) * max(p[1], 0) + _TOL:
        out.append("coherence exceeds sqrt(p_up p_down)")
    return out


def _pulse(theta: float, phi: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -1j * s * np.exp(-1j * phi)],
                     [-1j * s * np.exp(1j * phi), c]])


def rotate(state: QubitState, theta: float, phi: float) -> QubitState:
    """Rotate the qubit by ``theta`` about the equatorial axis at angle ``phi``."""
    U = _pulse(theta, phi)
    return QubitState(U @ state.density @ U.conj().T, state.leaked)


@dataclass(frozen=True)
class QubitChannel:
    """What the analytic model needs from the beam.

    ``subgenerator`` is the 2x2 population block on (|up>, |down>), ``stark``
    the differential light shift up - down in rad/s.
    """

    subgenerator: np.ndarray
    gamma_dec: float
    stark: float

    @classmethod
    def off(cls) -> "QubitChannel":
        return cls(np.zeros((2, 2)), 0.0, 0.0)


def qubit_channel(laser: LaserParams | None) -> QubitChannel:
    if laser is None or laser.coupling_g == 0:
        return QubitChannel.off()
    M = qubit_subgenerator(build_rate_matrix(laser))
    return QubitChannel(M, 0.5 * float(-M[0, 0] - M[1, 1]), differential_stark(laser).differential)


def decohere_window(state: QubitState, laser, dt: float) -> QubitState:
    """Analytic effect of one beam window of length ``dt``.

    ``laser`` may be a LaserParams, a precomputed QubitChannel, or None (off).
    """
    if dt < 0:
        raise ValueError("dt must be non-negative")
    ch = laser if isinstance(laser, QubitChannel) else qubit_channel(laser)
    if dt == 0 or (ch.gamma_dec == 0 and ch.stark == 0 and not ch.subgenerator.any()):
        return state
    p = np.clip(expm(ch.subgenerator * dt) @ state.populations, 0.0, None)
    leaked = state.leaked + max(state.populations.sum() - p.sum(), 0.0)
    rho12 = state.coherence * math.exp(-ch.gamma_dec * dt) * np.exp(-1j * ch.stark * dt)
    # keep |rho12| <= sqrt(p1 p2) against round-off in the population step
    bound = math.sqrt(p[0] * p[1])
    if abs(rho12) > bound:
        rho12 *= bound / abs(rho12)
    rho = np.array([[p[0], rho12], [np.conj(rho12), p[1]]])
    return QubitState(rho, leaked)


def _final_up_probability(state: QubitState, phase: float) -> float:
    return float(rotate(state, math.pi / 2, phase).populations[0])


def run_sequence(seq: EchoSequence, laser=None, mode: str = "analytic") -> tuple:
    """Probability of |up> at readout for Ramsey phase 0 and pi."""
    if mode != "analytic":
        raise ValueError("run_sequence is analytic; use run_trajectories for Monte Carlo")
    ch = laser if isinstance(laser, QubitChannel) else qubit_channel(laser)
    state = QubitState.up()
    for ev in seq.events():
        if ev[0] == "pulse":
            state = rotate(state, ev[1], ev[2])
        else:
            state = decohere_window(state, ch, ev[1])
    return _final_up_probability(state, 0.0), _final_up_probability(state, math.pi)


def analytic_contrast(seq: EchoSequence, laser=None) -> float:
    p0, ppi = run_sequence(seq, laser)
    return seq.contrast_sign * (ppi - p0)


@dataclass(frozen=True)
class RamseyData:
    """Ramsey dataset: one row per total decohering time."""

    tau: np.ndarray
    phi0_mean_counts: np.ndarray
    phipi_mean_counts: np.ndarray
    contrast: np.ndarray
    stderr: np.ndarray

    def __post_init__(self):
        arrs = [np.asarray(getattr(self, k), dtype=float) for k in
                ("tau", "phi0_mean_counts", "phipi_mean_counts", "contrast", "stderr")]
        if len({a.shape for a in arrs}) != 1 or arrs[0].ndim != 1:
            raise ValueError("RamseyData columns must be equal-length 1-d arrays")
        for k, a in zip(("tau", "phi0_mean_counts", "phipi_mean_counts", "contrast", "stderr"), arrs):
            object.__setattr__(self, k, a)


def _mean(x) -> float:
    return math.fsum(x) / len(x)


def _contrast_from_counts(c0, cpi, sign, bright_mean, dark_mean):
    n = c0.size
    scale = bright_mean - dark_mean
    contrast = sign * (_mean(cpi) - _mean(c0)) / scale
    var = max(np.var(c0, ddof=1) if n > 1 else 0.0, dark_mean) + max(np.var(cpi, ddof=1) if n > 1 else 0.0, dark_mean)
    return contrast, math.sqrt(var / n) / scale


def simulate_ramsey_data(sequences, laser=None, repetitions: int = 400, seed=None, *,
                         bright_mean: float = BRIGHT_MEAN, dark_mean: float = DARK_MEAN) -> RamseyData:
    """Analytic readout probabilities turned into photon-count averages.

    Each sequence is run at both Ramsey phases with ``repetitions``
    detections; every sequence gets its own spawned random stream.
    """
    sequences = list(sequences)
    ch = laser if isinstance(laser, QubitChannel) else qubit_channel(laser)
    streams = np.random.SeedSequence(seed).spawn(len(sequences))
    rows = []
    for seq, ss in zip(sequences, streams):
        rng = np.random.default_rng(ss)
        p0, ppi = run_sequence(seq, ch)
        c0 = simulate_detection(min(max(p0, 0.0), 1.0), repetitions, rng, bright_mean=bright_mean, dark_mean=dark_mean)
        cpi = simulate_detection(min(max(ppi, 0.0), 1.0), repetitions, rng, bright_mean=bright_mean, dark_mean=dark_mean)
        contrast, err = _contrast_from_counts(c0, cpi, seq.contrast_sign, bright_mean, dark_mean)
        rows.append((seq.tau, _mean(c0), _mean(cpi), contrast, err))
    return RamseyData(*np.array(rows, dtype=float).reshape(-1, 5).T)


@dataclass(frozen=True)
class TrajectoryResult:
    """Monte Carlo Ramsey curve.

    ``contrast_curve`` rows are (tau, mean contrast, standard error) of the
    per-trajectory readout probabilities; ``counts[k, r, j]`` is the photon
    count of trajectory j at point k for Ramsey phase r (0 or pi), one
    detection per trajectory. ``leaked`` is the mean population outside the
    qubit pair before the final pulse.
    """

    contrast_curve: np.ndarray
    counts: np.ndarray
    seed: int | None
    leaked: np.ndarray = field(default=None)
    n_traj: int = 0

    def to_dataset(self, bright_mean: float = BRIGHT_MEAN, dark_mean: float = DARK_MEAN) -> RamseyData:
        m0 = np.array([_mean(c) for c in self.counts[:, 0]])
        mpi = np.array([_mean(c) for c in self.counts[:, 1]])
        return RamseyData(self.contrast_curve[:, 0], m0, mpi,
                          self.contrast_curve[:, 1], self.contrast_curve[:, 2])


class _TrajectoryModel:
    """Rates and jump bookkeeping for the unraveling."""

    def __init__(self, laser: LaserParams | None, rayleigh_dephasing: bool):
        if laser is None or laser.coupling_g == 0:
            self.G = np.zeros((8, 8))
            self.R = np.zeros((8, 8))
            self.stark = 0.0
            self.rayleigh_amp = np.zeros((3, 2))
        else:
            self.G = np.array(build_rate_matrix(laser).generator)
            self.R = rate_table(laser)
            self.stark = differential_stark(laser).differential
            S = scattering_amplitudes(laser)
            self.rayleigh_amp = np.stack([S[:, i, i] for i in _QUBIT_INDEX], axis=1)
        self.rayleigh = rayleigh_dephasing
        raman = self.R.copy()
        np.fill_diagonal(raman, 0.0)
        # Raman channel rates out of the two qubit states, shape (2, 8)
        self.raman_from_qubit = raman[list(_QUBIT_INDEX)]
        self.decay = self.raman_from_qubit.sum(axis=1)
        if rayleigh_dephasing:
            self.decay = self.decay + np.sum(np.abs(self.rayleigh_amp) ** 2, axis=0)
        self.leak_out = -np.diag(self.G).copy()
        self.energy = np.array([0.5 * self.stark, -0.5 * self.stark])


def _no_jump(psi, decay, energy, t):
    """Unnormalized amplitudes after no-jump evolution for times t (per row)."""
    return psi * np.exp(-(0.5 * decay[None, :] + 1j * energy[None, :]) * t[:, None])


def _norm2(psi, decay, t):
    return np.sum(np.abs(psi) ** 2 * np.exp(-decay[None, :] * t[:, None]), axis=1)


def _bisect_jump_time(psi, decay, r, hi, iterations=64):
    lo = np.zeros_like(hi)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        above = _norm2(psi, decay, mid) > r
        lo = np.where(above, mid, lo)
        hi = np.where(above, hi, mid)
    return 0.5 * (lo + hi)


def _choose(rng, weights):
    """Row-wise categorical draw from non-negative weights (n, k)."""
    cum = np.cumsum(weights, axis=1)
    u = rng.random(weights.shape[0]) * cum[:, -1]
    return np.minimum((cum <= u[:, None]).sum(axis=1), weights.shape[1] - 1)


def _window(model, rng, level, psi, dt, check):
    """Advance all trajectories through one beam window in place.

    ``level`` is -1 for trajectories in the qubit pair (state in ``psi``),
    otherwise the index of the ground sublevel they occupy.
    """
    remaining = np.full(level.size, float(dt))
    active = remaining > 0
    while np.any(active):
        q_idx = np.flatnonzero(active & (level < 0))
        if q_idx.size:
            p, rem = psi[q_idx], remaining[q_idx]
            r = rng.random(q_idx.size)
            survive = _norm2(p, model.decay, rem) > r
            done, jump = q_idx[survive], q_idx[~survive]
            if done.size:
                out = _no_jump(psi[done], model.decay, model.energy, remaining[done])
                psi[done] = out / np.linalg.norm(out, axis=1)[:, None]
                remaining[done] = 0.0
            if jump.size:
                t_jump = _bisect_jump_time(psi[jump], model.decay, r[~survive], remaining[jump])
                amp = _no_jump(psi[jump], model.decay, model.energy, t_jump)
                amp /= np.linalg.norm(amp, axis=1)[:, None]
                pop = np.abs(amp) ** 2
                # channels: Raman x -> f for the two sources, then Rayleigh per q
                weights = [(pop[:, [0]] * model.raman_from_qubit[0]), (pop[:, [1]] * model.raman_from_qubit[1])]
                if model.rayleigh:
                    weights.append(np.sum(np.abs(amp[:, None, :] * model.rayleigh_amp[None]) ** 2, axis=2))
                k = _choose(rng, np.concatenate(weights, axis=1))
                raman = k < 16
                dest = k % 8
                new_psi = amp.copy()
                to_qubit = raman & np.isin(dest, _QUBIT_INDEX)
                new_psi[to_qubit] = 0.0
                new_psi[to_qubit & (dest == _UP), 0] = 1.0
                new_psi[to_qubit & (dest == _DOWN), 1] = 1.0
                new_level = np.where(raman & ~to_qubit, dest, -1)
                if model.rayleigh and np.any(~raman):
                    ray = ~raman
                    qsel = k[ray] - 16
                    kicked = amp[ray] * model.rayleigh_amp[qsel]
                    new_psi[ray] = kicked / np.linalg.norm(kicked, axis=1)[:, None]
                psi[jump] = new_psi
                level[jump] = new_level
                remaining[jump] -= t_jump
        l_idx = np.flatnonzero(active & (level >= 0))
        if l_idx.size:
            lv = level[l_idx]
            rate = model.leak_out[lv]
            with np.errstate(divide="ignore"):
                wait = np.where(rate > 0, rng.exponential(1.0, l_idx.size) / np.where(rate > 0, rate, 1.0), np.inf)
            stay = wait >= remaining[l_idx]
            remaining[l_idx[stay]] = 0.0
            mv = l_idx[~stay]
            if mv.size:
                w = model.G[:, level[mv]].T.copy()
                w[np.arange(mv.size), level[mv]] = 0.0
                dest = _choose(rng, w)
                remaining[mv] -= wait[~stay]
                back = np.isin(dest, _QUBIT_INDEX)
                psi[mv[back]] = 0.0
                psi[mv[back & (dest == _UP)], 0] = 1.0
                psi[mv[back & (dest == _DOWN)], 1] = 1.0
                level[mv] = np.where(back, -1, dest)
        remaining = np.maximum(remaining, 0.0)
        active = remaining > 0
        if check:
            _check_trajectories(level, psi)


def _check_trajectories(level, psi):
    q = level < 0
    norms = np.linalg.norm(psi[q], axis=1)
    if not np.all(np.isfinite(psi)) or np.any(np.abs(norms - 1.0) > 1e-9):
        raise FloatingPointError("trajectory state lost normalization")
    if np.any((level >= 8) | (level == _UP) | (level == _DOWN)):
        raise FloatingPointError("trajectory occupies an invalid sublevel")


def _apply_pulse(level, psi, theta, phi):
    q = level < 0
    psi[q] = psi[q] @ _pulse(theta, phi).T


def _run_point(seq, model, n_traj, rng, check):
    level = np.full(n_traj, -1, dtype=int)
    psi = np.zeros((n_traj, 2), dtype=complex)
    psi[:, 0] = 1.0
    for ev in seq.events():
        if ev[0] == "pulse":
            _apply_pulse(level, psi, ev[1], ev[2])
        else:
            _window(model, rng, level, psi, ev[1], check)
        if check:
            _check_trajectories(level, psi)
    q = level < 0
    readout = []
    for phase in (0.0, math.pi):
        amp = psi @ _pulse(math.pi / 2, phase).T
        readout.append(np.where(q, np.abs(amp[:, 0]) ** 2, 0.0))
    return readout[0], readout[1], float(np.mean(~q))


def run_trajectories(sequences, laser=None, n_traj: int = 1000, seed=None, *,
                     rayleigh_dephasing: bool = False, check_physical: bool = False,
                     bright_mean: float = BRIGHT_MEAN, dark_mean: float = DARK_MEAN) -> TrajectoryResult:
    """Quantum-trajectory simulation of the sequence(s) over the 8 ground sublevels.

    ``sequences`` is one EchoSequence or a list (one curve point each).
    Raman events are drawn from the full rate table and collapse the qubit;
    Rayleigh events leave it untouched. ``rayleigh_dephasing=True`` instead
    treats elastic scattering as coherent jumps diag(S_q(up), S_q(down)),
    which dephase only through the difference of the two amplitudes.
    ``check_physical`` validates every trajectory after every step.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    if isinstance(sequences, EchoSequence):
        sequences = [sequences]
    model = _TrajectoryModel(laser, rayleigh_dephasing)
    streams = np.random.SeedSequence(seed).spawn(len(sequences))
    curve, counts, leaked = [], [], []
    for seq, ss in zip(sequences, streams):
        rng = np.random.default_rng(ss)
        p0, ppi, lk = _run_point(seq, model, n_traj, rng, check_physical)
        c = seq.contrast_sign * (ppi - p0)
        err = float(np.std(c, ddof=1) / math.sqrt(n_traj)) if n_traj > 1 else 0.0
        curve.append((seq.tau, _mean(c), err))
        leaked.append(lk)
        bright = rng.random((2, n_traj)) < np.stack([p0, ppi])
        counts.append(rng.poisson(np.where(bright, bright_mean, dark_mean)))
    return TrajectoryResult(np.array(curve, dtype=float), np.array(counts), seed,
                            np.array(leaked), n_traj)


def _exp_decay(t, amplitude, rate):
    return amplitude * np.exp(-rate * t)


class ExponentialDecayRegressor(RegressorMixin, BaseEstimator):
    """Fit A exp(-tau / tau_dec) to contrast data.

    ``sample_weight`` are inverse variances. ``sigma_floor`` bounds the
    standard errors from below when weights are derived from them, since a
    Monte Carlo point can have exactly zero spread.
    """

    def __init__(self, absolute_sigma=False, significance=2.0, max_nfev=2000):
        self.absolute_sigma = absolute_sigma
        self.significance = significance
        self.max_nfev = max_nfev

    def fit(self, X, y, sample_weight=None):
        t, y, w = check_series(X, y, sample_weight, min_samples=5)
        span = t[-1] - t[0]
        if span <= 0:
            raise ValueError("times must span a non-zero interval")
        good = y > 0
        if good.sum() >= 2:
            slope, icept = np.polyfit(t[good], np.log(y[good]), 1)
            x0 = (math.exp(icept), max(-slope, 1e-3 / span))
        else:
            x0 = (max(y[0], 1e-3), 1.0 / span)
        out = weighted_least_squares(_exp_decay, t, y, w, x0, max_nfev=self.max_nfev,
                                     absolute_sigma=self.absolute_sigma)
        self.amplitude_, self.rate_ = (float(v) for v in out.params)
        self.rate_std_ = float(np.sqrt(max(out.cov[1, 1], 0.0)))
        self.converged_ = bool(out.converged)
        self.n_iter_ = out.nfev
        self.residual_norm_ = out.residual_norm
        self.message_ = out.message
        self.degenerate_ = bool(self.rate_ * span < 1e-6 or not self.rate_ > self.significance * self.rate_std_)
        if self.converged_ and self.rate_ > 0:
            self.tau_dec_ = 1.0 / self.rate_
            self.tau_dec_std_ = self.rate_std_ / self.rate_ ** 2
        else:
            self.tau_dec_ = math.inf if self.converged_ else math.nan
            self.tau_dec_std_ = math.inf
        return self

    def predict(self, X):
        check_is_fitted(self, "rate_")
        return _exp_decay(check_times(X), self.amplitude_, self.rate_)

    def to_result(self) -> FitResult:
        check_is_fitted(self, "rate_")
        return FitResult(
            estimate=self.tau_dec_,
            std_error=self.tau_dec_std_,
            converged=self.converged_,
            iterations=self.n_iter_,
            residual_norm=self.residual_norm_,
            degenerate=self.degenerate_,
            params={"amplitude": self.amplitude_, "rate": self.rate_, "rate_std": self.rate_std_},
            message=self.message_,
        )


def fit_coherence_decay(samples, *, absolute_sigma: bool | None = None, sigma_floor: float = 0.0,
                        **kwargs) -> FitResult:
    """Fit tau_dec to a contrast curve.

    ``samples`` is a RamseyData, a TrajectoryResult, or rows of (tau, contrast)
    or (tau, contrast, stderr). Standard errors become weights; for Monte
    Carlo curves they are exact, so ``absolute_sigma`` defaults to True there.
    """
    if isinstance(samples, TrajectoryResult):
        t, y, err = samples.contrast_curve.T
        sigma_floor = max(sigma_floor, 1.0 / samples.n_traj)
        absolute_sigma = True if absolute_sigma is None else absolute_sigma
    elif isinstance(samples, RamseyData):
        t, y, err = samples.tau, samples.contrast, samples.stderr
    else:
        arr = np.asarray(samples, dtype=float)
        if arr.ndim != 2 or arr.shape[1] not in (2, 3):
            raise ValueError("samples must be rows of (tau, contrast) or (tau, contrast, stderr)")
        t, y = arr[:, 0], arr[:, 1]
        err = arr[:, 2] if arr.shape[1] == 3 else None
    w = None
    if err is not None:
        sigma = np.maximum(np.asarray(err, dtype=float), sigma_floor)
        if np.any(sigma <= 0):
            raise ValueError("standard errors must be positive (set sigma_floor)")
        w = 1.0 / sigma ** 2
    est = ExponentialDecayRegressor(absolute_sigma=bool(absolute_sigma), **kwargs)
    return est.fit(t, y, sample_weight=w).to_result()
