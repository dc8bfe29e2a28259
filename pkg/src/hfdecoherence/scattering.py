"""Off-resonant photon scattering rates and light shifts.

Rates follow the Kramers-Heisenberg form with the two fine-structure
denominators of the 2P manifold::

    Gamma_{i,f} = g**2 * gamma * |a12 / D_i + a32 / (D_i - delta_f)|**2

where ``D_i`` is the laser detuning from the |down> -> 2P1/2 line,
shifted by +delta_hf when ``i`` belongs to F = 1 (the F = 1 manifold sits
delta_hf above F = 2). ``a12``/``a32`` are coherent sums of dipole
products over all excited sublevels of one J manifold, in units of mu**2.

For a polarization that mixes spherical components, scattered photons of
different polarization q are distinguishable, so the rate is summed
incoherently over q::

    Gamma_{i,f} = g**2 gamma sum_q |A12_q / D_i + A32_q / (D_i - delta_f)|**2

which reduces to the expression above for pure sigma-, pi or sigma+ light,
where only one q contributes.

Frequencies are angular (rad/s) everywhere; helpers that take or return
Hz say so in their name.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import constants as sc

from .atomic_structure import (
    DOWN,
    TWO_PI,
    UP,
    AtomConstants,
    GroundState,
    Polarization,
    dressed_dipole_tensor,
    enumerate_excited,
    enumerate_ground,
    ground_index,
    mu_scale,
)

__all__ = [
    "NearResonanceError",
    "LaserParams",
    "AmplitudePair",
    "RateSet",
    "StarkShift",
    "ScanRow",
    "coupling_from_intensity",
    "effective_amplitude",
    "channel_rate",
    "scattering_amplitudes",
    "rate_table",
    "rate_set",
    "raman_out_rates",
    "decoherence_rate",
    "differential_stark",
    "ratio_scan",
    "stark_ratio_asymptote",
    "calibrate_coupling",
    "RESONANCE_GUARD",
]

RESONANCE_GUARD = 10.0  # minimum |detuning| in units of gamma

_GROUND = enumerate_ground()
_J_OF_EXCITED = np.array([e.J.twice_value for e in enumerate_excited()])
_MASK_HALF = _J_OF_EXCITED == 1
_MASK_THREE_HALF = _J_OF_EXCITED == 3
_IS_F1 = np.array([s.F.twice_value == 2 for s in _GROUND])


class NearResonanceError(ValueError):
    """Detuning too close to an optical resonance for the off-resonant model."""


def _state_detunings(detuning: float, constants: AtomConstants) -> np.ndarray:
    return detuning + np.where(_IS_F1, constants.delta_hf, 0.0)


@dataclass(frozen=True)
class LaserParams:
    """The decohering beam.

    ``detuning`` is measured from the |down> -> 2P1/2 transition (rad/s,
    signed); ``coupling_g`` is g = E mu / (2 hbar) in rad/s.
    """

    detuning: float
    polarization: Polarization = field(default_factory=Polarization.sigma_plus)
    coupling_g: float = 1.0
    constants: AtomConstants = field(default_factory=AtomConstants)

    def __post_init__(self):
        if not math.isfinite(self.detuning):
            raise ValueError(f"detuning must be finite, got {self.detuning}")
        if not (self.coupling_g >= 0 and math.isfinite(self.coupling_g)):
            raise ValueError(f"coupling_g must be finite and >= 0, got {self.coupling_g}")
        c = self.constants
        guard = RESONANCE_GUARD * c.gamma
        for d in (self.detuning, self.detuning + c.delta_hf):
            if abs(d) < guard or abs(d - c.delta_f) < guard:
                raise NearResonanceError(
                    f"detuning {self.detuning / TWO_PI / 1e9:.6g} GHz is within "
                    f"{RESONANCE_GUARD:g} linewidths of a 2P resonance"
                )

    @classmethod
    def from_hz(cls, detuning_hz: float, polarization: Polarization | str = "sigma+",
                coupling_g: float = 1.0, constants: AtomConstants | None = None) -> "LaserParams":
        if isinstance(polarization, str):
            polarization = Polarization.named(polarization)
        return cls(TWO_PI * detuning_hz, polarization, coupling_g, constants or AtomConstants())

    @property
    def detuning_hz(self) -> float:
        return self.detuning / TWO_PI

    def with_coupling(self, coupling_g: float) -> "LaserParams":
        return replace(self, coupling_g=coupling_g)

    def with_detuning(self, detuning: float) -> "LaserParams":
        return replace(self, detuning=detuning)


def coupling_from_intensity(intensity: float, constants: AtomConstants | None = None) -> float:
    """g = E mu / (2 hbar) with E = sqrt(2 I / (c eps0)); intensity in W/m^2."""
    if intensity < 0:
        raise ValueError("intensity must be non-negative")
    field_amplitude = math.sqrt(2 * intensity / (sc.c * sc.epsilon_0))
    return field_amplitude * mu_scale(constants) / (2 * sc.hbar)


@dataclass(frozen=True)
class AmplitudePair:
    a_half: complex | float
    a_three_half: complex | float


@dataclass(frozen=True)
class RateSet:
    initial: GroundState
    channels: dict
    raman: float
    rayleigh: float
    total: float


@dataclass(frozen=True)
class StarkShift:
    shift_up: float
    shift_down: float
    differential: float


def _excitation(polarization: Polarization, constants: AtomConstants) -> np.ndarray:
    # X[i, e] = <e| d.eps |i>
    D = dressed_dipole_tensor(constants)
    return np.einsum("k,kie->ie", polarization.as_array(), D)


def _channel_amplitudes(polarization: Polarization, constants: AtomConstants):
    """A_J[q, i, f] = sum_{e in J} <f|d_q|e>^* <e|d.eps|i> for both J."""
    D = dressed_dipole_tensor(constants)
    X = _excitation(polarization, constants)
    A_half = np.einsum("qfe,ie->qif", D[:, :, _MASK_HALF], X[:, _MASK_HALF])
    A_three = np.einsum("qfe,ie->qif", D[:, :, _MASK_THREE_HALF], X[:, _MASK_THREE_HALF])
    return A_half, A_three


def effective_amplitude(i: GroundState, f: GroundState,
                        polarization: Polarization | None = None,
                        constants: AtomConstants | None = None) -> AmplitudePair:
    """Scattering amplitudes (a^(1/2), a^(3/2)) for the channel i -> f.

    Summed over emitted polarization q as well as over the excited
    sublevels of each J manifold. Real for pure polarizations.
    """
    polarization = polarization or Polarization.sigma_plus()
    constants = constants or AtomConstants()
    A_half, A_three = _channel_amplitudes(polarization, constants)
    a, b = ground_index(i), ground_index(f)
    pair = [A_half[:, a, b].sum(), A_three[:, a, b].sum()]
    if polarization.is_pure or all(abs(x.imag) == 0 for x in pair):
        pair = [float(x.real) for x in pair]
    return AmplitudePair(*pair)


def scattering_amplitudes(laser: LaserParams) -> np.ndarray:
    """Rate-scaled amplitudes S[q, i, f] (units sqrt(1/s)) per emitted polarization q.

    ``rate_table`` is sum_q |S|^2. The diagonal entries are the Rayleigh
    amplitudes, which add coherently across ground states for the same q.
    """
    c = laser.constants
    A_half, A_three = _channel_amplitudes(laser.polarization, c)
    D_i = _state_detunings(laser.detuning, c)[None, :, None]
    amp = A_half / D_i + A_three / (D_i - c.delta_f)
    return laser.coupling_g * math.sqrt(c.gamma) * amp


def rate_table(laser: LaserParams) -> np.ndarray:
    """All channel rates as an 8x8 array R[i, f] in 1/s (canonical ground order)."""
    return np.sum(np.abs(scattering_amplitudes(laser)) ** 2, axis=0)


def channel_rate(i: GroundState, f: GroundState, laser: LaserParams) -> float:
    """Scattering rate (1/s) of events that take the ion from i to f."""
    return float(rate_table(laser)[ground_index(i), ground_index(f)])


def rate_set(i: GroundState, laser: LaserParams) -> RateSet:
    row = rate_table(laser)[ground_index(i)]
    k = ground_index(i)
    rayleigh = float(row[k])
    raman = math.fsum(float(r) for j, r in enumerate(row) if j != k)
    channels = {f: float(r) for f, r in zip(_GROUND, row)}
    return RateSet(initial=i, channels=channels, raman=raman, rayleigh=rayleigh,
                   total=raman + rayleigh)


def raman_out_rates(laser: LaserParams) -> np.ndarray:
    """Total Raman rate out of every ground state, 1/s."""
    R = rate_table(laser)
    return R.sum(axis=1) - np.diag(R)


def decoherence_rate(laser: LaserParams) -> float:
    """Coherence decay rate of the qubit: mean Raman rate out of |up> and |down>."""
    out = raman_out_rates(laser)
    return 0.5 * (out[ground_index(UP)] + out[ground_index(DOWN)])


def _state_light_shifts(laser: LaserParams) -> np.ndarray:
    c = laser.constants
    X = _excitation(laser.polarization, c)
    strength = np.abs(X) ** 2
    D_i = _state_detunings(laser.detuning, c)
    return laser.coupling_g ** 2 * (strength[:, _MASK_HALF].sum(axis=1) / D_i
                                    + strength[:, _MASK_THREE_HALF].sum(axis=1) / (D_i - c.delta_f))


def differential_stark(laser: LaserParams) -> StarkShift:
    """Light shifts of |up> and |down> and their difference, rad/s.

    For pure polarizations the per-state sums over excited sublevels are
    exactly the Rayleigh amplitudes a^(J)_{i->i}, so

        differential = g**2 (a12_up/(D + dhf) + a32_up/(D + dhf - df)
                             - a12_dn/D - a32_dn/(D - df))
    """
    shifts = _state_light_shifts(laser)
    up, down = float(shifts[ground_index(UP)]), float(shifts[ground_index(DOWN)])
    return StarkShift(shift_up=up, shift_down=down, differential=up - down)


@dataclass(frozen=True)
class ScanRow:
    delta_hz: float
    total_over_stark: float
    raman_over_stark: float
    raman_up_over_stark: float
    raman_down_over_stark: float
    total_over_raman: float
    error: str = ""


def _scan_point(laser: LaserParams) -> ScanRow:
    R = rate_table(laser)
    u, d = ground_index(UP), ground_index(DOWN)
    total_up, total_down = R[u].sum(), R[d].sum()
    raman_up, raman_down = total_up - R[u, u], total_down - R[d, d]
    stark = abs(differential_stark(laser).differential)
    total = 0.5 * (total_up + total_down)
    raman = 0.5 * (raman_up + raman_down)
    return ScanRow(
        delta_hz=float(laser.detuning_hz),
        total_over_stark=float(total / stark),
        raman_over_stark=float(raman / stark),
        raman_up_over_stark=float(raman_up / stark),
        raman_down_over_stark=float(raman_down / stark),
        total_over_raman=float(total / raman) if raman > 0 else math.inf,
    )


def ratio_scan(detunings_hz, template: LaserParams | None = None) -> list[ScanRow]:
    """Rates normalized by the magnitude of the differential Stark shift.

    Ratios are photons per radian of differential Stark phase and do not
    depend on ``template.coupling_g``. Totals and Raman rates are the mean
    over |up> and |down>; the per-state Raman ratios are kept too. A point
    that fails validation comes back as a row of NaNs with ``error`` set.
    """
    template = template or LaserParams.from_hz(-331.8e9)
    rows = []
    for delta_hz in detunings_hz:
        try:
            laser = template.with_detuning(TWO_PI * float(delta_hz))
            rows.append(_scan_point(laser))
        except (NearResonanceError, ValueError, ZeroDivisionError) as exc:
            nan = math.nan
            rows.append(ScanRow(float(delta_hz), nan, nan, nan, nan, nan, error=str(exc)))
    return rows


def stark_ratio_asymptote(polarization: Polarization | None = None,
                          constants: AtomConstants | None = None) -> float:
    """Limit of Gamma_total / |Delta_St| as |detuning| -> infinity.

    Both numerator and denominator fall as 1/detuning**2; the ratio of the
    leading coefficients is evaluated in closed form. Divide by
    ``gamma / delta_hf`` to express it in those units.
    """
    polarization = polarization or Polarization.sigma_plus()
    c = constants or AtomConstants()
    A_half, A_three = _channel_amplitudes(polarization, c)
    u, d = ground_index(UP), ground_index(DOWN)
    # leading term of Gamma_total * detuning**2 / g**2
    total_coeff = c.gamma * 0.5 * sum(np.sum(np.abs(A_half[:, i] + A_three[:, i]) ** 2) for i in (u, d))
    X = _excitation(polarization, c)
    s = np.abs(X) ** 2
    half, three = s[:, _MASK_HALF].sum(axis=1), s[:, _MASK_THREE_HALF].sum(axis=1)
    offset = np.where(_IS_F1, c.delta_hf, 0.0)
    # 1/(D + x) = 1/D - x/D**2 + ...; collect the 1/D**2 term of shift_up - shift_down
    stark_coeff = -(half[u] * offset[u] + three[u] * (offset[u] - c.delta_f)) \
        + (half[d] * offset[d] + three[d] * (offset[d] - c.delta_f))
    return float(total_coeff / abs(stark_coeff))


def calibrate_coupling(laser: LaserParams, *, target_tau_dec: float | None = None,
                       target_stark: float | None = None) -> LaserParams:
    """Rescale g so the model hits a coherence time (s) or |Delta_St| (rad/s).

    Every rate and shift is proportional to g**2, so one evaluation at the
    current g fixes the answer.
    """
    if (target_tau_dec is None) == (target_stark is None):
        raise ValueError("give exactly one of target_tau_dec or target_stark")
    probe = laser.with_coupling(1.0)
    if target_tau_dec is not None:
        if target_tau_dec <= 0:
            raise ValueError("target_tau_dec must be positive")
        unit = decoherence_rate(probe)
        target = 1.0 / target_tau_dec
    else:
        if target_stark <= 0:
            raise ValueError("target_stark must be positive")
        unit = abs(differential_stark(probe).differential)
        target = target_stark
    if unit <= 0:
        raise ValueError("model quantity vanishes at this detuning; cannot calibrate")
    return laser.with_coupling(math.sqrt(target / unit))
