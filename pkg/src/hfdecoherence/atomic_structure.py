"""Level scheme of 9Be+ and electric-dipole matrix elements.

Ground manifold: 2S1/2 with I = 3/2, giving F = 1 (3 sublevels) and
F = 2 (5 sublevels). Excited manifold: 2P1/2 (F' = 1, 2) and 2P3/2
(F' = 0..3), 24 sublevels in total. The excited hyperfine splitting is
neglected, so only J distinguishes excited energies.

Dipole elements are computed with the Wigner-Eckart theorem, reducing
first from the hyperfine to the fine-structure basis and then from J to
L. Both J' manifolds inherit their reduced element from the single
<L'=1||d||L=0>, which is what gives every excited sublevel the same
total decay strength. All elements are expressed in units of

    mu = |<2P3/2, F=3, mF=3| d.sigma_+ |2S1/2, F=2, mF=2>|

so that the stretched element is exactly 1 and the decay strength of
every excited sublevel summed over final states and polarizations is 1.

The qubit lives at B = 0.01194 T where the ground hyperfine states are
partially decoupled (Breit-Rabi). ``dressed_ground_states`` gives the
field eigenstates expanded in the zero-field |F, mF> basis; they keep the
low-field labels by adiabatic continuity. Setting ``B = 0`` returns the
identity, i.e. pure |F, mF> states.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np
from scipy import constants as sc

from .angmom import HalfInt, clebsch_gordan, wigner3j, wigner6j

__all__ = [
    "AtomConstants",
    "GroundState",
    "ExcitedState",
    "Polarization",
    "UP",
    "DOWN",
    "STRETCHED",
    "NUCLEAR_SPIN",
    "enumerate_ground",
    "enumerate_excited",
    "ground_index",
    "dipole_element",
    "dipole_tensor",
    "dressed_ground_states",
    "dressed_dipole_tensor",
    "qubit_splitting",
    "mu_scale",
]

TWO_PI = 2.0 * math.pi
NUCLEAR_SPIN = HalfInt(3)
_S = HalfInt(1)  # electron spin, also J of the ground state
_L_GROUND, _L_EXCITED = 0, 1


@dataclass(frozen=True)
class AtomConstants:
    """Physical constants of the ion. Frequencies are angular (rad/s).

    ``hyperfine_a``, ``g_j`` and ``g_i_ratio`` (g_I'/g_J, nuclear term of
    the ground-state Zeeman Hamiltonian) only enter through the field
    dressing of the ground states.
    """

    delta_f: float = TWO_PI * 197.2e9
    delta_hf: float = TWO_PI * 1.207e9
    gamma: float = TWO_PI * 19.4e6
    wavelength: float = 313e-9
    B: float = 0.01194
    nuclear_I: HalfInt = NUCLEAR_SPIN
    hyperfine_a: float = TWO_PI * -625.008837048e6
    g_j: float = 2.00226206
    g_i_ratio: float = 2.134779853e-4

    def __post_init__(self):
        for name in ("delta_f", "delta_hf", "gamma", "wavelength"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.B < 0:
            raise ValueError(f"B must be non-negative, got {self.B}")
        if not (self.delta_f > self.delta_hf > self.gamma):
            raise ValueError("expected delta_f >> delta_hf >> gamma")
        if HalfInt.of(self.nuclear_I) != NUCLEAR_SPIN:
            raise ValueError("only the I = 3/2 level scheme is implemented")


@dataclass(frozen=True, order=True)
class GroundState:
    F: HalfInt
    mF: HalfInt

    def __init__(self, F, mF):
        object.__setattr__(self, "F", HalfInt.of(F))
        object.__setattr__(self, "mF", HalfInt.of(mF))
        if self.F.twice_value not in (2, 4):
            raise ValueError(f"ground-state F must be 1 or 2, got {self.F.value}")
        if abs(self.mF.twice_value) > self.F.twice_value or not self.mF.is_integer:
            raise ValueError(f"invalid mF={self.mF.value} for F={self.F.value}")

    def __repr__(self):
        return f"GroundState(F={self.F.value:g}, mF={self.mF.value:+g})"


@dataclass(frozen=True, order=True)
class ExcitedState:
    J: HalfInt
    F: HalfInt
    mF: HalfInt

    def __init__(self, J, F, mF):
        object.__setattr__(self, "J", HalfInt.of(J))
        object.__setattr__(self, "F", HalfInt.of(F))
        object.__setattr__(self, "mF", HalfInt.of(mF))
        tj, tf, tm, ti = self.J.twice_value, self.F.twice_value, self.mF.twice_value, NUCLEAR_SPIN.twice_value
        if tj not in (1, 3):
            raise ValueError(f"excited-state J must be 1/2 or 3/2, got {self.J.value}")
        if not (abs(tj - ti) <= tf <= tj + ti) or tf % 2:
            raise ValueError(f"F={self.F.value} not allowed for J={self.J.value}")
        if abs(tm) > tf or tm % 2:
            raise ValueError(f"invalid mF={self.mF.value} for F={self.F.value}")

    def __repr__(self):
        return f"ExcitedState(J={self.J.twice_value}/2, F={self.F.value:g}, mF={self.mF.value:+g})"


UP = GroundState(1, 1)
DOWN = GroundState(2, 0)
STRETCHED = GroundState(2, 2)


@dataclass(frozen=True)
class Polarization:
    """Laser polarization as weights on the spherical basis (sigma-, pi, sigma+)."""

    components: tuple = field(default=(0.0, 0.0, 1.0))

    def __post_init__(self):
        comps = tuple(complex(c) for c in self.components)
        if len(comps) != 3:
            raise ValueError("polarization needs exactly three spherical components")
        norm = sum(abs(c) ** 2 for c in comps)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"polarization must be normalized, |c|^2 sums to {norm}")
        object.__setattr__(self, "components", comps)

    @classmethod
    def from_vector(cls, vec) -> "Polarization":
        vec = np.asarray(vec, dtype=complex)
        norm = np.linalg.norm(vec)
        if vec.shape != (3,) or norm == 0:
            raise ValueError("need a nonzero 3-vector (sigma-, pi, sigma+)")
        return cls(tuple(vec / norm))

    @classmethod
    def sigma_plus(cls) -> "Polarization":
        return cls((0.0, 0.0, 1.0))

    @classmethod
    def sigma_minus(cls) -> "Polarization":
        return cls((1.0, 0.0, 0.0))

    @classmethod
    def pi(cls) -> "Polarization":
        return cls((0.0, 1.0, 0.0))

    @classmethod
    def named(cls, name: str) -> "Polarization":
        try:
            return {"sigma+": cls.sigma_plus, "sigma-": cls.sigma_minus, "pi": cls.pi}[name]()
        except KeyError:
            raise ValueError(f"unknown polarization {name!r}; use sigma+, sigma- or pi") from None

    def component(self, q: int) -> complex:
        return self.components[q + 1]

    @property
    def is_pure(self) -> bool:
        return sum(1 for c in self.components if c != 0) == 1

    def as_array(self) -> np.ndarray:
        return np.array(self.components, dtype=complex)


def enumerate_ground() -> list[GroundState]:
    """The 8 ground sublevels, F ascending then mF ascending."""
    return [GroundState(F, m) for F in (1, 2) for m in range(-F, F + 1)]


def enumerate_excited() -> list[ExcitedState]:
    """The 24 excited sublevels: 2P1/2 first, then 2P3/2; F', mF' ascending."""
    states = []
    for tj in (1, 3):
        for tf in range(abs(tj - 3), tj + 3 + 1, 2):
            for tm in range(-tf, tf + 1, 2):
                states.append(ExcitedState(HalfInt(tj), HalfInt(tf), HalfInt(tm)))
    return states


_GROUND = tuple(enumerate_ground())
_EXCITED = tuple(enumerate_excited())
_GROUND_INDEX = {s: k for k, s in enumerate(_GROUND)}


def ground_index(state: GroundState) -> int:
    return _GROUND_INDEX[state]


def _reduced_fine(J_exc: HalfInt) -> float:
    # <L'=1 S J'||d||L=0 S J=1/2> in units of <L'=1||d||L=0>
    tj = J_exc.twice_value
    phase = -1 if ((2 * _L_EXCITED + _S.twice_value + _S.twice_value + 2) // 2) % 2 else 1
    return phase * math.sqrt((tj + 1) * (_S.twice_value + 1)) * wigner6j(
        _L_EXCITED, J_exc, _S, _S, _L_GROUND, 1
    )


def _reduced_hyperfine(J_exc: HalfInt, F_exc: HalfInt, F_gnd: HalfInt) -> float:
    # <J' I F'||d||J I F> from <J'||d||J>
    ti = NUCLEAR_SPIN.twice_value
    exponent = (J_exc.twice_value + ti + F_gnd.twice_value + 2) // 2
    phase = -1 if exponent % 2 else 1
    return (phase * math.sqrt((F_exc.twice_value + 1) * (F_gnd.twice_value + 1))
            * wigner6j(J_exc, F_exc, NUCLEAR_SPIN, F_gnd, _S, 1) * _reduced_fine(J_exc))


def _raw_element(f: GroundState, e: ExcitedState, q: int) -> float:
    tm_e, tm_g, tq = e.mF.twice_value, f.mF.twice_value, 2 * q
    if tm_e != tm_g + tq:
        return 0.0
    three_j = wigner3j(e.F, 1, f.F, -e.mF, q, f.mF)
    if three_j == 0.0:
        return 0.0
    phase = -1 if ((e.F.twice_value - tm_e) // 2) % 2 else 1
    return phase * three_j * _reduced_hyperfine(e.J, e.F, f.F)


_STRETCHED_RAW = _raw_element(STRETCHED, ExcitedState(HalfInt(3), 3, 3), +1)


def dipole_element(f: GroundState, e: ExcitedState, q: int) -> float:
    """<e| d.sigma_q |f> in units of mu (real, Condon-Shortley phases).

    Nonzero only if mF(e) = mF(f) + q. Both arguments are zero-field
    |F, mF> states; see ``dressed_dipole_tensor`` for the field-dressed
    ground basis.
    """
    if q not in (-1, 0, 1):
        raise ValueError(f"spherical index must be -1, 0 or +1, got {q}")
    raw = _raw_element(f, e, q)
    return 0.0 if raw == 0.0 else raw / _STRETCHED_RAW


@lru_cache(maxsize=1)
def _dipole_tensor() -> np.ndarray:
    out = np.zeros((3, len(_GROUND), len(_EXCITED)))
    for qi, q in enumerate((-1, 0, 1)):
        for a, g in enumerate(_GROUND):
            for b, e in enumerate(_EXCITED):
                out[qi, a, b] = dipole_element(g, e, q)
    out.setflags(write=False)
    return out


def dipole_tensor() -> np.ndarray:
    """All elements as an array D[q + 1, ground, excited] (read-only)."""
    return _dipole_tensor()


def _ground_zeeman_blocks(constants: AtomConstants):
    """Ground Hamiltonian (rad/s) in the |F, mF> basis, as one dense matrix."""
    n = len(_GROUND)
    H = np.zeros((n, n))
    A, ti = constants.hyperfine_a, NUCLEAR_SPIN.twice_value
    omega_b = sc.physical_constants["Bohr magneton"][0] * constants.B / sc.hbar
    g_j, g_i = constants.g_j, constants.g_i_ratio * constants.g_j
    for a, s in enumerate(_GROUND):
        F = s.F.value
        I = ti / 2
        H[a, a] += 0.5 * A * (F * (F + 1) - I * (I + 1) - 0.75)
    for a, s in enumerate(_GROUND):
        for b, t in enumerate(_GROUND):
            if s.mF != t.mF:
                continue
            tm = s.mF.twice_value
            jz = 0.0
            for tmj in (-1, 1):
                tmi = tm - tmj
                if abs(tmi) > ti:
                    continue
                jz += (tmj / 2) * clebsch_gordan(_S, HalfInt(tmj), NUCLEAR_SPIN, HalfInt(tmi), s.F, s.mF) \
                    * clebsch_gordan(_S, HalfInt(tmj), NUCLEAR_SPIN, HalfInt(tmi), t.F, t.mF)
            iz = (s.mF.value if a == b else 0.0) - jz
            H[a, b] += omega_b * (g_j * jz + g_i * iz)
    return H


@lru_cache(maxsize=32)
def _dressed(constants: AtomConstants):
    H = _ground_zeeman_blocks(constants)
    n = len(_GROUND)
    U = np.zeros((n, n))
    energies = np.zeros(n)
    zero_field = np.diag(_ground_zeeman_blocks(replace(constants, B=0.0)))
    for tm in sorted({s.mF.twice_value for s in _GROUND}):
        idx = [k for k, s in enumerate(_GROUND) if s.mF.twice_value == tm]
        w, v = np.linalg.eigh(H[np.ix_(idx, idx)])
        # same-M levels never cross: match eigenvalue rank to zero-field rank
        by_zero_field = [idx[k] for k in np.argsort(zero_field[idx], kind="stable")]
        for rank, label in enumerate(by_zero_field):
            vec = v[:, rank]
            own = idx.index(label)
            if vec[own] < 0:
                vec = -vec
            U[idx, label] = vec
            energies[label] = w[rank]
    U.setflags(write=False)
    energies.setflags(write=False)
    return U, energies


def dressed_ground_states(constants: AtomConstants | None = None):
    """Field eigenstates of the ground manifold.

    Returns ``(U, energies)``: column k of ``U`` is the eigenstate that
    connects adiabatically to ``enumerate_ground()[k]`` as B -> 0,
    expanded in the zero-field |F, mF> basis; ``energies`` are in rad/s.
    """
    return _dressed(constants or AtomConstants())


def qubit_splitting(constants: AtomConstants | None = None) -> float:
    """E(|up>) - E(|down>) of the field-dressed states, rad/s."""
    _, E = dressed_ground_states(constants)
    return float(E[ground_index(UP)] - E[ground_index(DOWN)])


@lru_cache(maxsize=32)
def _dressed_tensor(constants: AtomConstants) -> np.ndarray:
    U, _ = _dressed(constants)
    out = np.einsum("ga,qgb->qab", U, _dipole_tensor())
    out.setflags(write=False)
    return out


def dressed_dipole_tensor(constants: AtomConstants | None = None) -> np.ndarray:
    """D[q + 1, ground, excited] with ground states replaced by field eigenstates."""
    return _dressed_tensor(constants or AtomConstants())


def mu_scale(constants: AtomConstants | None = None) -> float:
    """Stretched-transition dipole moment mu in C m.

    The stretched excited state decays only to |s> by sigma+ emission, so
    its decay rate fixes mu through

        gamma = omega**3 * mu**2 / (3 pi eps0 hbar c**3),  omega = 2 pi c / wavelength
    """
    constants = constants or AtomConstants()
    omega = TWO_PI * sc.c / constants.wavelength
    return math.sqrt(3 * math.pi * sc.epsilon_0 * sc.hbar * sc.c ** 3 * constants.gamma / omega ** 3)
