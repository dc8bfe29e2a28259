"""Run configuration: TOML sections, strictly validated.

Frequencies in the file are ordinary (Hz); they are converted to angular
units here. Unknown sections or keys are errors.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .atomic_structure import TWO_PI, AtomConstants, Polarization
from .scattering import LaserParams

__all__ = ["ConfigError", "AtomSection", "LaserSection", "SequenceSection", "RelaxSection",
           "RamseySection", "McSection", "OutputSection", "RunConfig", "load_config", "parse_config"]

DEFAULT_DETUNING_HZ = 227.5e9
DEFAULT_TAU_DEC = 0.5e-3


class ConfigError(ValueError):
    """Invalid configuration."""


def _positive(name, value):
    if not (isinstance(value, (int, float)) and not isinstance(value, bool) and value > 0 and math.isfinite(value)):
        raise ConfigError(f"{name} must be a positive number, got {value!r}")


@dataclass(frozen=True)
class AtomSection:
    delta_f_hz: float = 197.2e9
    delta_hf_hz: float = 1.207e9
    gamma_hz: float = 19.4e6
    wavelength_m: float = 313e-9
    field_t: float = 0.01194
    hyperfine_a_hz: float = -625.008837048e6
    g_j: float = 2.00226206
    g_i_ratio: float = 2.134779853e-4

    def constants(self) -> AtomConstants:
        try:
            return AtomConstants(
                delta_f=TWO_PI * self.delta_f_hz, delta_hf=TWO_PI * self.delta_hf_hz,
                gamma=TWO_PI * self.gamma_hz, wavelength=self.wavelength_m, B=self.field_t,
                hyperfine_a=TWO_PI * self.hyperfine_a_hz, g_j=self.g_j, g_i_ratio=self.g_i_ratio,
            )
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[atom]: {exc}") from None


@dataclass(frozen=True)
class LaserSection:
    """Beam settings. Give at most one of ``coupling_g`` (rad/s),
    ``target_tau_dec_s`` or ``target_stark_hz``; the default calibrates to a
    0.5 ms coherence time at each detuning."""

    detunings_hz: tuple | None = None
    polarization: str = "sigma+"
    coupling_g: float | None = None
    target_tau_dec_s: float | None = None
    target_stark_hz: float | None = None

    def __post_init__(self):
        if self.detunings_hz is not None:
            if isinstance(self.detunings_hz, (str, bytes)) or not hasattr(self.detunings_hz, "__iter__"):
                raise ConfigError("[laser] detunings_hz must be a list of numbers")
            vals = tuple(float(x) for x in self.detunings_hz)
            if not vals:
                raise ConfigError("[laser] detunings_hz is empty")
            object.__setattr__(self, "detunings_hz", vals)
        given = [k for k in ("coupling_g", "target_tau_dec_s", "target_stark_hz") if getattr(self, k) is not None]
        if len(given) > 1:
            raise ConfigError(f"[laser] give at most one of {', '.join(given)}")
        for k in given:
            _positive(f"[laser] {k}", getattr(self, k))
        try:
            Polarization.named(self.polarization)
        except (KeyError, ValueError):
            raise ConfigError(f"[laser] unknown polarization {self.polarization!r}") from None


@dataclass(frozen=True)
class SequenceSection:
    """Echo sweep: fixed ``tau_echo_s`` and the listed pulse numbers. Without
    ``tau_echo_s`` the longest sequence lasts ``tau_max_factor`` model
    coherence times."""

    tau_echo_s: float | None = None
    n_pi: tuple = (2, 4, 6, 8, 10, 12, 14, 16, 18)
    pi_time_s: float = 5e-6
    tau_max_factor: float = 4.0

    def __post_init__(self):
        if self.tau_echo_s is not None:
            _positive("[sequence] tau_echo_s", self.tau_echo_s)
        _positive("[sequence] tau_max_factor", self.tau_max_factor)
        if self.pi_time_s < 0:
            raise ConfigError("[sequence] pi_time_s must be >= 0")
        n = tuple(self.n_pi)
        if len(n) < 5 or any(int(k) != k or not 2 <= k <= 18 for k in n):
            raise ConfigError("[sequence] n_pi needs at least 5 integers in [2, 18]")
        object.__setattr__(self, "n_pi", tuple(int(k) for k in n))


@dataclass(frozen=True)
class RelaxSection:
    """Relaxation scan; ``repetitions = 0`` gives exact, noiseless probabilities."""

    initial: str = "both"
    n_points: int = 30
    span: float = 3.0
    repetitions: int = 400
    fixed_shape: bool = False

    def __post_init__(self):
        if self.initial not in ("up", "down", "both"):
            raise ConfigError("[relax] initial must be 'up', 'down' or 'both'")
        if int(self.n_points) != self.n_points or self.n_points < 5:
            raise ConfigError("[relax] n_points must be an integer >= 5")
        _positive("[relax] span", self.span)
        if int(self.repetitions) != self.repetitions or self.repetitions < 0:
            raise ConfigError("[relax] repetitions must be a non-negative integer")


@dataclass(frozen=True)
class RamseySection:
    repetitions: int = 400
    control: bool = True

    def __post_init__(self):
        if int(self.repetitions) != self.repetitions or self.repetitions < 1:
            raise ConfigError("[ramsey] repetitions must be a positive integer")


@dataclass(frozen=True)
class McSection:
    n_traj: int = 2000
    seed: int = 2024
    rayleigh_dephasing: bool = False

    def __post_init__(self):
        if int(self.n_traj) != self.n_traj or self.n_traj < 1:
            raise ConfigError("[mc] n_traj must be a positive integer")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ConfigError("[mc] seed must be a non-negative integer")


@dataclass(frozen=True)
class OutputSection:
    dir: str = "out"


_SECTIONS = {"atom": AtomSection, "laser": LaserSection, "sequence": SequenceSection,
             "relax": RelaxSection, "ramsey": RamseySection, "mc": McSection, "output": OutputSection}


@dataclass(frozen=True)
class RunConfig:
    atom: AtomSection = AtomSection()
    laser: LaserSection = LaserSection()
    sequence: SequenceSection = SequenceSection()
    relax: RelaxSection = RelaxSection()
    ramsey: RamseySection = RamseySection()
    mc: McSection = McSection()
    output: OutputSection = OutputSection()

    def constants(self) -> AtomConstants:
        return self.atom.constants()

    def detunings_hz(self, default=(DEFAULT_DETUNING_HZ,)) -> tuple:
        return self.laser.detunings_hz if self.laser.detunings_hz is not None else tuple(default)

    def template(self) -> LaserParams:
        """Beam at the first detuning with unit coupling."""
        return LaserParams.from_hz(self.detunings_hz()[0], self.laser.polarization, 1.0, self.constants())

    def laser_at(self, detuning_hz: float) -> LaserParams:
        """The beam at ``detuning_hz`` with the configured or calibrated coupling."""
        from .scattering import calibrate_coupling

        laser = LaserParams.from_hz(detuning_hz, self.laser.polarization, 1.0, self.constants())
        if self.laser.coupling_g is not None:
            return laser.with_coupling(self.laser.coupling_g)
        if self.laser.target_stark_hz is not None:
            return calibrate_coupling(laser, target_stark=TWO_PI * self.laser.target_stark_hz)
        return calibrate_coupling(laser, target_tau_dec=self.laser.target_tau_dec_s or DEFAULT_TAU_DEC)

    def validate(self) -> "RunConfig":
        """Check every configured detuning against the resonance guard."""
        c = self.constants()
        for d in self.laser.detunings_hz or ():
            try:
                LaserParams.from_hz(d, self.laser.polarization, 1.0, c)
            except ValueError as exc:
                raise ConfigError(f"[laser] detuning {d!r} Hz rejected: {exc}") from None
        return self


def parse_config(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a table of sections")
    unknown = sorted(set(data) - set(_SECTIONS))
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(unknown)}")
    built = {}
    for name, cls in _SECTIONS.items():
        body = data.get(name, {})
        if not isinstance(body, dict):
            raise ConfigError(f"[{name}] must be a table")
        allowed = {f.name for f in fields(cls)}
        bad = sorted(set(body) - allowed)
        if bad:
            raise ConfigError(f"[{name}] unknown key(s): {', '.join(bad)}")
        try:
            built[name] = cls(**body)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"[{name}]: {exc}") from None
    cfg = RunConfig(**built)
    cfg.constants()
    return cfg.validate()


def load_config(path=None) -> RunConfig:
    """Read a TOML file; ``None`` gives the defaults. Raises OSError for unreadable files."""
    if path is None:
        return parse_config({})
    with Path(path).open("rb") as fh:
        try:
            data = tomllib.load(fh)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from None
    return parse_config(data)
