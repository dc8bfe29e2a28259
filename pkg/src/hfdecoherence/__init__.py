"""Hyperfine-qubit decoherence from off-resonant photon scattering in 9Be+."""
from .atomic_structure import DOWN, STRETCHED, UP, AtomConstants, GroundState, Polarization
from .scattering import LaserParams

__version__ = "0.1.0"

__all__ = ["AtomConstants", "GroundState", "Polarization", "LaserParams", "UP", "DOWN", "STRETCHED",
           "__version__"]
