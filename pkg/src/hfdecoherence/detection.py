"""State-dependent fluorescence detection.

A bright ion (population in the measured state, shelved to |s>) yields
Poisson(bright_mean) photons in the detection window, a dark ion
Poisson(dark_mean).
"""
from __future__ import annotations

import numpy as np

from ._validation import check_probability

__all__ = ["BRIGHT_MEAN", "DARK_MEAN", "simulate_detection", "counts_to_probability",
           "probability_and_weight"]

BRIGHT_MEAN = 12.0
DARK_MEAN = 1.0


def simulate_detection(p_signal, repetitions: int, seed=None, *,
                       bright_mean: float = BRIGHT_MEAN, dark_mean: float = DARK_MEAN) -> np.ndarray:
    """Photon counts from ``repetitions`` projective measurements.

    ``seed`` may be an int, a SeedSequence or a ``numpy.random.Generator``.
    """
    p = check_probability(p_signal, "p_signal")
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    bright = rng.random(repetitions) < p
    lam = np.where(bright, bright_mean, dark_mean)
    return rng.poisson(lam)


def counts_to_probability(mean_counts, bright_mean: float = BRIGHT_MEAN,
                          dark_mean: float = DARK_MEAN):
    """Invert the mixture mean: p = (mean - dark) / (bright - dark)."""
    return (np.asarray(mean_counts, dtype=float) - dark_mean) / (bright_mean - dark_mean)


def probability_and_weight(counts, bright_mean: float = BRIGHT_MEAN, dark_mean: float = DARK_MEAN):
    """Estimated probability and its inverse-variance weight from one count sample."""
    counts = np.asarray(counts, dtype=float)
    n = counts.size
    p = float(counts_to_probability(counts.mean(), bright_mean, dark_mean))
    # never trust a zero sample variance; dark-count shot noise is the floor
    var = max(counts.var(ddof=1) if n > 1 else 0.0, dark_mean) / n
    return p, (bright_mean - dark_mean) ** 2 / var
