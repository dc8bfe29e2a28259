"""CSV datasets.

Floats are written with ``repr`` so that reading a file back gives the
identical binary values. Headers are fixed per dataset kind and checked on
read.
"""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .experiment import RamseyData
from .relaxation import RelaxationData
from .scattering import ScanRow

__all__ = [
    "DatasetError",
    "RATES_HEADER",
    "BUDGET_HEADER",
    "STARK_HEADER",
    "RELAX_HEADER",
    "RAMSEY_HEADER",
    "write_table",
    "read_table",
    "write_rates",
    "read_rates",
    "write_relaxation",
    "read_relaxation",
    "write_ramsey",
    "read_ramsey",
    "detect_kind",
]

RATES_HEADER = ("delta_hz", "total_over_stark", "raman_over_stark", "raman_up_over_stark",
                "raman_down_over_stark")
BUDGET_HEADER = ("delta_hz", "total_over_raman")
STARK_HEADER = ("delta_hz", "shift_up_rad_s", "shift_down_rad_s", "differential_rad_s", "gamma_dec_per_s")
RELAX_HEADER = ("t_seconds", "survival_probability", "weight")
RAMSEY_HEADER = ("tau_seconds", "phi0_mean_counts", "phipi_mean_counts", "contrast", "stderr")
_KINDS = {RATES_HEADER: "rates", BUDGET_HEADER: "budget", STARK_HEADER: "stark",
          RELAX_HEADER: "relax", RAMSEY_HEADER: "ramsey"}


class DatasetError(ValueError):
    """Malformed or mismatched dataset file."""


def _fmt(x) -> str:
    return repr(float(x))


def write_table(path, header, columns) -> Path:
    path = Path(path)
    cols = [np.asarray(c, dtype=float) for c in columns]
    if len(cols) != len(header) or len({c.shape for c in cols}) > 1:
        raise DatasetError("columns do not match the header")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([_fmt(x) for x in row])
    return path


def read_table(path, header) -> list:
    """Columns of a CSV with exactly ``header``, as float arrays."""
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != tuple(header):
        raise DatasetError(f"{path}: expected header {','.join(header)}")
    try:
        body = [[float(x) for x in r] for r in rows[1:] if r]
    except ValueError as exc:
        raise DatasetError(f"{path}: {exc}") from None
    if any(len(r) != len(header) for r in body):
        raise DatasetError(f"{path}: ragged rows")
    data = np.array(body, dtype=float).reshape(-1, len(header))
    return [data[:, k].copy() for k in range(len(header))]


def detect_kind(path) -> str:
    with Path(path).open(newline="") as fh:
        head = tuple(next(csv.reader(fh), ()))
    try:
        return _KINDS[head]
    except KeyError:
        raise DatasetError(f"{path}: unrecognized header {','.join(head)}") from None


def write_rates(path, rows) -> Path:
    fields = [[getattr(r, k) for r in rows] for k in RATES_HEADER]
    return write_table(path, RATES_HEADER, fields)


def read_rates(path) -> list:
    """Rows of a rates table; the photon-budget column is not part of it and reads as NaN."""
    cols = read_table(path, RATES_HEADER)
    return [ScanRow(*(float(c[k]) for c in cols), total_over_raman=math.nan) for k in range(cols[0].size)]


def write_relaxation(path, data: RelaxationData) -> Path:
    return write_table(path, RELAX_HEADER, (data.t, data.survival_probability, data.weight))


def read_relaxation(path) -> RelaxationData:
    return RelaxationData(*read_table(path, RELAX_HEADER))


def write_ramsey(path, data: RamseyData) -> Path:
    return write_table(path, RAMSEY_HEADER, (data.tau, data.phi0_mean_counts, data.phipi_mean_counts,
                                             data.contrast, data.stderr))


def read_ramsey(path) -> RamseyData:
    return RamseyData(*read_table(path, RAMSEY_HEADER))
