"""Command-line driver: rate scans, light shifts, relaxation and Ramsey runs, fits.

Exit status: 0 success, 2 configuration error, 3 file error, 4 numerical
failure, 5 fit did not converge.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import io
from .atomic_structure import DOWN, TWO_PI, UP
from .config import ConfigError, RunConfig, load_config
from .experiment import (analytic_contrast, echo_sweep, fit_coherence_decay, qubit_channel,
                         run_trajectories, simulate_ramsey_data)
from .relaxation import (build_rate_matrix, design_times, fit_relaxation, reduce_to_two_level,
                         simulate_relaxation)
from .scattering import NearResonanceError, differential_stark, ratio_scan, stark_ratio_asymptote

__all__ = ["main", "build_parser", "default_rates_grid"]

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC, EXIT_FIT = 0, 2, 3, 4, 5
PUBLISHED_COEFFICIENT = 0.9579


class FitFailure(RuntimeError):
    pass


def default_rates_grid(n_per_side: int = 41) -> np.ndarray:
    """Detunings (Hz) log-spaced over 50 GHz .. 100 THz on both sides of resonance."""
    mag = np.geomspace(50e9, 1e14, n_per_side)
    return np.concatenate([-mag[::-1], mag])


def _tag(delta_hz: float) -> str:
    return ("p" if delta_hz >= 0 else "m") + f"{abs(delta_hz) / 1e9:g}GHz"


def _write_json(path: Path, payload) -> Path:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return path


def _seed(cfg: RunConfig, args) -> int:
    return cfg.mc.seed if args.seed is None else args.seed


def cmd_rates(cfg: RunConfig, args, out: Path) -> dict:
    grid = cfg.detunings_hz(default=default_rates_grid())
    rows = ratio_scan(grid, cfg.template())
    io.write_rates(out / "rates.csv", rows)
    io.write_table(out / "rates_budget.csv", io.BUDGET_HEADER,
                   ([r.delta_hz for r in rows], [r.total_over_raman for r in rows]))
    c = cfg.constants()
    plateau = stark_ratio_asymptote(cfg.template().polarization, c)
    summary = {
        "plateau_total_over_stark": plateau,
        "plateau_coefficient": plateau * c.delta_hf / c.gamma,
        "published_coefficient": PUBLISHED_COEFFICIENT,
        "points": len(rows),
        "failed_points": {repr(r.delta_hz): r.error for r in rows if r.error},
    }
    _write_json(out / "rates_summary.json", summary)
    print(f"plateau Gamma_total/|Delta_St| = {plateau:.6g} = {summary['plateau_coefficient']:.5f} gamma/Delta_hf"
          f" (published {PUBLISHED_COEFFICIENT})")
    for r in rows:
        if r.error:
            print(f"skipped {r.delta_hz:g} Hz: {r.error}", file=sys.stderr)
    if len(grid) <= 5:
        for r in rows:
            print(f"{r.delta_hz / 1e9:g} GHz: Gamma_total/Gamma_Raman = {r.total_over_raman:.4g}")
    return summary


def cmd_stark(cfg: RunConfig, args, out: Path) -> dict:
    grid = cfg.detunings_hz()
    cols = [[], [], [], [], []]
    for d in grid:
        laser = cfg.laser_at(d)
        s = differential_stark(laser)
        g_dec = qubit_channel(laser).gamma_dec
        for col, v in zip(cols, (d, s.shift_up, s.shift_down, s.differential, g_dec)):
            col.append(v)
        print(f"{d / 1e9:g} GHz: Delta_St/2pi = {s.differential / TWO_PI:.6g} Hz, gamma_dec = {g_dec:.6g} /s")
    io.write_table(out / "stark.csv", io.STARK_HEADER, cols)
    return {"points": len(grid)}


def _relax_one(cfg, laser, initial, seed, out: Path, label: str) -> dict:
    m = build_rate_matrix(laser)
    model = reduce_to_two_level(m, initial)
    truth = model.raman_rate
    times = design_times(truth, cfg.relax.n_points, cfg.relax.span)
    reps = cfg.relax.repetitions or None
    data = simulate_relaxation(laser, times, initial, repetitions=reps, seed=seed)
    io.write_relaxation(out / f"relax_{label}.csv", data)
    shape = reduce_to_two_level(m, initial, partner="auto") if cfg.relax.fixed_shape else None
    fit = fit_relaxation(data, shape=shape)
    return {
        "gamma_raman_fit": fit.estimate, "gamma_raman_std": fit.std_error,
        "gamma_raman_model": truth, "relative_error": fit.estimate / truth - 1.0,
        "converged": fit.converged, "degenerate": fit.degenerate,
        "alpha": fit.params.get("alpha"), "beta": fit.params.get("beta"), "kappa": fit.params.get("kappa"),
    }


def cmd_relax(cfg: RunConfig, args, out: Path) -> dict:
    initials = {"up": [UP], "down": [DOWN], "both": [UP, DOWN]}[cfg.relax.initial]
    seed = _seed(cfg, args)
    report = {}
    grid = cfg.detunings_hz()
    for k, d in enumerate(grid):
        laser = cfg.laser_at(d)
        for j, init in enumerate(initials):
            label = f"{_tag(d)}_{'up' if init == UP else 'down'}"
            r = _relax_one(cfg, laser, init, [seed, k, j], out, label)
            report[label] = r
            print(f"{label}: Gamma_Raman fit {r['gamma_raman_fit']:.6g} +/- {r['gamma_raman_std']:.2g} /s,"
                  f" model {r['gamma_raman_model']:.6g} /s ({100 * r['relative_error']:+.2f}%)")
    _write_json(out / "relax_fit.json", report)
    if not all(r["converged"] for r in report.values()):
        raise FitFailure("relaxation fit did not converge")
    return report


def _sequences(cfg: RunConfig, laser):
    seq = cfg.sequence
    tau_echo = seq.tau_echo_s
    if tau_echo is None:
        tau_dec = 1.0 / qubit_channel(laser).gamma_dec
        tau_echo = seq.tau_max_factor * tau_dec / (2 * max(seq.n_pi))
    return echo_sweep(tau_echo, seq.n_pi, pi_time=seq.pi_time_s)


def cmd_ramsey(cfg: RunConfig, args, out: Path) -> dict:
    seed = _seed(cfg, args)
    report = {}
    for k, d in enumerate(cfg.detunings_hz()):
        laser = cfg.laser_at(d)
        ch = qubit_channel(laser)
        seqs = _sequences(cfg, laser)
        if args.mode == "mc":
            result = run_trajectories(seqs, laser, cfg.mc.n_traj, [seed, k],
                                      rayleigh_dephasing=cfg.mc.rayleigh_dephasing)
            data = result.to_dataset()
            fit = fit_coherence_decay(result)
        else:
            data = simulate_ramsey_data(seqs, ch, cfg.ramsey.repetitions, [seed, k])
            fit = fit_coherence_decay(data)
        io.write_ramsey(out / f"ramsey_{_tag(d)}.csv", data)
        stark = abs(ch.stark)
        raman = ch.gamma_dec  # mean Raman rate out of the two qubit states
        entry = {
            "tau_dec_fit": fit.estimate, "tau_dec_std": fit.std_error, "tau_dec_model": 1.0 / ch.gamma_dec,
            "converged": fit.converged, "degenerate": fit.degenerate,
            "inverse_tau_dec_over_stark": 1.0 / (fit.estimate * stark) if fit.estimate > 0 else math.nan,
            "raman_over_stark": raman / stark,
        }
        report[_tag(d)] = entry
        print(f"{_tag(d)} [{args.mode}]: tau_dec {1e3 * fit.estimate:.4g} ms (model {1e3 / ch.gamma_dec:.4g} ms),"
              f" 1/(tau_dec Delta_St) = {entry['inverse_tau_dec_over_stark']:.4g},"
              f" Gamma_Raman/Delta_St = {entry['raman_over_stark']:.4g}")
        if cfg.ramsey.control and k == 0:
            control = simulate_ramsey_data(seqs, None, cfg.ramsey.repetitions, [seed, k, 1])
            io.write_ramsey(out / "ramsey_control.csv", control)
            flat = [analytic_contrast(s, None) for s in seqs]
            report["control_min_contrast"] = min(flat)
    _write_json(out / "ramsey_fit.json", report)
    if not all(v["converged"] for v in report.values() if isinstance(v, dict)):
        raise FitFailure("coherence fit did not converge")
    return report


def cmd_fit(cfg: RunConfig, args, out: Path) -> dict:
    if not args.input:
        raise ConfigError("fit needs --input PATH")
    kind = io.detect_kind(args.input)
    if kind == "relax":
        fit = fit_relaxation(io.read_relaxation(args.input))
        what = "gamma_raman"
    elif kind == "ramsey":
        fit = fit_coherence_decay(io.read_ramsey(args.input))
        what = "tau_dec"
    else:
        raise io.DatasetError(f"cannot fit a {kind} table")
    report = {"kind": kind, what: fit.estimate, f"{what}_std": fit.std_error, "converged": fit.converged,
              "degenerate": fit.degenerate, "iterations": fit.iterations, "residual_norm": fit.residual_norm,
              "params": fit.params}
    print(json.dumps(report, indent=2, sort_keys=True))
    if not fit.converged:
        raise FitFailure(fit.message or "fit did not converge")
    return report


COMMANDS = {"rates": cmd_rates, "stark": cmd_stark, "relax": cmd_relax, "ramsey": cmd_ramsey, "fit": cmd_fit}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hfdecoherence", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", type=Path, help="TOML run configuration")
    p.add_argument("--seed", type=int, help="override [mc] seed")
    p.add_argument("--out", type=Path, help="output directory (overrides [output] dir)")
    p.add_argument("--mode", choices=("analytic", "mc"), default="analytic")
    p.add_argument("--input", type=Path, help="dataset CSV for the fit command")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is not None and args.seed < 0:
            raise ConfigError("--seed must be non-negative")
        out = args.out if args.out is not None else Path(cfg.output.dir)
        out.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](cfg, args, out)
    except (ConfigError, NearResonanceError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except io.DatasetError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_IO
    except FitFailure as exc:
        print(f"fit failed: {exc}", file=sys.stderr)
        return EXIT_FIT
    except (FloatingPointError, ArithmeticError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
