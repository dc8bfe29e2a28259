import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hfdecoherence import io
from hfdecoherence.cli import EXIT_CONFIG, EXIT_FIT, EXIT_IO, EXIT_NUMERIC, EXIT_OK, main
from hfdecoherence.config import ConfigError, load_config, parse_config
from hfdecoherence.experiment import RamseyData
from hfdecoherence.relaxation import RelaxationData
from hfdecoherence.scattering import ratio_scan


def write(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


class TestConfig:
    def test_defaults(self):
        cfg = load_config(None)
        assert cfg.detunings_hz() == (227.5e9,)
        assert cfg.mc.seed == 2024

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError, match="unknown key"):
            parse_config({"laser": {"detuning": 1e9}})

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError, match="unknown section"):
            parse_config({"plot": {}})

    def test_zero_detuning_rejected(self):
        with pytest.raises(ConfigError, match="rejected"):
            parse_config({"laser": {"detunings_hz": [0.0]}})

    def test_one_coupling_source(self):
        with pytest.raises(ConfigError):
            parse_config({"laser": {"coupling_g": 1e6, "target_tau_dec_s": 1e-3}})

    def test_atom_override_in_hz(self):
        cfg = parse_config({"atom": {"gamma_hz": 20e6}})
        assert cfg.constants().gamma == pytest.approx(2 * math.pi * 20e6)

    def test_calibrated_laser(self):
        from hfdecoherence.scattering import decoherence_rate
        cfg = parse_config({"laser": {"target_tau_dec_s": 1e-3}})
        assert decoherence_rate(cfg.laser_at(-331.8e9)) == pytest.approx(1e3)

    def test_bad_toml(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(write(tmp_path, "[laser\n"))


class TestRoundTrip:
    @given(st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=1, max_size=20))
    def test_relaxation_bit_identical(self, values):
        import tempfile
        from pathlib import Path
        v = np.array(values)
        data = RelaxationData(np.abs(v), v, np.abs(v) + 1)
        with tempfile.TemporaryDirectory() as d:
            path = io.write_relaxation(Path(d) / "r.csv", data)
            back = io.read_relaxation(path)
        for a, b in zip((data.t, data.survival_probability, data.weight),
                        (back.t, back.survival_probability, back.weight)):
            assert a.tobytes() == b.tobytes()

    def test_ramsey_bit_identical(self, tmp_path):
        rng = np.random.default_rng(0)
        data = RamseyData(*rng.random((5, 7)))
        back = io.read_ramsey(io.write_ramsey(tmp_path / "x.csv", data))
        for k in ("tau", "phi0_mean_counts", "phipi_mean_counts", "contrast", "stderr"):
            assert getattr(data, k).tobytes() == getattr(back, k).tobytes()

    def test_rates_roundtrip(self, tmp_path):
        rows = ratio_scan([-331.8e9, 82e9, 0.0])
        back = io.read_rates(io.write_rates(tmp_path / "r.csv", rows))
        for a, b in zip(rows, back):
            for k in io.RATES_HEADER:
                x, y = getattr(a, k), getattr(b, k)
                assert np.float64(x).tobytes() == np.float64(y).tobytes()

    def test_header_checked(self, tmp_path):
        p = io.write_relaxation(tmp_path / "r.csv", RelaxationData([0.0], [1.0], [1.0]))
        with pytest.raises(io.DatasetError):
            io.read_ramsey(p)
        assert io.detect_kind(p) == "relax"


class TestCommands:
    def test_rates(self, tmp_path):
        assert main(["rates", "--out", str(tmp_path)]) == EXIT_OK
        rows = io.read_rates(tmp_path / "rates.csv")
        assert len(rows) == 82
        assert (tmp_path / "rates.csv").read_text().splitlines()[0] == ",".join(io.RATES_HEADER)
        summary = json.loads((tmp_path / "rates_summary.json").read_text())
        assert summary["plateau_coefficient"] == pytest.approx(0.9669, abs=5e-4)
        red = np.array([r.raman_over_stark for r in rows if r.delta_hz < 0])
        assert np.all(np.diff(red) > 0)  # grid runs from -1e14 towards -50 GHz

    def test_rates_single_point_budget(self, tmp_path):
        cfg = write(tmp_path, "[laser]\ndetunings_hz = [-331.8e9]\n")
        assert main(["rates", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_OK
        d, budget = io.read_table(tmp_path / "rates_budget.csv", io.BUDGET_HEADER)
        assert budget[0] > 19

    def test_invalid_detuning_exit_code(self, tmp_path, capsys):
        cfg = write(tmp_path, "[laser]\ndetunings_hz = [0.0]\n")
        assert main(["rates", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_CONFIG
        assert "rejected" in capsys.readouterr().err

    def test_missing_config_is_io_error(self, tmp_path):
        assert main(["rates", "--config", str(tmp_path / "none.toml")]) == EXIT_IO

    def test_stark(self, tmp_path):
        assert main(["stark", "--out", str(tmp_path)]) == EXIT_OK
        cols = io.read_table(tmp_path / "stark.csv", io.STARK_HEADER)
        assert cols[4][0] == pytest.approx(2000.0)

    def test_relax_noiseless_exact(self, tmp_path):
        cfg = write(tmp_path, "[relax]\nrepetitions = 0\n")
        assert main(["relax", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_OK
        report = json.loads((tmp_path / "relax_fit.json").read_text())
        for r in report.values():
            assert abs(r["relative_error"]) < 1e-6

    def test_relax_noisy_and_both_states_similar(self, tmp_path):
        assert main(["relax", "--out", str(tmp_path)]) == EXIT_OK
        report = json.loads((tmp_path / "relax_fit.json").read_text())
        for r in report.values():
            assert abs(r["relative_error"]) < 0.10
        up = io.read_relaxation(tmp_path / "relax_p227.5GHz_up.csv").survival_probability
        down = io.read_relaxation(tmp_path / "relax_p227.5GHz_down.csv").survival_probability
        assert np.max(np.abs(up - down)) < 0.15

    def test_ramsey_analytic_and_control(self, tmp_path):
        assert main(["ramsey", "--out", str(tmp_path)]) == EXIT_OK
        report = json.loads((tmp_path / "ramsey_fit.json").read_text())
        entry = report["p227.5GHz"]
        assert entry["tau_dec_fit"] == pytest.approx(entry["tau_dec_model"], rel=0.10)
        assert entry["inverse_tau_dec_over_stark"] == pytest.approx(entry["raman_over_stark"], rel=0.10)
        assert report["control_min_contrast"] == pytest.approx(1.0)
        control = io.read_ramsey(tmp_path / "ramsey_control.csv")
        assert np.all(control.contrast > 0.85)

    def test_ramsey_mc(self, tmp_path):
        cfg = write(tmp_path, "[mc]\nn_traj = 1000\n")
        assert main(["ramsey", "--mode", "mc", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_OK
        report = json.loads((tmp_path / "ramsey_fit.json").read_text())
        assert report["p227.5GHz"]["tau_dec_fit"] == pytest.approx(0.5e-3, rel=0.10)

    def test_deterministic_outputs(self, tmp_path):
        for run in ("a", "b"):
            assert main(["ramsey", "--seed", "99", "--out", str(tmp_path / run)]) == EXIT_OK
            assert main(["relax", "--seed", "99", "--out", str(tmp_path / run)]) == EXIT_OK
        for name in ("ramsey_p227.5GHz.csv", "relax_p227.5GHz_up.csv", "relax_p227.5GHz_down.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_fit_command(self, tmp_path, capsys):
        assert main(["relax", "--out", str(tmp_path)]) == EXIT_OK
        capsys.readouterr()
        assert main(["fit", "--input", str(tmp_path / "relax_p227.5GHz_up.csv"), "--out", str(tmp_path)]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["kind"] == "relax"

    def test_fit_without_input(self, tmp_path):
        assert main(["fit", "--out", str(tmp_path)]) == EXIT_CONFIG

    def test_nan_data_is_numeric_error(self, tmp_path):
        path = io.write_relaxation(tmp_path / "r.csv", RelaxationData(np.linspace(0, 1, 6), [np.nan] * 6, np.ones(6)))
        assert main(["fit", "--input", str(path), "--out", str(tmp_path)]) == EXIT_NUMERIC

    def test_nonconvergence_exit_code(self, tmp_path, monkeypatch):
        from hfdecoherence import cli
        from hfdecoherence.fitting import FitResult
        monkeypatch.setattr(cli, "fit_relaxation",
                            lambda *a, **k: FitResult(math.nan, math.inf, False, 1, math.nan, message="stalled"))
        assert main(["relax", "--out", str(tmp_path)]) == EXIT_FIT

    def test_fit_rejects_rates_table(self, tmp_path):
        io.write_rates(tmp_path / "r.csv", ratio_scan([-331.8e9]))
        assert main(["fit", "--input", str(tmp_path / "r.csv"), "--out", str(tmp_path)]) == EXIT_IO
