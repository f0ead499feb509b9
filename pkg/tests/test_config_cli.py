import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from geotraj import cli
from geotraj.config import config_from_dict, load_config, parse_angle, parse_time_us
from geotraj.exceptions import ConvergenceError, ParameterError


class TestAngles:
    @pytest.mark.parametrize("text,value", [
        ("0.73pi", 0.73 * math.pi), ("-pi/2", -math.pi / 2), ("3pi/4", 0.75 * math.pi), ("pi", math.pi),
        ("0.5*pi", 0.5 * math.pi), ("1.25", 1.25), (0.3, 0.3), (".5pi", 0.5 * math.pi),
    ])
    def test_parse(self, text, value):
        assert parse_angle(text) == value

    def test_exact_coefficient(self):
        # the coefficient is read as a decimal fraction, not a binary float product
        assert parse_angle("0.1pi") == float(np.float64(1) / 10 * 0 + 0.1) * math.pi

    @pytest.mark.parametrize("bad", ["pi/0", "abc", "0.7 rad"])
    def test_reject(self, bad):
        with pytest.raises(ParameterError):
            parse_angle(bad)

    def test_times(self):
        assert parse_time_us("inf") == math.inf
        assert parse_time_us(50) == 50.0
        with pytest.raises(ParameterError):
            parse_time_us("-1")


class TestConfig:
    def test_sections(self):
        cfg = config_from_dict({"seed": 3, "threads": 2, "transmon": {"levels": 5, "alpha_mhz": 300,
                                                                      "drag_scale": "auto"}})
        assert cfg.seed == 3 and cfg.threads == 2
        assert cfg.get("transmon", "alpha_mhz") == 300.0
        assert cfg.get("scan", "points", 41) == 41

    @pytest.mark.parametrize("data", [
        {"bogus": {}}, {"transmon": {"alpha": 300}}, {"transmon": {"levels": "4"}}, {"transmon": 3},
        {"seed": True},
    ])
    def test_rejects(self, data):
        with pytest.raises(ParameterError):
            config_from_dict(data)

    def test_file_errors(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ParameterError):
            load_config(bad)
        with pytest.raises(ParameterError):
            load_config(tmp_path / "missing.json")
        assert load_config(None).sections == {}


def run(argv, capsys):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def read(path):
    return list(csv.reader(open(path)))


class TestSynth:
    def test_hadamard(self, tmp_path, capsys):
        code, out, _ = run(["synth", "--gate", "H", "--chi1", "0.05pi", "--chi3", "0.73pi", "--branch", "0",
                            "--out", tmp_path], capsys)
        assert code == 0
        assert "gamma_g = 0.5pi" in out and "total pulse area" in out
        rows = read(tmp_path / "H_schedule.csv")
        assert rows[0] == ["t", "omega", "phi", "delta"]
        assert len(read(tmp_path / "H_trajectory.csv")) == 6

    def test_alias_equivalence(self, tmp_path, capsys):
        common = ["--chi1", "0.25pi", "--chi3", "0.75pi", "--out", tmp_path]
        assert run(["synth", "--gate", "Xpi", "--branch", "0", "--stem", "a"] + common, capsys)[0] == 0
        assert run(["synth", "--chi0", "0.5pi", "--xi0", "pi", "--gamma", "0.5pi", "--stem", "b"] + common,
                   capsys)[0] == 0
        assert (tmp_path / "a_schedule.csv").read_bytes() == (tmp_path / "b_schedule.csv").read_bytes()

    def test_degenerate_warning(self, tmp_path, capsys):
        code, _, err = run(["synth", "--gate", "H", "--chi1", "0.25pi", "--chi3", "0.8pi", "--out", tmp_path],
                           capsys)
        assert code == 0 and "degenerate first longitude arc" in err
        # for I, chi1 = chi0 = pi/2 also puts the latitude arc on the equator
        code, _, err = run(["synth", "--gate", "I", "--chi1", "0.5pi", "--chi3", "0.7pi", "--out", tmp_path],
                           capsys)
        assert code == 2 and "degenerate" in err and "equator" in err

    def test_usage_errors(self, tmp_path, capsys):
        assert run(["synth", "--out", tmp_path], capsys)[0] == 2
        assert run(["synth", "--gate", "H", "--chi1", "0.5pi", "--chi3", "0.8pi", "--out", tmp_path],
                   capsys)[0] == 2
        assert run(["synth", "--gate", "H", "--chi0", "1", "--out", tmp_path], capsys)[0] == 2

    def test_physical_units(self, tmp_path, capsys):
        code, out, _ = run(["synth", "--gate", "Xpi2", "--omega-mhz", "34", "--out", tmp_path], capsys)
        assert code == 0 and " ns" in out


class TestScan:
    def test_detuning(self, tmp_path, capsys):
        code, out, _ = run(["scan", "--gate", "Xpi", "--error", "detuning", "--points", "5", "--out", tmp_path],
                           capsys)
        assert code == 0 and "everywhere: True" in out
        geo = read(tmp_path / "Xpi_detuning_geometric.csv")
        conv = read(tmp_path / "Xpi_detuning_conventional.csv")
        assert geo[0] == conv[0] == ["delta", "infidelity"] and len(geo) == 6
        assert (tmp_path / "Xpi_detuning.svg").exists()

    def test_amplitude(self, tmp_path, capsys):
        assert run(["scan", "--gate", "H", "--error", "amplitude", "--points", "3", "--out", tmp_path],
                   capsys)[0] == 0
        assert len(read(tmp_path / "H_amplitude_geometric.csv")) == 4

    def test_zero_range(self, tmp_path, capsys):
        assert run(["scan", "--gate", "I", "--delta-max", "0", "--points", "3", "--out", tmp_path], capsys)[0] == 0
        vals = [float(r[1]) for r in read(tmp_path / "I_detuning_geometric.csv")[1:]]
        assert max(vals) < 1e-8

    def test_unknown_error_kind(self, tmp_path, capsys):
        assert run(["scan", "--gate", "Xpi", "--error", "phase", "--out", tmp_path], capsys)[0] == 2

    def test_fidelity_re_flag(self, tmp_path, capsys):
        def curve(gate, extra):
            run(["scan", "--gate", gate, "--points", "3", "--out", tmp_path] + extra, capsys)
            return [float(r[1]) for r in read(tmp_path / f"{gate}_detuning_conventional.csv")[1:]]

        # conventional I is -1 times the identity: invisible to the modulus, fatal to Re Tr
        a, b = curve("I", []), curve("I", ["--fidelity-re"])
        assert a[1] < 1e-8 and b[1] == pytest.approx(2.0)
        assert curve("I", ["--mode", "re"]) == b
        # X_pi is produced with the textbook phase, so both forms agree
        assert curve("Xpi", []) == pytest.approx(curve("Xpi", ["--fidelity-re"]), abs=1e-12)

    def test_rerun_byte_identical(self, tmp_path, capsys):
        args = ["scan", "--gate", "iSWAP", "--points", "5", "--out", tmp_path]
        run(args, capsys)
        first = (tmp_path / "iSWAP_detuning_2q_geometric.csv").read_bytes()
        svg = (tmp_path / "iSWAP_detuning_2q.svg").read_bytes()
        run(args + ["--threads", "2"], capsys)
        assert (tmp_path / "iSWAP_detuning_2q_geometric.csv").read_bytes() == first
        assert (tmp_path / "iSWAP_detuning_2q.svg").read_bytes() == svg


class TestThreads:
    def test_env_fallback(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("GEOTRAJ_THREADS", "2")
        assert run(["scan", "--gate", "Xpi", "--points", "3", "--out", tmp_path], capsys)[0] == 0
        monkeypatch.setenv("GEOTRAJ_THREADS", "many")
        code, _, err = run(["scan", "--gate", "Xpi", "--points", "3", "--out", tmp_path], capsys)
        assert code == 2 and "GEOTRAJ_THREADS" in err

    def test_config_threads_and_keys(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"threads": 2, "scan": {"points": 3}}))
        assert run(["scan", "--gate", "Xpi", "--config", cfg, "--out", tmp_path], capsys)[0] == 0
        assert len(read(tmp_path / "Xpi_detuning_geometric.csv")) == 4
        cfg.write_text(json.dumps({"scan": {"pointz": 3}}))
        code, _, err = run(["scan", "--gate", "Xpi", "--config", cfg, "--out", tmp_path], capsys)
        assert code == 2 and "pointz" in err


def test_optimize_coarse(tmp_path, capsys):
    code, out, _ = run(["optimize", "--gate", "H", "--resolution", "0.1pi", "--fine-resolution", "0.1pi",
                        "--out", tmp_path], capsys)
    assert code == 0
    summary = json.loads((tmp_path / "H_optimum.json").read_text())
    assert {"chi1", "chi3", "infidelity", "branch"} <= set(summary)
    assert read(tmp_path / "H_landscape.csv")[0] == ["chi1", "chi3", "infidelity"]


def test_transmon_two_level_flat(tmp_path, capsys):
    code, out, _ = run(["transmon", "--gate", "Xpi2", "--levels", "2", "--t1", "inf", "--tphi", "inf",
                        "--omega-min", "20", "--omega-max", "40", "--omega-step", "10", "--out", tmp_path], capsys)
    assert code == 0
    rows = read(tmp_path / "Xpi2_transmon.csv")
    assert rows[0] == ["omega_m", "infidelity_nodrag", "infidelity_drag"]
    assert [float(r[0]) for r in rows[1:]] == [20.0, 30.0, 40.0]
    assert max(abs(float(v)) for r in rows[1:] for v in r[1:]) < 1e-8


def test_transmon_rejects_two_qubit_gate(tmp_path, capsys):
    assert run(["transmon", "--gate", "CZ", "--out", tmp_path], capsys)[0] == 2


def test_twoqubit_small_grid(tmp_path, capsys):
    code, out, err = run(["twoqubit", "--gate", "CZ", "--nu-points", "2", "--beta-points", "2",
                          "--beta-min", "0.8", "--beta-max", "1.0", "--t1", "inf", "--tphi", "inf",
                          "--out", tmp_path], capsys)
    assert code == 0 and "best fidelity" in out and "nu offset" in err
    assert len(read(tmp_path / "CZ_nu_beta.csv")) == 5


def test_numerical_failure_exit_code(tmp_path, capsys, monkeypatch):
    from geotraj import twoqubit

    def boom(*a, **k):
        raise ConvergenceError("step cap")

    monkeypatch.setattr(twoqubit, "program_step_unitaries", boom)
    code, _, err = run(["twoqubit", "--gate", "CZ", "--nu-points", "1", "--beta-points", "1", "--beta-min", "1",
                        "--beta-max", "1", "--out", tmp_path], capsys)
    assert code == 3 and "step cap" in err


def test_report_quick(tmp_path, capsys):
    code, out, _ = run(["report", "--recipe", "four-segment", "--quick", "--out", tmp_path], capsys)
    assert code == 0
    rows = read(tmp_path / "Xpi_four_vs_three.csv")
    assert rows[0] == ["delta", "infidelity_four", "infidelity_three"]
    assert max(abs(float(a) - float(b)) for _, a, b in rows[1:]) < 1e-6


def test_console_script(tmp_path):
    res = subprocess.run([sys.executable, "-m", "geotraj.cli", "synth", "--gate", "Xpi", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "branch" in res.stdout
    res = subprocess.run([sys.executable, "-m", "geotraj.cli", "bogus"], capture_output=True, text=True)
    assert res.returncode == 2
