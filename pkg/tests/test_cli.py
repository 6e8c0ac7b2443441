import json

import pytest

from qprobe.cli import main


def run(args):
    return main([str(a) for a in args])


class TestMeasuresCommand:
    def test_singlet(self, capsys):
        assert run(["measures", "--x", "1"]) == 0
        out = capsys.readouterr().out
        values = dict(line.split(" = ") for line in out.strip().splitlines())
        assert float(values["concurrence"]) == pytest.approx(1.0)
        assert float(values["discord"]) == pytest.approx(1.0, abs=1e-6)
        assert float(values["classical"]) == pytest.approx(1.0, abs=1e-6)
        assert float(values["classical_eq20"]) == pytest.approx(0.0, abs=1e-9)

    def test_separable_point(self, capsys):
        assert run(["measures", "--x", "0.666667"]) == 0
        out = capsys.readouterr().out
        values = dict(line.split(" = ") for line in out.strip().splitlines())
        assert float(values["concurrence"]) == pytest.approx(0.0, abs=1e-5)
        assert float(values["discord"]) == pytest.approx(0.0, abs=1e-4)
        assert float(values["classical"]) == pytest.approx(0.2516, abs=1e-3)

    def test_domain_validation_exit_code(self, capsys):
        assert run(["measures", "--x", "0.3"]) == 2
        assert "family domain" in capsys.readouterr().err

    def test_missing_x(self, capsys):
        assert run(["measures"]) == 2

    def test_json_output(self, tmp_path, capsys):
        out = tmp_path / "m.json"
        assert run(["measures", "--x", "0.75", "--out", out]) == 0
        data = json.loads(out.read_text())
        assert data["concurrence"] == pytest.approx(0.25, abs=1e-9)


class TestSweepCommand:
    def test_noiseless_schema_and_rows(self, tmp_path, capsys):
        out = tmp_path / "s.csv"
        assert run(["sweep", "--x-step", "0.05", "--out", out]) == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "x,concurrence,mutual_info,classical,discord,classical_eq20,sigma_z"
        assert len(lines) == 1 + 11
        row = dict(zip(lines[0].split(","), lines[6].split(",")))
        assert float(row["x"]) == pytest.approx(0.75)
        assert float(row["concurrence"]) == pytest.approx(0.25, abs=1e-9)
        assert float(row["sigma_z"]) == pytest.approx(0.0, abs=1e-12)

    def test_noisy_schema(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("QPROBE_THREADS", "2")
        out = tmp_path / "sn.csv"
        assert run(["sweep", "--x-step", "0.25", "--gamma", "0.1", "--out", out]) == 0
        lines = out.read_text().strip().splitlines()
        header = lines[0].split(",")
        assert header == [
            "x", "concurrence", "mutual_info", "classical", "discord",
            "classical_eq20", "sigma_z",
            "concurrence_noisy", "mutual_info_noisy", "classical_noisy",
            "discord_noisy", "classical_eq20_noisy", "sigma_z_noisy",
        ]
        for line in lines[1:]:
            row = dict(zip(header, (float(v) for v in line.split(","))))
            assert row["concurrence_noisy"] <= row["concurrence"] + 1e-12

    def test_byte_determinism(self, tmp_path, capsys, monkeypatch):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        monkeypatch.setenv("QPROBE_THREADS", "3")
        assert run(["sweep", "--x-step", "0.1", "--gamma", "0.1", "--out", a]) == 0
        monkeypatch.setenv("QPROBE_THREADS", "1")
        assert run(["sweep", "--x-step", "0.1", "--gamma", "0.1", "--out", b]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_grid_validation(self, capsys):
        assert run(["sweep", "--x-step", "0"]) == 2
        assert run(["sweep", "--x-start", "0.4"]) == 2

    def test_unwritable_path_exit_code(self, capsys):
        assert run(["sweep", "--x-step", "0.5", "--out", "/nonexistent/d/s.csv"]) == 3


class TestConfigFile:
    def test_flags_win_over_config(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"x": 0.6, "out": str(tmp_path / "ignored.json")}))
        out = tmp_path / "m.json"
        assert run(["measures", "--config", cfg, "--x", "0.75", "--out", out]) == 0
        assert json.loads(out.read_text())["x"] == pytest.approx(0.75)

    def test_config_supplies_missing_values(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"x": 0.75}))
        assert run(["measures", "--config", cfg]) == 0
        out = capsys.readouterr().out
        assert "x = 0.75" in out

    def test_bad_json_exit_code(self, tmp_path, capsys):
        cfg = tmp_path / "c.json"
        cfg.write_text("{not json")
        assert run(["measures", "--config", cfg, "--x", "0.75"]) == 2

    def test_missing_config_is_io_error(self, capsys):
        assert run(["measures", "--config", "/no/such/file.json", "--x", "0.75"]) == 3


class TestEvolveCommand:
    def test_time_series(self, tmp_path, capsys):
        out = tmp_path / "e.csv"
        assert run([
            "evolve", "--x", "0.75", "--t-end", "1.5707963267948966",
            "--samples", "5", "--out", out,
        ]) == 0
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "t,concurrence,mutual_info,sigma_z,p_excited,dist_to_initial"
        assert len(lines) == 6
        last = [float(v) for v in lines[-1].split(",")]
        assert last[1] == pytest.approx(0.25, abs=1e-6)  # revived concurrence
        assert last[3] == pytest.approx(0.0, abs=1e-6)   # sigma_z at t1


class TestProbeCommand:
    def test_exact_readout(self, capsys):
        assert run(["probe", "--x", "0.75"]) == 0
        out = capsys.readouterr().out
        values = dict(line.split(" = ") for line in out.strip().splitlines())
        assert float(values["mean_sigma_z"]) == pytest.approx(0.0, abs=1e-9)
        assert float(values["x_hat"]) == pytest.approx(0.75)
        assert values["state_restored"] == "false"

    def test_sampled_readout(self, capsys):
        assert run(["probe", "--x", "0.75", "--shots", "2000", "--seed", "5"]) == 0
        out = capsys.readouterr().out
        values = dict(line.split(" = ") for line in out.strip().splitlines())
        assert abs(float(values["x_hat_sampled"]) - 0.75) < 0.05


class TestQndCommand:
    def test_exact_run_with_report(self, tmp_path, capsys):
        out = tmp_path / "q.csv"
        assert run([
            "qnd", "--x", "0.75", "--cycles", "3", "--shots", "0",
            "--report-tm", "--out", out,
        ]) == 0
        text = capsys.readouterr().out
        values = dict(line.split(" = ") for line in text.strip().splitlines())
        assert float(values["x_hat"]) == pytest.approx(0.75, abs=1e-9)
        assert float(values["restoration_distance"]) <= 1e-9
        assert float(values["transfer_fidelity"]) >= 1 - 1e-9
        assert float(values["candidate_fidelity"]) < 1 - 1e-3
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "cycle,stage,prep,duration,p_excited,shots,count_excited"
        assert len(lines) == 1 + 6

    def test_seeded_ci_contains_truth(self, capsys):
        assert run([
            "qnd", "--x", "0.75", "--cycles", "2", "--shots", "10000", "--seed", "7",
        ]) == 0
        values = dict(
            line.split(" = ") for line in capsys.readouterr().out.strip().splitlines()
        )
        lo = float(values["ci99"].strip("[]").split(",")[0])
        hi = float(values["ci99"].strip("[]").split(",")[1])
        assert lo <= 0.75 <= hi


class TestPlotCommand:
    def _sweep(self, tmp_path):
        out = tmp_path / "s.csv"
        assert run(["sweep", "--x-step", "0.1", "--out", out]) == 0
        return out

    def test_renders_polylines(self, tmp_path, capsys):
        csv = self._sweep(tmp_path)
        svg = tmp_path / "p.svg"
        assert run([
            "plot", "--csv", csv, "--columns", "discord,classical", "--out", svg,
        ]) == 0
        text = svg.read_text()
        assert text.count("<polyline") == 2
        assert "discord" in text and "classical" in text
        assert text.startswith("<?xml")

    def test_byte_deterministic(self, tmp_path, capsys):
        csv = self._sweep(tmp_path)
        a, b = tmp_path / "a.svg", tmp_path / "b.svg"
        assert run(["plot", "--csv", csv, "--columns", "concurrence", "--out", a]) == 0
        assert run(["plot", "--csv", csv, "--columns", "concurrence", "--out", b]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_missing_column_exit_code(self, tmp_path, capsys):
        csv = self._sweep(tmp_path)
        assert run(["plot", "--csv", csv, "--columns", "nope", "--out",
                    tmp_path / "x.svg"]) == 4
        assert "nope" in capsys.readouterr().err

    def test_empty_csv_exit_code(self, tmp_path, capsys):
        empty = tmp_path / "empty.csv"
        empty.write_text("x,concurrence\n")
        assert run(["plot", "--csv", empty, "--columns", "x", "--out",
                    tmp_path / "x.svg"]) == 4


class TestExitCodes:
    def test_unknown_command(self, capsys):
        assert run(["frobnicate"]) == 2

    def test_bad_flag_value(self, capsys):
        assert run(["measures", "--x", "abc"]) == 2
