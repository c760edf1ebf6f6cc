import json

import numpy as np
import pytest
import yaml

from singqc.cli import main, run_checks
from singqc.figures import PANELS, reproduce_figure
from singqc.sweeps import GridRange, SweepSpec, read_csv_body, run_sweep


def spec(**kw):
    base = dict(scenario="singqc-path1", axis="epsilon", range=GridRange(-0.2, 0.2, 5), gate="S")
    base.update(kw)
    return SweepSpec(**base)


class TestSpecValidation:
    @pytest.mark.parametrize("kw", [
        dict(range=GridRange(-0.2, 0.2, 5), scenario="unknown"),
        dict(scenario="rydberg-cz", axis="chi"),
        dict(axis="lifetime"),
        dict(scenario="dg", gate={"theta0": 0, "phi0": 0, "gamma": 1}),
        dict(scenario="slngqc", gate="T"),
        dict(gate="Q"),
        dict(fixed={"bogus": 1}),
        dict(fixed={"epsilon": 0.1}),
    ])
    def test_rejected(self, kw):
        with pytest.raises(ValueError):
            spec(**kw)

    @pytest.mark.parametrize("args", [(0.2, -0.2, 5), (0.0, 1.0, 1), (0.0, 1.0, 2.5)])
    def test_bad_range(self, args):
        with pytest.raises(ValueError):
            GridRange(*args)

    def test_custom_gate(self):
        s = spec(gate={"theta0": 0.3, "phi0": 0.1, "gamma": 1.0})
        assert s.gate_params().theta0 == 0.3

    def test_dict_round_trip(self):
        s = spec(fixed={"gamma_rate": 1e-4}, seed=3)
        assert SweepSpec.from_dict(s.to_dict()) == s

    def test_from_dict_rejects_unknown_fields(self):
        with pytest.raises(ValueError):
            SweepSpec.from_dict({**spec().to_dict(), "colour": "red"})


class TestRunSweep:
    def test_s_gate_control_error(self):
        r = run_sweep(spec(range=GridRange(-0.2, 0.2, 41)))
        assert r.fidelities.min() >= 0.999
        values = [row.axis_value for row in r.rows]
        assert values == sorted(values) and len(values) == 41

    def test_dg_ideal_point(self):
        r = run_sweep(spec(scenario="dg", range=GridRange(-0.1, 0.1, 3)))
        assert r.rows[1].fidelity == pytest.approx(1.0, abs=1e-7)

    def test_h_gate_path2_detuning(self):
        r = run_sweep(spec(scenario="singqc-path2", gate="H", axis="eta",
                           range=GridRange(-0.2, 0.2, 41)))
        assert r.fidelities.min() >= 0.993

    def test_deterministic_body(self):
        s = spec(axis="chi")
        assert run_sweep(s).body() == run_sweep(s).body()

    def test_sub_range_rows(self):
        full = run_sweep(spec(range=GridRange(-0.2, 0.2, 5)))
        part = run_sweep(spec(range=GridRange(0.0, 0.2, 3)))
        assert full.rows[2:] == part.rows

    def test_parallel_order(self):
        s = spec(axis="eta")
        assert run_sweep(s, jobs=2).body() == run_sweep(s, jobs=1).body()

    def test_csv_layout(self):
        r = run_sweep(spec(fixed={"gamma_rate": 1e-4}))
        text = r.to_csv()
        comments = [ln for ln in text.splitlines() if ln.startswith("#")]
        assert any("wall_time_s" in ln for ln in comments)
        rows = read_csv_body(text)
        assert len(rows) == 5
        assert rows[0]["axis_value"] == -0.2 and rows[0]["n_states"] == 6
        first = text.splitlines()[len(comments) + 1]
        assert len(first.split(",")[1]) <= 14  # 12 significant digits

    def test_gamma_axis_monotone(self):
        r = run_sweep(spec(axis="gamma_rate", range=GridRange(0.0, 4e-4, 5),
                           fixed={"epsilon": 0.1}))
        f = r.fidelities
        assert np.all(np.diff(f) <= 1e-9)


class TestFigures:
    def test_registry(self):
        expected = {f"{n}{c}" for n, cs in (("2", "abcd"), ("3", "abcd"), ("4", "abcdef"),
                                             ("6", "abcd"), ("7", "abcd"), ("8", "ab"))
                    for c in cs}
        assert set(PANELS) == expected
        assert len(PANELS["4a"].curves) == 4
        assert PANELS["4a"].assumptions
        assert [c.spec.scenario for c in PANELS["8a"].curves] == ["singqc-path1", "dg", "slngqc"]
        assert all(c.spec.axis == "lifetime" for c in PANELS["6a"].curves)

    def test_reproduce_writes_datasets(self, tmp_path):
        paths = reproduce_figure("8b", tmp_path)
        assert len(paths) == 4
        manifest = json.loads(paths[-1].read_text())
        assert manifest["assumptions"] and len(manifest["curves"]) == 3
        rows = read_csv_body(paths[0].read_text())
        assert len(rows) == 41

    def test_unknown_figure(self, tmp_path):
        with pytest.raises(ValueError):
            reproduce_figure("5a", tmp_path)


class TestCli:
    def test_check(self, capsys):
        assert main(["check"]) == 0
        assert all(ok for _, ok, _ in run_checks())
        assert "PASS" in capsys.readouterr().out

    def test_synthesize_and_simulate(self, tmp_path, capsys):
        sched = tmp_path / "h.json"
        traj = tmp_path / "h.csv"
        assert main(["synthesize", "--gate", "H", "--path", "path2", "--out", str(sched),
                     "--trajectory", str(traj), "--samples", "11"]) == 0
        assert json.loads(sched.read_text())["gate"]["path"] == "path2"
        assert len(traj.read_text().splitlines()) == 12
        assert main(["simulate", "--schedule", str(sched), "--eta", "0.2"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["fidelity"] >= 0.993

    def test_simulate_baseline(self, capsys):
        assert main(["simulate", "--scheme", "slngqc", "--gate", "H"]) == 0
        assert json.loads(capsys.readouterr().out)["fidelity"] == pytest.approx(1, abs=1e-7)

    def test_custom_gate_needs_all_angles(self, capsys):
        assert main(["synthesize", "--theta0", "0.3"]) != 0
        err = json.loads(capsys.readouterr().err.strip())
        assert err["error"] == "usage"

    def test_sweep_config_with_override(self, tmp_path):
        cfg = tmp_path / "sweep.yaml"
        cfg.write_text(yaml.safe_dump({"scenario": "dg", "gate": "S", "axis": "epsilon",
                                       "range": {"start": -0.2, "stop": 0.2, "steps": 5},
                                       "fixed": {"gamma_rate": 0.0}}))
        out = tmp_path / "out.csv"
        assert main(["sweep", "--config", str(cfg), "--steps", "3", "--fixed", "chi=0.1",
                     "--jobs", "1", "--out", str(out)]) == 0
        text = out.read_text()
        assert "# fixed: {'chi': 0.1, 'gamma_rate': 0.0}" in text
        assert len(read_csv_body(text)) == 3

    def test_sweep_flags_only(self, capsys):
        assert main(["sweep", "--scenario", "singqc-path1", "--axis", "eta", "--start", "-0.1",
                     "--stop", "0.1", "--steps", "3", "--jobs", "1"]) == 0
        assert len(read_csv_body(capsys.readouterr().out)) == 3

    @pytest.mark.parametrize("argv", [
        ["sweep", "--scenario", "rydberg-cz", "--axis", "chi", "--start", "0", "--stop", "1",
         "--steps", "3"],
        ["sweep", "--scenario", "dg", "--gate", "T", "--axis", "epsilon", "--start", "0",
         "--stop", "1", "--steps", "3"],
        ["reproduce", "9z"],
        ["frobnicate"],
        ["simulate", "--schedule", "/nonexistent/x.json"],
    ])
    def test_errors_are_machine_readable(self, argv, capsys):
        assert main(argv) != 0
        err = capsys.readouterr().err.strip().splitlines()[-1]
        doc = json.loads(err)
        assert set(doc) == {"error", "message"}

    def test_reproduce(self, tmp_path, capsys):
        assert main(["reproduce", "8a", "--out", str(tmp_path), "--jobs", "1"]) == 0
        files = json.loads(capsys.readouterr().out)["files"]
        assert len(files) == 4 and files[-1].endswith("manifest.json")

    def test_rydberg_command(self, capsys):
        assert main(["rydberg", "--sample", "2", "--seed", "5", "--jobs", "1"]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["sampled"] and doc["n_states"] == 2 and doc["population"] == 16
        assert 0.99 < doc["fidelity"] <= 1.0
