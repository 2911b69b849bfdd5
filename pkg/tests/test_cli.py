import json

import numpy as np
import pytest

from platoonshape.cli import main


def write_config(tmp_path, name="scenario", **overrides):
    cfg = {
        "name": name,
        "safety": {"l": 6.0, "a_min": 4.0},
        "profile": {"tau0": 2.6, "tau_odd_end": 1.74, "gamma": 0.057},
        "gains": {"p": 0.5, "p0": 0.25, "p1": 1.0},
        "vehicles": {"count": 6},
    }
    cfg.update(overrides)
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(cfg))
    return path


def read_csv_rows(path):
    lines = path.read_text().strip().split("\n")
    header = lines[0].split(",")
    return header, [line.split(",") for line in lines[1:]]


class TestSafetyCurve:
    def test_minimum_row_is_marked(self, tmp_path):
        code = main(["safety-curve", "--out", str(tmp_path), "--v-min", "2",
                     "--v-max", "30", "--n-samples", "100"])
        assert code == 0
        header, rows = read_csv_rows(tmp_path / "curve.csv")
        assert header == ["v", "tau", "is_minimum"]
        marked = [r for r in rows if r[2] == "1"]
        assert len(marked) == 1
        assert abs(float(marked[0][0]) - 6.9282) < 1e-4
        assert abs(float(marked[0][1]) - 1.7321) < 1e-4
        # rows stay sorted by velocity so the curve plots cleanly
        vs = [float(r[0]) for r in rows]
        assert vs == sorted(vs)

    def test_single_sample_is_usage_error(self, tmp_path):
        assert main(["safety-curve", "--out", str(tmp_path), "--n-samples", "1"]) == 2

    def test_degenerate_range(self, tmp_path):
        code = main(["safety-curve", "--out", str(tmp_path), "--v-min", "18.156",
                     "--v-max", "18.156", "--n-samples", "2"])
        assert code == 0
        _, rows = read_csv_rows(tmp_path / "curve.csv")
        taus = [float(r[1]) for r in rows if r[2] == "0"]
        assert len(taus) == 2
        assert all(abs(t - 2.600) < 1e-3 for t in taus)

    def test_bad_range_rejected(self, tmp_path):
        assert main(["safety-curve", "--out", str(tmp_path), "--v-min", "-1"]) == 2


class TestDesign:
    def test_optimizes_gamma_when_absent(self, tmp_path):
        cfg = write_config(tmp_path, profile={"tau0": 2.6, "tau_odd_end": 1.74})
        out = tmp_path / "out"
        assert main(["design", "--config", str(cfg), "--out", str(out)]) == 0
        manifest = json.loads((out / "design_manifest.json").read_text())
        assert manifest["gamma_optimized"] is True
        assert abs(manifest["gamma"] - 0.057) <= 0.005

    def test_explicit_gamma_matches_optimized_band(self, tmp_path):
        cfg_opt = write_config(tmp_path, name="opt",
                               profile={"tau0": 2.6, "tau_odd_end": 1.74})
        cfg_fix = write_config(tmp_path, name="fix")
        out_opt, out_fix = tmp_path / "o1", tmp_path / "o2"
        assert main(["design", "--config", str(cfg_opt), "--out", str(out_opt)]) == 0
        assert main(["design", "--config", str(cfg_fix), "--out", str(out_fix)]) == 0
        g_opt = json.loads((out_opt / "design_manifest.json").read_text())["gamma"]
        assert abs(g_opt - 0.057) / 0.057 <= 0.09
        header, rows = read_csv_rows(out_fix / "profile_samples.csv")
        assert header == ["s", "tau_odd", "tau_even", "v_odd", "v_des", "a_odd", "a_even"]
        assert len(rows) > 100

    def test_infeasible_target_exits_3(self, tmp_path, capsys):
        cfg = write_config(tmp_path, profile={"tau0": 2.6, "tau_odd_end": 1.5})
        code = main(["design", "--config", str(cfg), "--out", str(tmp_path / "out")])
        assert code == 3
        payload = json.loads(capsys.readouterr().out.strip().split("\n")[-1])
        assert payload["reason"] == "infeasible-target"

    def test_design_outputs_deterministic(self, tmp_path):
        cfg = write_config(tmp_path)
        out1, out2 = tmp_path / "d1", tmp_path / "d2"
        assert main(["design", "--config", str(cfg), "--out", str(out1)]) == 0
        assert main(["design", "--config", str(cfg), "--out", str(out2)]) == 0
        assert ((out1 / "profile_samples.csv").read_bytes()
                == (out2 / "profile_samples.csv").read_bytes())
        assert (out1 / "profile.json").read_bytes() == (out2 / "profile.json").read_bytes()

    def test_profile_json_roundtrip_keys(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "out"
        main(["design", "--config", str(cfg), "--out", str(out)])
        profile = json.loads((out / "profile.json").read_text())
        assert set(profile) == {"tau0", "tau_odd_end", "alpha", "beta", "gamma",
                                "center_s", "safety"}
        assert profile["alpha"] == pytest.approx(0.43)


class TestSimulate:
    def test_section_v_checks_pass(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "out"
        code = main(["simulate", "--config", str(cfg), "--out", str(out), "--h", "0.1"])
        assert code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert all(c["pass"] for c in manifest["checks"].values())
        assert manifest["summary"]["min_acceleration"] >= -4.05

    def test_deterministic_trace_output(self, tmp_path):
        cfg = write_config(tmp_path, vehicles={"count": 3},
                           grid={"s_start": -20.0, "s_end": 20.0, "step_h": 0.05})
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["simulate", "--config", str(cfg), "--out", str(out1)]) == 0
        assert main(["simulate", "--config", str(cfg), "--out", str(out2)]) == 0
        assert (out1 / "trace.csv").read_bytes() == (out2 / "trace.csv").read_bytes()

    def test_no_shaping_baseline_runs_clean(self, tmp_path):
        cfg = write_config(tmp_path, profile={"tau0": 2.6},
                           grid={"s_start": -10.0, "s_end": 10.0, "step_h": 0.05},
                           vehicles={"count": 3})
        out = tmp_path / "out"
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["summary"]["sup_abs_e"] == [0.0, 0.0, 0.0]

    def test_stall_exits_4(self, tmp_path, capsys):
        cfg = write_config(tmp_path, profile={"tau0": 2.6, "tau_odd_end": 1.74,
                                              "gamma": 6.0},
                           grid={"s_start": -5.0, "s_end": 5.0, "step_h": 0.005},
                           vehicles={"count": 2})
        code = main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "out")])
        assert code == 4
        payload = json.loads(capsys.readouterr().out.strip().split("\n")[-1])
        assert payload["reason"] == "stall"

    def test_ordering_violation_exits_4_with_pair(self, tmp_path, capsys):
        cfg = write_config(tmp_path,
                           grid={"s_start": -20.0, "s_end": 20.0, "step_h": 0.05},
                           vehicles={"count": 4},
                           perturbations=[{"index": 2, "dt0": -2.7}])
        code = main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "out")])
        assert code == 4
        payload = json.loads(capsys.readouterr().out.strip().split("\n")[-1])
        assert payload["reason"] == "ordering-violation"
        assert payload["pair"] == [1, 2]

    def test_unknown_config_key_rejected(self, tmp_path):
        cfg = write_config(tmp_path, extra_section={"x": 1})
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2

    def test_unknown_nested_key_rejected(self, tmp_path):
        cfg = write_config(tmp_path, safety={"l": 6.0, "a_min": 4.0, "mu": 0.9})
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2

    def test_explicit_entry_arrays(self, tmp_path):
        v1 = 18.156287771866126
        cfg = write_config(tmp_path, vehicles={
            "count": 3,
            "entry_times": [0.0, 2.7, 5.2],
            "entry_velocities": [v1, v1 - 0.5, v1],
        }, grid={"s_start": -40.0, "s_end": 20.0, "step_h": 0.05})
        out = tmp_path / "out"
        assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == 0
        manifest = json.loads((out / "manifest.json").read_text())
        # vehicle 1 entered 0.1 s late and slow, so its gap error is visible
        assert manifest["summary"]["sup_abs_delta"][1] >= 0.1

    def test_ideal_marker_conflicts_with_entry_arrays(self, tmp_path):
        cfg = write_config(tmp_path, vehicles={
            "count": 2, "initial": "ideal", "entry_times": [0.0, 2.6]})
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2

    def test_decel_limit_loosens_gamma_optimum(self, tmp_path):
        cfg = write_config(tmp_path, profile={
            "tau0": 2.6, "tau_odd_end": 1.74, "decel_limit": 400.0})
        out = tmp_path / "out"
        assert main(["design", "--config", str(cfg), "--out", str(out)]) == 0
        manifest = json.loads((out / "design_manifest.json").read_text())
        assert manifest["gamma"] > 0.057
        assert manifest["decel_limit"] == 400.0

    def test_env_var_overrides_out(self, tmp_path, monkeypatch):
        cfg = write_config(tmp_path, vehicles={"count": 2},
                           grid={"s_start": -5.0, "s_end": 5.0, "step_h": 0.1})
        env_dir = tmp_path / "env_out"
        monkeypatch.setenv("PLATOON_OUT", str(env_dir))
        assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "cli_out")]) == 0
        assert (env_dir / "trace.csv").exists()
        assert not (tmp_path / "cli_out").exists()


class TestAuditMerge:
    @pytest.fixture()
    def section_v_outputs(self, tmp_path):
        cfg = write_config(tmp_path)
        out = tmp_path / "out"
        assert main(["simulate", "--config", str(cfg), "--out", str(out), "--h", "0.1"]) == 0
        return cfg, out

    def test_empty_substream_feasible(self, section_v_outputs, tmp_path):
        cfg, out = section_v_outputs
        code = main(["audit-merge", "--config", str(cfg), "--trace",
                     str(out / "trace.csv"), "--out", str(out)])
        assert code == 0
        report = json.loads((out / "merge_report.json").read_text())
        gaps = [p["gap"] for p in report["pairs"]]
        assert np.allclose(gaps, [1.74, 3.46, 1.74, 3.46, 1.74], atol=1e-3)

    def test_centered_insertion_infeasible(self, section_v_outputs):
        cfg, out = section_v_outputs
        manifest = json.loads((out / "manifest.json").read_text())
        report_path = out / "merge_report.json"
        # substream vehicle centered in the first wide gap
        rows = (out / "trace.csv").read_text().strip().split("\n")[1:]
        final_t = {}
        for row in rows:
            fields = row.split(",")
            final_t[int(fields[1])] = float(fields[3])
        sub_time = 0.5 * (final_t[1] + final_t[2])
        code = main(["audit-merge", "--config", str(cfg), "--trace",
                     str(out / "trace.csv"), "--sub-times", str(sub_time),
                     "--out", str(out)])
        assert code == 1
        report = json.loads(report_path.read_text())
        assert report["feasible"] is False
        assert abs(report["worst_margin"] - (-0.002)) <= 0.001
        assert manifest["checks"]["convergence"]["pass"]

    def test_explicit_sub_velocity_flag(self, section_v_outputs):
        cfg, out = section_v_outputs
        code = main(["audit-merge", "--config", str(cfg), "--trace",
                     str(out / "trace.csv"), "--sub-velocity", "7.6245",
                     "--out", str(out)])
        assert code == 0
        report = json.loads((out / "merge_report.json").read_text())
        assert abs(report["merged_velocity"] - 7.6245) < 1e-9
        assert abs(report["required_gap"] - 1.74) < 1e-3

    def test_missing_trace_exits_2(self, section_v_outputs, tmp_path):
        cfg, out = section_v_outputs
        assert main(["audit-merge", "--config", str(cfg), "--trace",
                     str(tmp_path / "nope.csv"), "--out", str(out)]) == 2

    def test_corrupt_trace_exits_2(self, section_v_outputs, tmp_path):
        cfg, out = section_v_outputs
        bad = tmp_path / "bad.csv"
        bad.write_text("not,a,trace\n1,2,3\n")
        assert main(["audit-merge", "--config", str(cfg), "--trace", str(bad),
                     "--out", str(out)]) == 2


class TestSweep:
    def test_runs_each_scenario_into_subdir(self, tmp_path):
        cfg_a = write_config(tmp_path, name="alpha", vehicles={"count": 2},
                             grid={"s_start": -10.0, "s_end": 10.0, "step_h": 0.1})
        cfg_b = write_config(tmp_path, name="bravo", vehicles={"count": 3},
                             grid={"s_start": -10.0, "s_end": 10.0, "step_h": 0.1})
        out = tmp_path / "sweep"
        code = main(["sweep", "--out", str(out), str(cfg_a), str(cfg_b)])
        assert code == 0
        for name in ("alpha", "bravo"):
            assert (out / name / "trace.csv").exists()
            assert (out / name / "design_manifest.json").exists()

    def test_failure_propagates_exit_code(self, tmp_path):
        good = write_config(tmp_path, name="good", vehicles={"count": 2},
                            grid={"s_start": -10.0, "s_end": 10.0, "step_h": 0.1})
        bad = write_config(tmp_path, name="bad",
                           profile={"tau0": 2.6, "tau_odd_end": 1.5})
        out = tmp_path / "sweep"
        code = main(["sweep", "--out", str(out), str(good), str(bad)])
        assert code == 3
        assert (out / "good" / "trace.csv").exists()
