import json

import pytest

from gnopt.cli import main
from gnopt.trace import read_trace


def write_config(path, **overrides):
    cfg = {
        "problem": {"kind": "quadratic", "n": 5, "seed": 0, "cond": 10.0},
        "solver": {"mode": "gap", "p": 1, "eps": 1e-4, "delta0": 30.0,
                   "variant": "practical"},
        "seed": 0,
    }
    for key, val in overrides.items():
        if isinstance(val, dict) and key in cfg:
            cfg[key].update(val)
        else:
            cfg[key] = val
    with open(path, "w") as fh:
        json.dump(cfg, fh)
    return cfg


class TestRun:
    def test_quadratic_smoke(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        out = tmp_path / "out"
        write_config(cfg)
        assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["guarantee_met"] is True
        assert summary["final_grad_norm"] <= 1e-4
        rows = read_trace(str(out / "trace.csv"))
        assert rows, "trace should not be empty"

    def test_row_count_contract(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        out = tmp_path / "out"
        write_config(cfg)
        main(["run", "--config", str(cfg), "--out", str(out)])
        summary = json.loads((out / "summary.json").read_text())
        rows = read_trace(str(out / "trace.csv"))
        expected = summary["total_inner_iterations"] + summary["restarts"] + 1
        assert len(rows) == expected
        iters = [r.global_iter for r in rows]
        assert iters == sorted(iters) and len(set(iters)) == len(iters)

    def test_eps_zero_rejected(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        write_config(cfg, solver={"eps": 0.0})
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2

    def test_missing_dataset_path(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        write_config(cfg, problem={"kind": "logistic_libsvm",
                                   "path": str(tmp_path / "nope.txt")})
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
        assert "nope.txt" in capsys.readouterr().err

    def test_missing_config(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "absent.json"),
                     "--out", str(tmp_path)]) == 2

    def test_gap_requires_delta0(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        conf = write_config(cfg)
        del conf["solver"]["delta0"]
        cfg.write_text(json.dumps(conf))
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2

    def test_guarantee_violation_exits_3(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        write_config(cfg, solver={"delta0": 1e-11, "eps": 1e-5})
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg), "--out", str(out)]) == 3
        summary = json.loads((out / "summary.json").read_text())
        assert summary["guarantee_met"] is False

    def test_ot_run_writes_plan_and_certificate(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        write_config(cfg,
                     problem={"kind": "ot_dual", "n": 5, "gamma": 0.5, "seed": 3},
                     solver={"mode": "radius", "p": 3, "eps": 1e-3, "R": 10.0})
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
        assert (out / "plan.csv").exists()
        summary = json.loads((out / "summary.json").read_text())
        assert summary["transport"]["eps_eq"] <= 1e-3


class TestDeterminism:
    def test_trace_bytes_reproduce(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        write_config(cfg,
                     problem={"kind": "hard_family", "p": 3, "n": 5, "m": 5},
                     solver={"mode": "radius", "p": 3, "eps": 1e-4, "R": 10.0})
        a, b = tmp_path / "a", tmp_path / "b"
        assert main(["run", "--config", str(cfg), "--out", str(a), "--seed", "7"]) == 0
        assert main(["run", "--config", str(cfg), "--out", str(b), "--seed", "7"]) == 0
        assert (a / "trace.csv").read_bytes() == (b / "trace.csv").read_bytes()

    def test_timing_flag_fills_wall_seconds(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        write_config(cfg)
        out = tmp_path / "out"
        main(["run", "--config", str(cfg), "--out", str(out), "--timing"])
        rows = read_trace(str(out / "trace.csv"))
        assert any(r.wall_seconds > 0 for r in rows)


class TestSweep:
    def test_requires_three_eps(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        write_config(cfg)
        assert main(["sweep", "--config", str(cfg), "--out", str(tmp_path / "o"),
                     "--eps-list", "1e-3"]) == 2

    def test_sweep_outputs(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        write_config(cfg,
                     problem={"kind": "hard_family", "p": 3, "n": 5, "m": 5},
                     solver={"mode": "radius", "p": 3, "eps": 1e-3, "R": 10.0,
                             "variant": "theoretical"})
        out = tmp_path / "out"
        assert main(["sweep", "--config", str(cfg), "--out", str(out),
                     "--eps-list", "1e-2,1e-3,1e-4"]) == 0
        summary = json.loads((out / "sweep_summary.json").read_text())
        assert summary["theoretical_exponent"] == pytest.approx(-0.2)
        assert (out / "sweep.csv").exists()
        lines = (out / "sweep.csv").read_text().strip().splitlines()
        assert len(lines) == 4  # header + three tolerances

    def test_gap_exponent_reported(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        write_config(cfg,
                     problem={"kind": "hard_family", "p": 3, "n": 5, "m": 5},
                     solver={"mode": "gap", "p": 3, "eps": 1e-3, "delta0": 4.0,
                             "variant": "theoretical"})
        out = tmp_path / "out"
        assert main(["sweep", "--config", str(cfg), "--out", str(out),
                     "--eps-list", "1e-2,3e-3,1e-3"]) == 0
        summary = json.loads((out / "sweep_summary.json").read_text())
        assert summary["theoretical_exponent"] == pytest.approx(-0.8)


class TestModeOverride:
    def test_override_validates_matching_bound(self, tmp_path):
        # overriding to radius mode must demand R, not silently reuse delta0
        cfg = tmp_path / "cfg.json"
        write_config(cfg)  # gap config with delta0 only
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"),
                     "--mode", "radius"]) == 2

    def test_override_with_bound_present(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        write_config(cfg, solver={"R": 30.0})
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg), "--out", str(out),
                     "--mode", "radius"]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["mode"] == "radius"


class TestOtCsvAndEstimate:
    def _write_instance(self, tmp_path):
        import numpy as np
        import gnopt
        inst = gnopt.random_transport_instance(5, 0.5, seed=3)
        cost = tmp_path / "cost.csv"
        with open(cost, "w") as fh:
            fh.write(",".join(f"c{j}" for j in range(5)) + "\n")
            for row in inst.cost:
                fh.write(",".join(repr(float(v)) for v in row) + "\n")
        for name, h in (("source", inst.source), ("target", inst.target)):
            with open(tmp_path / f"{name}.csv", "w") as fh:
                fh.write("w\n")
                fh.writelines(repr(float(v)) + "\n" for v in h)
        return inst

    def test_ot_dual_csv_run(self, tmp_path):
        self._write_instance(tmp_path)
        cfg = tmp_path / "cfg.json"
        write_config(cfg,
                     problem={"kind": "ot_dual_csv", "gamma": 0.5,
                              "cost": str(tmp_path / "cost.csv"),
                              "source": str(tmp_path / "source.csv"),
                              "target": str(tmp_path / "target.csv")},
                     solver={"mode": "radius", "p": 3, "eps": 1e-3, "R": 10.0})
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["transport"]["eps_eq"] <= 1e-3

    def test_missing_histogram_file(self, tmp_path):
        self._write_instance(tmp_path)
        cfg = tmp_path / "cfg.json"
        write_config(cfg,
                     problem={"kind": "ot_dual_csv", "gamma": 0.5,
                              "cost": str(tmp_path / "cost.csv"),
                              "source": str(tmp_path / "absent.csv"),
                              "target": str(tmp_path / "target.csv")},
                     solver={"mode": "radius", "p": 3, "eps": 1e-3, "R": 10.0})
        assert main(["run", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2

    # sampled estimates may undershoot the certified constant, which the
    # solver flags with the nonconvexity advisory
    @pytest.mark.filterwarnings("ignore::UserWarning")
    def test_estimated_constant_run(self, tmp_path, capsys):
        cfg = tmp_path / "cfg.json"
        write_config(cfg,
                     problem={"kind": "hard_family", "p": 3, "n": 4, "m": 4},
                     solver={"mode": "radius", "p": 3, "eps": 1e-3, "R": 15.0,
                             "estimate_Mp": True})
        out = tmp_path / "out"
        assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
        assert "heuristic" in capsys.readouterr().err


class TestValidate:
    def test_logistic_passes(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        write_config(cfg, problem={"kind": "logistic_synthetic", "d": 50, "n": 8,
                                   "seed": 1})
        assert main(["validate", "--config", str(cfg)]) == 0

    def test_hard_family_p2_passes_away_from_kinks(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        write_config(cfg, problem={"kind": "hard_family", "p": 2, "n": 5, "m": 5})
        assert main(["validate", "--config", str(cfg)]) == 0

    def test_corrupted_dataset_exits_2(self, tmp_path):
        bad = tmp_path / "bad.txt"
        bad.write_text("1 not-a-pair\n")
        cfg = tmp_path / "cfg.json"
        write_config(cfg, problem={"kind": "logistic_libsvm", "path": str(bad)})
        assert main(["validate", "--config", str(cfg)]) == 2

    def test_quadratic_and_transport_pass(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        write_config(cfg)
        assert main(["validate", "--config", str(cfg)]) == 0
        write_config(cfg, problem={"kind": "ot_dual", "n": 5, "gamma": 0.5,
                                   "seed": 1})
        assert main(["validate", "--config", str(cfg)]) == 0
