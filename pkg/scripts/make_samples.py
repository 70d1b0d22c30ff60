"""Regenerate the committed sample CSVs under samples/.

Four practical-mode logistic traces (synthetic stand-ins for the usual
four-dataset figure) and two theoretical-mode sweeps on the order-3
worst-case family (one per wrapper mode).
"""

import json
import os
import shutil
import sys
import tempfile

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from gnopt.cli import main
from gnopt.problems import HardFamilySpec, hard_family_problem

SAMPLES = os.path.join(os.path.dirname(__file__), "..", "samples")

TRACE_DATASETS = {
    "mushroom": {"d": 120, "n": 12, "seed": 1},
    "a9a": {"d": 100, "n": 10, "seed": 2},
    "covertype": {"d": 80, "n": 8, "seed": 3},
    "ijcnn1": {"d": 60, "n": 6, "seed": 4},
}


def run_cli(args):
    code = main(args)
    if code != 0:
        raise SystemExit(f"sample generation failed with exit code {code}: {args}")


def make_traces(tmp):
    for name, params in TRACE_DATASETS.items():
        cfg = {
            "problem": {"kind": "logistic_synthetic", **params},
            "solver": {"mode": "gap", "p": 3, "eps": 1e-5, "delta0": 1.0,
                       "variant": "practical"},
            "seed": params["seed"],
        }
        cfg_path = os.path.join(tmp, f"{name}.json")
        with open(cfg_path, "w") as fh:
            json.dump(cfg, fh)
        out = os.path.join(tmp, name)
        run_cli(["run", "--config", cfg_path, "--out", out])
        shutil.copy(os.path.join(out, "trace.csv"),
                    os.path.join(SAMPLES, f"trace_{name}.csv"))


def make_sweeps(tmp):
    hard = hard_family_problem(HardFamilySpec(p=3, n=5, m=5))
    rng = np.random.default_rng(3)
    v = rng.standard_normal(5)
    v /= np.linalg.norm(v)
    x0 = hard.minimizer + 0.02 * v
    delta0 = float(hard.value(x0) - hard.min_value)
    base = {
        "problem": {"kind": "hard_family", "p": 3, "n": 5, "m": 5},
        "seed": 0,
    }
    for mode, extra in (("gap", {"delta0": delta0}), ("radius", {"R": 50.0})):
        cfg = dict(base)
        cfg["solver"] = {"mode": mode, "p": 3, "eps": 1e-3,
                         "variant": "theoretical", "x0": [float(t) for t in x0],
                         **extra}
        cfg_path = os.path.join(tmp, f"sweep_{mode}.json")
        with open(cfg_path, "w") as fh:
            json.dump(cfg, fh)
        out = os.path.join(tmp, f"sweep_{mode}")
        run_cli(["sweep", "--config", cfg_path, "--out", out,
                 "--eps-list", "1e-2,3e-3,1e-3,3e-4,1e-4"])
        shutil.copy(os.path.join(out, "sweep.csv"),
                    os.path.join(SAMPLES, f"sweep_{mode}.csv"))


if __name__ == "__main__":
    os.makedirs(SAMPLES, exist_ok=True)
    with tempfile.TemporaryDirectory() as tmp:
        make_traces(tmp)
        make_sweeps(tmp)
    print(f"samples written to {SAMPLES}")
