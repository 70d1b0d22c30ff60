"""Acceptance suite: one test per release criterion, each printing a verdict line.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the verdict lines.
"""

import json
import time

import numpy as np
import pytest

import gnopt
from gnopt.atm import AtmState, run_atm, search_L
from gnopt.cli import main as cli_main
from gnopt.taylor import (
    brute_force_tensor_step,
    guaranteed_decrease,
    taylor_model_value,
    tensor_step,
)
from gnopt.trace import read_trace

from helpers import random_convex_poly


def verdict(ok: bool, label: str):
    print(f"\n{'PASS' if ok else 'FAIL'}: {label}")
    assert ok, label


@pytest.fixture(scope="module")
def zoo(quadratic5, logistic_oracle, hard5, hard10, ot_oracle,
        logistic_ref, ot_ref):
    """Problems with valid initial bounds for both wrapper modes."""
    z_log, f_log = logistic_ref
    z_ot, _ = ot_ref
    cases = []
    x0 = np.zeros(5)
    cases.append(("quadratic_n5", quadratic5, 1, x0,
                  quadratic5.value(x0) - quadratic5.min_value,
                  float(np.linalg.norm(x0 - quadratic5.minimizer))))
    x0 = np.zeros(10)
    cases.append(("logistic_d100_n10", logistic_oracle, 3, x0,
                  1.2 * (logistic_oracle.value(x0) - f_log) + 1e-6,
                  1.5 * float(np.linalg.norm(x0 - z_log)) + 0.1))
    for name, oracle in (("hard_family_m5", hard5), ("hard_family_m10", hard10)):
        x0 = np.zeros(oracle.dim)
        cases.append((name, oracle, 3, x0,
                      oracle.value(x0) - oracle.min_value,
                      float(np.linalg.norm(x0 - oracle.minimizer))))
    x0 = np.zeros(20)
    ot_oracle_f0 = ot_oracle.value(x0)
    cases.append(("ot_dual_n10", ot_oracle, 3, x0,
                  1.2 * (ot_oracle_f0 - ot_oracle.value(z_ot)) + 1e-6,
                  1.5 * float(np.linalg.norm(x0 - z_ot)) + 0.1))
    return cases


def test_end_to_end_guarantee(zoo):
    """Both wrappers reach the target gradient norm on every zoo problem."""
    failures = []
    for name, oracle, p, x0, delta0, R in zoo:
        for eps in (1e-3, 1e-5):
            for mode, bound, fn in (
                    ("gap", delta0, gnopt.minimize_gradnorm_from_gap),
                    ("radius", R, gnopt.minimize_gradnorm_from_radius)):
                start = time.monotonic()
                try:
                    z, run = fn(oracle, x0, bound, eps, p=p)
                    ok = run.grad_norm_final <= eps
                except gnopt.GuaranteeViolation:
                    ok = False
                elapsed = time.monotonic() - start
                if not ok or elapsed > 300.0:
                    failures.append((name, mode, eps, elapsed))
    verdict(not failures,
            "end-to-end guarantee |grad f(z)| <= eps on all zoo problems, "
            f"both modes, eps in {{1e-3, 1e-5}}, <= 5 min each{failures or ''}")


def test_rate_bound_on_quadratics():
    """Objective residual bound c M_p |y0-x*|^(p+1) / k^((3p+1)/2), zero tolerance."""
    ok = True
    for p, M_p in ((1, None), (2, 0.7), (3, 0.4)):
        q = gnopt.quadratic_problem(5, seed=0, cond=10.0)
        if p == 1:
            M_p = q.lipschitz(1)
        rng = np.random.default_rng(1)
        y0 = q.minimizer + rng.standard_normal(5)
        R = float(np.linalg.norm(y0 - q.minimizer))
        c = gnopt.theoretical_constant_c(p)
        res = run_atm(q, y0, 200, p, M_p, subproblem_tol=1e-12)
        for rec in res.trace:
            if rec.frozen:
                continue
            bound = c * M_p * R ** (p + 1) / rec.k ** ((3 * p + 1) / 2)
            if rec.f_value - q.min_value > bound:
                ok = False
    verdict(ok, "accelerated-method rate bound holds for k <= 200 at p in {1,2,3}")


def test_per_step_decrease_inequality(zoo):
    """Guaranteed decrease at every Taylor step with weight p * M_p."""
    ok = True
    rng = np.random.default_rng(2)
    for name, oracle, p, x0, _, _ in zoo:
        M_p = oracle.lipschitz(p)
        for _ in range(5):
            x = x0 + 0.5 * rng.standard_normal(oracle.dim)
            res = tensor_step(oracle, x, p, p * M_p, tol=1e-12)
            dec, need = guaranteed_decrease(oracle, x, res.y, p, p * M_p)
            if dec < need - 1e-10 * (1 + abs(oracle.value(x))):
                ok = False
    # the same inequality is asserted inside every accelerated iteration of
    # every other acceptance run (check_invariants is on by default)
    verdict(ok, "per-step decrease inequality holds at every Taylor step with M = p M_p")


def test_acceptance_window_and_weight_recurrence(hard10, quadratic5):
    """Step-scale window and L a^2 = A recurrence at every accepted step."""
    ok = True
    for oracle, p, M_p in ((hard10, 3, hard10.lipschitz(3)),
                           (quadratic5, 1, quadratic5.lipschitz(1))):
        y0 = np.zeros(oracle.dim)
        state = AtmState(k=0, A=0.0, y=y0, u=y0.copy(), L_prev=None)
        for _ in range(50):
            acc = search_L(oracle, state, p, M_p, subproblem_tol=1e-11)
            if not (0.5 - 1e-9 <= acc.sandwich <= 1.0 + 1e-9):
                ok = False
            if abs(acc.L * acc.a**2 - acc.A_next) > 1e-9 * acc.A_next:
                ok = False
            g = oracle.gradient(acc.step.y)
            state.u = state.u - acc.a * g
            state.y, state.A, state.L_prev = acc.step.y, acc.A_next, acc.L
            if np.linalg.norm(g) < 1e-13:
                break
    verdict(ok, "acceptance window and weight recurrence (rel residual <= 1e-9) "
                "hold at every accepted step")


def test_complexity_exponents(hard5):
    """Theoretical-mode sweep slopes within 30% of -0.8 (gap) and -0.2 (radius)."""
    rng = np.random.default_rng(3)
    v = rng.standard_normal(5)
    v /= np.linalg.norm(v)
    x0 = hard5.minimizer + 0.02 * v
    delta0 = hard5.value(x0) - hard5.min_value
    eps_values = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4]
    totals_gap, totals_radius = [], []
    for eps in eps_values:
        _, run = gnopt.minimize_gradnorm_from_gap(
            hard5, x0, delta0, eps, p=3, mode="theoretical")
        totals_gap.append(run.total_inner_iterations)
        _, run = gnopt.minimize_gradnorm_from_radius(
            hard5, x0, 50.0, eps, p=3, mode="theoretical")
        totals_radius.append(run.total_inner_iterations)
    slope_gap = float(np.polyfit(np.log(eps_values), np.log(totals_gap), 1)[0])
    slope_radius = float(np.polyfit(np.log(eps_values), np.log(totals_radius), 1)[0])
    ok = (-0.8 * 1.3 <= slope_gap <= -0.8 * 0.7
          and -0.2 * 1.3 <= slope_radius <= -0.2 * 0.7)
    verdict(ok, f"complexity exponents: gap slope {slope_gap:.3f} (target -0.8), "
                f"radius slope {slope_radius:.3f} (target -0.2), both within 30%")


def test_subproblem_oracle_equivalence():
    """Iterative solver and grid search agree in model value within 1e-4."""
    ok = True
    for p in (1, 2, 3):
        for i in range(20):
            n = 1 + (i % 2)
            oracle = random_convex_poly(n, seed=1000 * p + i)
            rng = np.random.default_rng(500 * p + i)
            x = 0.3 * rng.standard_normal(n)
            M = (3 * oracle.lipschitz(3) + 0.5) if p == 3 else float(2 + rng.random())
            res = tensor_step(oracle, x, p, M, tol=1e-10)
            ref = brute_force_tensor_step(oracle, x, p, M, radius=2.5, grid=25)
            mv = taylor_model_value(oracle, x, res.y, p, M)
            mv_ref = taylor_model_value(oracle, x, ref, p, M)
            if abs(mv - mv_ref) > 1e-4:
                ok = False
    verdict(ok, "subproblem solvers agree with grid search within 1e-4 "
                "on 20 random n <= 2 instances per order")


def test_derivative_validation(zoo):
    """Finite differences confirm analytic derivatives on every zoo problem."""
    ok = True
    rng = np.random.default_rng(4)
    tolerances = {1: 1e-5, 2: 1e-5, 3: 1e-4}
    for name, oracle, p, x0, _, _ in zoo:
        for _ in range(20):
            x = rng.standard_normal(oracle.dim)
            H = oracle.hessian(x)
            if np.max(np.abs(H - H.T)) > 1e-12 * max(1.0, np.max(np.abs(H))):
                ok = False
            report = gnopt.fd_check(oracle, x, order=3, tol=1e-4)
            for entry in report.entries:
                if entry.max_rel_error > tolerances[entry.order]:
                    ok = False
    verdict(ok, "derivative validation passes at 20 random points per zoo problem "
                "(orders 1-3 at 1e-5/1e-5/1e-4)")


def test_ot_consistency(ot_instance, ot_oracle, ot_ref):
    """Dual gradient equals plan marginal residual; certificates close the loop."""
    rng = np.random.default_rng(5)
    A = ot_instance.marginal_operator()
    ok = True
    for _ in range(50):
        lam = rng.standard_normal(20)
        plan = gnopt.primal_plan(lam, ot_instance)
        lhs = ot_oracle.gradient(lam)
        rhs = A @ plan.X.flatten(order="F") - ot_instance.rhs
        if np.max(np.abs(lhs - rhs)) > 1e-10:
            ok = False

    eps = 1e-4
    z_ref, ref_run = ot_ref
    x0 = np.zeros(20)
    R = 1.5 * float(np.linalg.norm(x0 - z_ref)) + 0.1
    z, run = gnopt.minimize_gradnorm_from_radius(ot_oracle, x0, R, eps, p=3)
    cert = gnopt.certificate(z, ot_instance)
    if cert.eps_eq > eps:
        ok = False

    plan = gnopt.primal_plan(z, ot_instance)
    _, entropic = gnopt.transport_cost(plan, ot_instance)
    ref_plan = gnopt.primal_plan(z_ref, ot_instance)
    _, entropic_ref = gnopt.transport_cost(ref_plan, ot_instance)
    ref_cert = gnopt.certificate(z_ref, ot_instance)
    slack = (cert.eps_f + np.linalg.norm(z) * cert.eps_eq
             + ref_cert.eps_f + np.linalg.norm(z_ref) * ref_cert.eps_eq)
    if abs(entropic - entropic_ref) > slack:
        ok = False
    verdict(ok, "transport consistency: marginal-gradient identity (1e-10 at 50 "
                "points), certificate eps_eq <= eps, plan objective within "
                "certificate slack of the 1e-9 reference")


def test_trace_determinism(tmp_path):
    """Same configuration and seed reproduce trace.csv byte for byte."""
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({
        "problem": {"kind": "logistic_synthetic", "d": 60, "n": 8, "seed": 11},
        "solver": {"mode": "gap", "p": 3, "eps": 1e-3, "delta0": 1.0,
                   "variant": "practical"},
        "seed": 5,
    }))
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        code = cli_main(["run", "--config", str(cfg_path), "--out", str(out),
                         "--seed", "5"])
        assert code == 0
        outs.append((out / "trace.csv").read_bytes())
    rows = read_trace(str(tmp_path / "a" / "trace.csv"))
    verdict(outs[0] == outs[1] and len(rows) > 0,
            "identical config and seed reproduce byte-identical trace.csv")
