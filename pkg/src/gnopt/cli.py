"""Benchmark command line: configure a problem and solver, run, trace, summarize.

Subcommands:
    run       one solver run; writes trace.csv and summary.json
    sweep     one run per tolerance; writes sweep.csv and sweep_summary.json
    validate  finite-difference derivative check over sampled points

Exit codes: 0 success, 2 configuration/input error, 3 solver guarantee or
validation failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from . import problems, transport
from .errors import GuaranteeViolation, ScheduleError
from .oracles import estimate_lipschitz, fd_check
from .restarts import minimize_gradnorm_from_gap, minimize_gradnorm_from_radius
from .trace import TraceRow, write_sweep, write_trace


class ConfigError(Exception):
    pass


def _require(cfg: dict, field: str, kind=None):
    if field not in cfg:
        raise ConfigError(f"missing required field '{field}'")
    val = cfg[field]
    if kind is not None and not isinstance(val, kind):
        raise ConfigError(f"field '{field}' has wrong type {type(val).__name__}")
    return val


def load_config(path: str) -> dict:
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "r") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc


def build_problem(cfg: dict, seed: int):
    """Construct the oracle described by the problem section.

    Returns (oracle, info) where info carries the problem kind and, for
    transport problems, the instance needed for primal recovery.
    """
    kind = _require(cfg, "kind", str)
    info = {"kind": kind}
    if kind == "quadratic":
        oracle = problems.quadratic_problem(
            n=int(cfg.get("n", 5)), seed=int(cfg.get("seed", seed)),
            cond=float(cfg.get("cond", 10.0)))
    elif kind == "logistic_synthetic":
        data = problems.synthetic_logistic(
            d=int(cfg.get("d", 100)), n=int(cfg.get("n", 10)),
            seed=int(cfg.get("seed", seed)))
        oracle = problems.logistic_problem(data)
    elif kind == "logistic_libsvm":
        path = _require(cfg, "path", str)
        if not os.path.exists(path):
            raise ConfigError(f"dataset file not found: {path}")
        try:
            data = problems.load_libsvm(
                path,
                n_features=cfg.get("n_features"),
                normalize_rows=bool(cfg.get("normalize", False)),
                max_rows=cfg.get("max_rows"),
                subsample_seed=int(cfg.get("subsample_seed", 0)))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        oracle = problems.logistic_problem(data)
    elif kind == "hard_family":
        try:
            spec = problems.HardFamilySpec(
                p=int(_require(cfg, "p")), n=int(_require(cfg, "n")),
                m=int(cfg.get("m", cfg.get("n"))))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        oracle = problems.hard_family_problem(spec)
    elif kind in ("ot_dual", "ot_dual_csv"):
        try:
            if kind == "ot_dual":
                instance = transport.random_transport_instance(
                    n=int(cfg.get("n", 10)), gamma=float(_require(cfg, "gamma")),
                    seed=int(cfg.get("seed", seed)))
            else:
                for f in ("cost", "source", "target"):
                    if not os.path.exists(_require(cfg, f, str)):
                        raise ConfigError(f"file not found: {cfg[f]}")
                instance = transport.TransportInstance(
                    cost=transport.cost_from_csv(cfg["cost"]),
                    source=transport.histogram_from_csv(cfg["source"]),
                    target=transport.histogram_from_csv(cfg["target"]),
                    gamma=float(_require(cfg, "gamma")))
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        info["instance"] = instance
        oracle = transport.ot_dual_problem(instance)
    else:
        raise ConfigError(f"unknown problem kind '{kind}'")
    return oracle, info


def _solver_params(cfg: dict, oracle):
    mode = _require(cfg, "mode", str)
    if mode not in ("gap", "radius"):
        raise ConfigError(f"field 'mode' must be 'gap' or 'radius', got '{mode}'")
    eps = float(_require(cfg, "eps"))
    if eps <= 0:
        raise ConfigError(f"field 'eps' must be > 0, got {eps}")
    p = int(_require(cfg, "p"))
    if p not in (1, 2, 3):
        raise ConfigError(f"field 'p' must be 1, 2 or 3, got {p}")
    variant = cfg.get("variant", "practical")
    if variant not in ("practical", "theoretical"):
        raise ConfigError(f"field 'variant' must be 'practical' or 'theoretical'")

    M_p = cfg.get("M_p")
    if M_p is None and cfg.get("estimate_Mp", False):
        M_p = 3.0 * estimate_lipschitz(oracle, p, seed=int(cfg.get("estimate_seed", 0)))
        print(f"heuristic M_{p} estimate: {M_p:.6g} (sampled, not certified)",
              file=sys.stderr)
    if M_p is None:
        M_p = oracle.lipschitz(p)
    if M_p is None or M_p <= 0:
        raise ConfigError(
            f"field 'M_p': no positive order-{p} constant available; "
            "set 'M_p' or 'estimate_Mp'")

    if mode == "gap":
        bound = cfg.get("delta0")
        if bound is None:
            raise ConfigError("field 'delta0' is required in gap mode "
                              "(an explicit initial-residual bound)")
    else:
        bound = cfg.get("R")
        if bound is None:
            raise ConfigError("field 'R' is required in radius mode")
    bound = float(bound)
    if bound <= 0:
        raise ConfigError(f"the initial bound must be > 0, got {bound}")
    return mode, eps, p, float(M_p), bound, variant


def _run_solver(oracle, cfg_solver, mode, eps, p, M_p, bound, variant, timing):
    x0 = cfg_solver.get("x0")
    x0 = np.zeros(oracle.dim) if x0 is None else np.asarray(x0, dtype=float)
    if x0.shape != (oracle.dim,):
        raise ConfigError(f"field 'x0' must have length {oracle.dim}")

    rows: list[TraceRow] = []
    trials_holder = [0]
    t0 = time.monotonic()
    mu_holder = [0.0]

    def now():
        return time.monotonic() - t0 if timing else 0.0

    def base_parts(y, grad_reg, f_reg):
        shift = y - x0
        mu = mu_holder[0]
        f_base = f_reg - 0.5 * mu * float(shift @ shift)
        g_base = grad_reg - mu * shift
        return f_base, float(np.linalg.norm(g_base))

    def on_restart(k, z):
        reg = regs[0]
        f_reg = reg.value(z)
        g_reg = np.asarray(reg.gradient(z), dtype=float)
        f_base, gn_base = base_parts(z, g_reg, f_reg)
        rows.append(TraceRow(k, len(rows), 0, rows[-1].L if rows else 0.0,
                             f_base, gn_base, float(np.linalg.norm(g_reg)),
                             trials_holder[0], now()))

    def on_iteration(k, rec, y, grad_reg):
        trials_holder[0] += rec.tensor_trials
        f_base, gn_base = base_parts(y, grad_reg, rec.f_value)
        rows.append(TraceRow(k, len(rows), rec.k, rec.L, f_base, gn_base,
                             rec.grad_norm, trials_holder[0], now()))

    regs = [None]

    kwargs = dict(
        mode=variant,
        stagnation_window=int(cfg_solver.get("stagnation_window", 500)),
        restart_cap=int(cfg_solver.get("restart_cap", 500)),
        keep_traces=False,
        on_restart=on_restart,
        on_iteration=on_iteration,
    )

    solver = minimize_gradnorm_from_gap if mode == "gap" else minimize_gradnorm_from_radius
    mu_holder[0] = eps**2 / (32.0 * bound) if mode == "gap" else eps / (4.0 * bound)

    from .oracles import make_regularized
    regs[0] = make_regularized(oracle, x0, mu_holder[0])

    violation = None
    try:
        z, run = solver(oracle, x0, bound, eps, p, M_p=M_p, **kwargs)
    except GuaranteeViolation as exc:
        violation = exc
        run = exc.run
        z = run.z_final

    # terminal row
    g_final = np.asarray(oracle.gradient(z), dtype=float)
    f_final = float(oracle.value(z))
    rows.append(TraceRow(run.restarts, len(rows), 0,
                         rows[-1].L if rows else 0.0, f_final,
                         float(np.linalg.norm(g_final)), run.grad_norm_reg_final,
                         trials_holder[0], now()))
    return z, run, rows, violation, time.monotonic() - t0


def _summary(run, cfg, wall):
    return {
        "mode": run.mode,
        "p": run.p,
        "eps": run.eps,
        "mu": run.mu,
        "eps_tilde": run.eps_tilde,
        "eps_tilde_alt": run.eps_tilde_alt,
        "M_p": run.M_p,
        "final_grad_norm": run.grad_norm_final,
        "final_grad_norm_regularized": run.grad_norm_reg_final,
        "mu_shift_term": run.mu_shift_term,
        "guarantee_met": run.guarantee_met,
        "restarts": run.restarts,
        "schedule": run.schedule,
        "executed": run.executed,
        "total_inner_iterations": run.total_inner_iterations,
        "theoretical_bound": run.theoretical_bound,
        "wall_seconds": wall,
        "problem": cfg.get("problem", {}),
    }


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    seed = int(args.seed if args.seed is not None else cfg.get("seed", 0))
    oracle, info = build_problem(_require(cfg, "problem", dict), seed)
    solver_cfg = dict(_require(cfg, "solver", dict))
    if args.mode:
        solver_cfg["mode"] = args.mode
    mode, eps, p, M_p, bound, variant = _solver_params(solver_cfg, oracle)

    outdir = args.out or cfg.get("out", "out")
    os.makedirs(outdir, exist_ok=True)

    timing = bool(cfg.get("timing", False)) or args.timing
    z, run, rows, violation, wall = _run_solver(
        oracle, solver_cfg, mode, eps, p, M_p, bound, variant, timing)

    write_trace(os.path.join(outdir, "trace.csv"), rows)
    summary = _summary(run, cfg, wall)
    if "instance" in info:
        plan = transport.primal_plan(z, info["instance"])
        cert = transport.certificate(z, info["instance"])
        linear, entropic = transport.transport_cost(plan, info["instance"])
        transport.save_plan_csv(plan, os.path.join(outdir, "plan.csv"))
        summary["transport"] = {
            "eps_f": cert.eps_f, "eps_eq": cert.eps_eq,
            "eps_f_raw": cert.eps_f_raw, "dual_value": cert.dual_value,
            "linear_cost": linear, "entropic_objective": entropic,
        }
    with open(os.path.join(outdir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2)
        fh.write("\n")

    if violation is not None:
        print(f"guarantee violated: {violation}", file=sys.stderr)
        return 3
    print(f"ok: final gradient norm {run.grad_norm_final:.3e} <= {eps:.3e} "
          f"({run.total_inner_iterations} inner iterations, "
          f"{run.restarts} restarts)")
    return 0


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    if not args.eps_list:
        raise ConfigError("--eps-list is required for sweep")
    try:
        eps_values = [float(tok) for tok in args.eps_list.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"--eps-list: {exc}") from exc
    if len(eps_values) < 3:
        raise ConfigError(f"--eps-list needs at least 3 values, got {len(eps_values)}")

    seed = int(args.seed if args.seed is not None else cfg.get("seed", 0))
    outdir = args.out or cfg.get("out", "out")
    os.makedirs(outdir, exist_ok=True)

    sweep_rows = []
    status = 0
    for i, eps in enumerate(eps_values):
        sub = dict(cfg)
        sub["solver"] = dict(cfg["solver"])
        sub["solver"]["eps"] = eps
        if args.mode:
            sub["solver"]["mode"] = args.mode
        oracle, info = build_problem(_require(sub, "problem", dict), seed)
        solver_cfg = sub["solver"]
        mode, eps, p, M_p, bound, variant = _solver_params(solver_cfg, oracle)
        subdir = os.path.join(outdir, f"eps_{i}")
        os.makedirs(subdir, exist_ok=True)
        timing = bool(cfg.get("timing", False)) or args.timing
        z, run, rows, violation, wall = _run_solver(
            oracle, solver_cfg, mode, eps, p, M_p, bound, variant, timing)
        write_trace(os.path.join(subdir, "trace.csv"), rows)
        with open(os.path.join(subdir, "summary.json"), "w") as fh:
            json.dump(_summary(run, sub, wall), fh, indent=2)
            fh.write("\n")
        if violation is not None:
            status = 3
        sweep_rows.append({
            "eps": eps, "mode": mode, "p": p,
            "total_inner_iterations": run.total_inner_iterations,
            "restarts": run.restarts,
            "final_grad_norm": run.grad_norm_final,
            "guarantee_met": run.guarantee_met,
        })

    write_sweep(os.path.join(outdir, "sweep.csv"), sweep_rows)
    logs = np.log([r["eps"] for r in sweep_rows])
    logt = np.log([max(r["total_inner_iterations"], 1) for r in sweep_rows])
    slope = float(np.polyfit(logs, logt, 1)[0])
    p = sweep_rows[0]["p"]
    theo = -2.0 * (p + 1) / (3 * p + 1) if sweep_rows[0]["mode"] == "gap" \
        else -2.0 / (3 * p + 1)
    with open(os.path.join(outdir, "sweep_summary.json"), "w") as fh:
        json.dump({
            "eps_values": eps_values,
            "fitted_slope": slope,
            "theoretical_exponent": theo,
            "mode": sweep_rows[0]["mode"],
            "p": p,
        }, fh, indent=2)
        fh.write("\n")
    print(f"sweep: fitted slope {slope:.4f}, theoretical exponent {theo:.4f}")
    return status


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    seed = int(args.seed if args.seed is not None else cfg.get("seed", 0))
    problem_cfg = _require(cfg, "problem", dict)
    try:
        oracle, info = build_problem(problem_cfg, seed)
    except ConfigError:
        raise
    rng = np.random.default_rng(seed)
    n_points = int(cfg.get("validate_points", 20))
    hard_p2 = problem_cfg.get("kind") == "hard_family" and int(problem_cfg.get("p", 0)) == 2

    failures = 0
    for i in range(n_points):
        x = rng.standard_normal(oracle.dim)
        if hard_p2:
            # the third derivative of the cubic power jumps at zero crossings
            from .problems import chain_matrix
            A = chain_matrix(oracle.dim, oracle.spec.m)
            for _ in range(100):
                if np.min(np.abs(A @ x)) > 0.1:
                    break
                x = rng.standard_normal(oracle.dim)
        report = fd_check(oracle, x, order=oracle.order_supported, tol=1e-4)
        ok = all(e.max_rel_error <= (1e-5 if e.order < 3 else 1e-4)
                 for e in report.entries)
        if not ok:
            failures += 1
            print(f"point {i}: FAIL\n{report}")
    if failures:
        print(f"validation failed at {failures}/{n_points} points")
        return 3
    print(f"validation passed at {n_points} points (orders 1..{oracle.order_supported})")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="gnopt",
        description="benchmark driver for gradient-norm minimization with "
                    "high-order methods")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in (("run", cmd_run), ("sweep", cmd_sweep), ("validate", cmd_validate)):
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON configuration file")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--seed", default=None, help="seed override")
        sp.add_argument("--mode", default=None, choices=("gap", "radius"),
                        help="wrapper mode override")
        sp.add_argument("--timing", action="store_true",
                        help="record wall-clock times in traces (breaks "
                             "byte-for-byte reproducibility)")
        if name == "sweep":
            sp.add_argument("--eps-list", default=None,
                            help="comma-separated tolerance list (>= 3 values)")
        sp.set_defaults(fn=fn)
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except ScheduleError as exc:
        print(f"schedule error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
