"""Restart wrappers that turn the accelerated method into a gradient-norm solver.

Both wrappers add a small strong-convexity term (mu/2) ||x - x0||^2 around the
start point, halve a residual bound per stage with a precomputed iteration
schedule, and finish with a single regularized Taylor step.  The gap wrapper
needs an upper bound delta0 on the initial objective residual; the radius
wrapper needs a bound R on the distance from x0 to a minimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .atm import AtmResult, run_atm
from .errors import GuaranteeViolation, ScheduleError
from .oracles import Oracle, make_regularized, Vector
from .taylor import TensorStepResult, guaranteed_decrease, tensor_step


def theoretical_constant_c(p: int) -> float:
    """Rate constant of the accelerated method: 2^((3(p+1)^2+4)/4) (p+1) / p!."""
    if p not in (1, 2, 3):
        raise ValueError(f"order p must be 1, 2 or 3, got {p}")
    return 2.0 ** ((3 * (p + 1) ** 2 + 4) / 4) * (p + 1) / math.factorial(p)


def _checked_power(base: float, exponent: float, context: str) -> float:
    try:
        out = base**exponent
    except OverflowError as exc:
        raise ScheduleError(f"{context}: {base} ** {exponent} overflows") from exc
    if not math.isfinite(out):
        raise ScheduleError(f"{context}: {base} ** {exponent} = {out}")
    return out


def schedule_Nk_gap(k: int, delta0: float, mu: float, M_p: float, p: int) -> int:
    """Inner-iteration budget for stage k of the gap wrapper."""
    if k < 0:
        raise ValueError("stage index must be >= 0")
    if min(delta0, mu, M_p) <= 0:
        raise ValueError("delta0, mu and M_p must be positive")
    c = theoretical_constant_c(p)
    delta_k = delta0 * 2.0 ** (-k)
    denom = _checked_power(mu, (p + 1) / 2, "gap schedule")
    if denom == 0.0:
        raise ScheduleError(f"gap schedule: mu ** {(p + 1) / 2} underflows for mu={mu}")
    inner = (2.0 * c * M_p * 2.0 ** ((p + 1) / 2)
             * _checked_power(delta_k, (p - 1) / 2, "gap schedule") / denom)
    if not math.isfinite(inner):
        raise ScheduleError(
            f"gap schedule overflow: c={c}, M_p={M_p}, delta_k={delta_k}, mu={mu}")
    return max(math.ceil(_checked_power(inner, 2.0 / (3 * p + 1), "gap schedule")), 1)


def schedule_Nk_radius(k: int, R: float, mu: float, M_p: float, p: int) -> int:
    """Inner-iteration budget for stage k of the radius wrapper."""
    if k < 0:
        raise ValueError("stage index must be >= 0")
    if min(R, mu, M_p) <= 0:
        raise ValueError("R, mu and M_p must be positive")
    c = theoretical_constant_c(p)
    R_k = R * 2.0 ** (-k)
    inner = 8.0 * c * M_p * _checked_power(R_k, p - 1, "radius schedule") / mu
    if not math.isfinite(inner):
        raise ScheduleError(
            f"radius schedule overflow: c={c}, M_p={M_p}, R_k={R_k}, mu={mu}")
    return max(math.ceil(_checked_power(inner, 2.0 / (3 * p + 1), "radius schedule")), 1)


def inner_threshold(eps: float, M_mu: float, p: int) -> float:
    """Residual level at which a single Taylor step finishes the job.

    Chosen so that the guaranteed per-step decrease bound turns a residual
    below this level into a gradient norm of at most eps/2 after the
    terminal step:  threshold = (eps/2)^((p+1)/p) / (8 (p+1)! M_mu^(1/p)).
    """
    return (eps / 2.0) ** ((p + 1) / p) / (8.0 * M_mu ** (1.0 / p) * math.factorial(p + 1))


def inner_threshold_inverted(eps: float, M_mu: float, p: int) -> float:
    """Same threshold with the inverted exponent p/(p+1).

    Logged for comparison only: it exits the stage loop too early for the
    terminal-step argument to close, so the wrappers do not use it.
    """
    return (eps / 2.0) ** (p / (p + 1)) / (8.0 * M_mu ** (1.0 / p) * math.factorial(p + 1))


def theoretical_bound_gap(p, M_p, delta0, mu, restarts) -> float:
    """Closed-form upper bound on the total inner iterations of the gap wrapper."""
    c = theoretical_constant_c(p)
    total = 0.0
    for k in range(restarts):
        delta_k = delta0 * 2.0 ** (-k)
        inner = 2.0 * c * M_p * 2.0 ** ((p + 1) / 2) * delta_k ** ((p - 1) / 2) / mu ** ((p + 1) / 2)
        total += inner ** (2.0 / (3 * p + 1)) + 1.0
    return total


def theoretical_bound_radius(p, M_p, R, mu, restarts) -> float:
    """Closed-form upper bound on the total inner iterations of the radius wrapper."""
    c = theoretical_constant_c(p)
    total = 0.0
    for k in range(restarts):
        R_k = R * 2.0 ** (-k)
        total += (8.0 * c * M_p * R_k ** (p - 1) / mu) ** (2.0 / (3 * p + 1)) + 1.0
    return total


@dataclass
class RestartRun:
    """Diagnostics of one wrapper run."""

    mode: str
    p: int
    eps: float
    mu: float
    eps_tilde: float
    eps_tilde_alt: float               # inverted-exponent variant, diagnostic only
    bound0: float                      # delta0 (gap) or R (radius)
    M_p: float                         # constant of the regularized objective
    M_mu: float                        # Taylor-step weight p * M_p
    restarts: int = 0
    schedule: list[int] = field(default_factory=list)
    executed: list[int] = field(default_factory=list)
    total_inner_iterations: int = 0
    tensor_trials_total: int = 0
    stage_results: list[AtmResult] = field(default_factory=list)
    terminal: TensorStepResult | None = None
    z_final: Vector | None = None
    grad_norm_final: float = float("nan")
    grad_norm_reg_final: float = float("nan")
    mu_shift_term: float = float("nan")
    theoretical_bound: float = float("nan")
    guarantee_met: bool = False


def _resolve_constants(oracle: Oracle, p: int, M_p: float | None, mu: float):
    if M_p is None:
        M_p = oracle.lipschitz(p)
    if M_p is None or M_p <= 0:
        raise ValueError(
            f"a positive order-{p} smoothness constant must be supplied "
            "(the oracle does not declare one)")
    # the quadratic term shifts the first-order constant of the regularized view
    M_reg = M_p + mu if p == 1 else M_p
    return M_reg, p * M_reg


def _finish(oracle, reg, run, z, p, subproblem_tol, x0, mu, eps):
    # resolve the terminal model below the gradient scale at z, otherwise the
    # step can degenerate to a no-op whose guaranteed decrease is vacuous
    gn_z = float(np.linalg.norm(reg.gradient(z)))
    tol_term = min(subproblem_tol, max(1e-13, 1e-3 * gn_z))
    run.terminal = tensor_step(reg, z, p, run.M_mu, tol=tol_term)
    z_t = run.terminal.y
    grad_f = np.asarray(oracle.gradient(z_t), dtype=float)
    run.z_final = z_t
    run.grad_norm_final = float(np.linalg.norm(grad_f))
    run.grad_norm_reg_final = float(np.linalg.norm(grad_f + mu * (z_t - x0)))
    run.mu_shift_term = mu * float(np.linalg.norm(z_t - x0))
    run.guarantee_met = run.grad_norm_final <= eps
    dec, need = guaranteed_decrease(reg, z, z_t, p, run.M_mu)
    if dec < need - 1e-10 * (1.0 + abs(run.terminal.model_value)):
        raise GuaranteeViolation(
            f"terminal step decrease {dec:.3e} below the required {need:.3e}", run=run)
    if not run.guarantee_met:
        raise GuaranteeViolation(
            f"returned gradient norm {run.grad_norm_final:.3e} exceeds target {eps:.3e} "
            f"(regularized part {run.grad_norm_reg_final:.3e}, "
            f"shift part {run.mu_shift_term:.3e}); "
            "check the initial bound and the smoothness constant", run=run)
    return z_t, run


def _run_stages(oracle, x0, eps, p, M_p, mode, bound0, loop_active, schedule_fn,
                practical, stagnation_window, restart_cap, stop_grad_factor,
                subproblem_tol, keep_traces, on_restart, on_iteration,
                check_invariants):
    if eps <= 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    if bound0 <= 0:
        raise ValueError(f"the initial bound must be > 0, got {bound0}")
    x0 = np.asarray(x0, dtype=float)
    mu = eps**2 / (32.0 * bound0) if mode == "gap" else eps / (4.0 * bound0)
    M_reg, M_mu = _resolve_constants(oracle, p, M_p, mu)
    eps_tilde = inner_threshold(eps, M_mu, p)
    tol = subproblem_tol if subproblem_tol is not None else max(1e-10, 1e-3 * eps)

    run = RestartRun(mode=mode, p=p, eps=eps, mu=mu, eps_tilde=eps_tilde,
                     eps_tilde_alt=inner_threshold_inverted(eps, M_mu, p),
                     bound0=bound0, M_p=M_reg, M_mu=M_mu)
    reg = make_regularized(oracle, x0, mu)

    # the number of stages is known in advance: the bound halves every stage
    restarts = 0
    while loop_active(restarts, mu, bound0, eps_tilde):
        restarts += 1
    run.restarts = restarts
    run.schedule = [schedule_fn(k, bound0, mu, M_reg, p) for k in range(restarts)]
    bound_fn = theoretical_bound_gap if mode == "gap" else theoretical_bound_radius
    run.theoretical_bound = bound_fn(p, M_reg, bound0, mu, restarts)

    z = x0.copy()
    for k in range(restarts):
        if on_restart is not None:
            on_restart(k, z)
        N_k = run.schedule[k]
        budget = min(N_k, restart_cap) if practical else N_k
        cb = None
        if on_iteration is not None:
            cb = (lambda rec, y, g, _k=k: on_iteration(_k, rec, y, g))
        result = run_atm(
            reg, z, budget, p, M_reg,
            stop_grad=eps * stop_grad_factor if practical else None,
            stop_window=stagnation_window if practical else None,
            subproblem_tol=tol,
            keep_trace=keep_traces,
            on_iteration=cb,
            check_invariants=check_invariants,
        )
        z = result.y
        run.executed.append(result.iterations_run)
        run.total_inner_iterations += result.iterations_run
        run.tensor_trials_total += result.tensor_trials_total
        run.stage_results.append(result)
    assert not loop_active(restarts, mu, bound0, eps_tilde)

    return _finish(oracle, reg, run, z, p, tol, x0, mu, eps)


def minimize_gradnorm_from_gap(
    oracle: Oracle,
    x0: Vector,
    delta0: float,
    eps: float,
    p: int,
    M_p: float | None = None,
    mode: str = "practical",
    stagnation_window: int = 500,
    restart_cap: int = 500,
    stop_grad_factor: float = 0.125,
    subproblem_tol: float | None = None,
    keep_traces: bool = True,
    on_restart=None,
    on_iteration=None,
    check_invariants: bool = True,
) -> tuple[Vector, RestartRun]:
    """Drive the gradient norm below eps given f(x0) - f* <= delta0.

    The caller is responsible for delta0 actually bounding the initial
    residual; a violated guarantee at the end raises GuaranteeViolation.
    ``mode="theoretical"`` runs every stage for its full scheduled budget,
    ``mode="practical"`` caps stages at ``restart_cap`` iterations and adds
    gradient-based early exits.
    """
    if mode not in ("practical", "theoretical"):
        raise ValueError(f"mode must be 'practical' or 'theoretical', got {mode!r}")
    return _run_stages(
        oracle, x0, eps, p, M_p, "gap", delta0,
        lambda k, mu, d0, et: d0 * 2.0 ** (-k) >= et,
        lambda k, d0, mu, M, pp: schedule_Nk_gap(k, d0, mu, M, pp),
        mode == "practical", stagnation_window, restart_cap, stop_grad_factor,
        subproblem_tol, keep_traces, on_restart, on_iteration, check_invariants)


def minimize_gradnorm_from_radius(
    oracle: Oracle,
    x0: Vector,
    R: float,
    eps: float,
    p: int,
    M_p: float | None = None,
    mode: str = "practical",
    stagnation_window: int = 500,
    restart_cap: int = 500,
    stop_grad_factor: float = 0.125,
    subproblem_tol: float | None = None,
    keep_traces: bool = True,
    on_restart=None,
    on_iteration=None,
    check_invariants: bool = True,
) -> tuple[Vector, RestartRun]:
    """Drive the gradient norm below eps given ||x0 - x*|| <= R."""
    if mode not in ("practical", "theoretical"):
        raise ValueError(f"mode must be 'practical' or 'theoretical', got {mode!r}")
    return _run_stages(
        oracle, x0, eps, p, M_p, "radius", R,
        lambda k, mu, R0, et: mu * (R0 * 2.0 ** (-k)) ** 2 / 2.0 >= et,
        lambda k, R0, mu, M, pp: schedule_Nk_radius(k, R0, mu, M, pp),
        mode == "practical", stagnation_window, restart_cap, stop_grad_factor,
        subproblem_tol, keep_traces, on_restart, on_iteration, check_invariants)
