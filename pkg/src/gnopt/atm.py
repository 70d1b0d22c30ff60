"""Accelerated tensor method with an adaptive per-iteration scale L_k.

Each iteration extrapolates between the primal iterate y and a dual point u,
takes an order-p regularized Taylor step on a quadratically regularized view
around the extrapolation point, and accepts the scale L_k only when the
normalized displacement

    s(L) = 2 (p+1) M_p ||y_new - x||^(p-1) / (p! L)

lands in [1/2, 1].  The acceptance window ties the estimating-sequence
weights to the actual step length, which is what gives the k^(-(3p+1)/2)
rate on the objective residual.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EvaluationError, LineSearchError
from .oracles import Oracle, RegularizedOracle, Vector
from .taylor import TensorStepResult, guaranteed_decrease, tensor_step

_EPS = np.finfo(float).eps


@dataclass
class IterationRecord:
    """Per-iteration trace entry."""

    k: int
    L: float
    A: float
    f_value: float
    grad_norm: float
    step_norm: float
    subproblem_iterations: int
    tensor_trials: int
    oracle_calls_cum: int
    frozen: bool = False


@dataclass
class AtmState:
    """Mutable solver state: weights A_k, iterate y, dual point u."""

    k: int
    A: float
    y: Vector
    u: Vector
    L_prev: float | None
    trace: list[IterationRecord] = field(default_factory=list)


@dataclass
class AcceptedStep:
    L: float
    a: float
    A_next: float
    x: Vector
    step: TensorStepResult
    sandwich: float
    trials: int
    min_displacement: float
    trial_inner_total: int = 0


@dataclass
class AtmResult:
    y: Vector
    u: Vector
    A: float
    L_last: float | None
    iterations_run: int
    stop_reason: str
    trace: list[IterationRecord]
    tensor_trials_total: int
    oracle_calls_total: int


def _sandwich(p: float, M_p: float, displacement: float, L: float) -> float:
    return 2.0 * (p + 1) * M_p * displacement ** (p - 1) / (math.factorial(p) * L)


def search_L(
    oracle: Oracle,
    state: AtmState,
    p: int,
    M_p: float,
    subproblem_tol: float = 1e-10,
    L_init: float | None = None,
    max_adjust: int = 60,
) -> AcceptedStep:
    """Find L_k whose regularized Taylor step satisfies the acceptance window.

    The extrapolation point depends on L through the weight a_{k+1}, so every
    trial recomputes (a, A, x) before taking the tensor step.  The search
    warm-starts from the last accepted L, walks geometrically toward the
    window, and falls back to log-space bisection once the window is
    bracketed.  Raises LineSearchError after ``max_adjust`` trials.
    """
    if M_p <= 0:
        raise ValueError(f"M_p must be > 0, got {M_p}")
    L = state.L_prev if state.L_prev is not None else L_init
    if L is None:
        L = 2.0 * (p + 1) * M_p / math.factorial(p)

    def attempt(L):
        a = (1.0 / L + math.sqrt(1.0 / L**2 + 4.0 * state.A / L)) / 2.0
        A_next = state.A + a
        x = (state.A / A_next) * state.y + (a / A_next) * state.u
        # the regularized view and its base share value and gradient at the
        # view's center, so the order-1 model is the same for both
        target = oracle if p == 1 else RegularizedOracle(oracle, x, L)
        step = tensor_step(target, x, p, p * M_p, tol=subproblem_tol)
        d = float(np.linalg.norm(step.y - x))
        return AcceptedStep(L, a, A_next, x, step, _sandwich(p, M_p, d, L), 0, d)

    trials = []
    lo = hi = None  # bracket in L: s(lo) > 1, s(hi) < 1/2
    for trial in range(1, max_adjust + 1):
        cand = attempt(L)
        trials.append(cand)
        if 0.5 <= cand.sandwich <= 1.0:
            cand.trials = trial
            cand.min_displacement = min(t.min_displacement for t in trials)
            cand.trial_inner_total = sum(t.step.inner_iterations for t in trials)
            return cand
        if cand.sandwich > 1.0:
            lo = L
            L = math.sqrt(lo * hi) if hi is not None else 2.0 * L
        else:
            hi = L
            L = math.sqrt(lo * hi) if lo is not None else 0.5 * L
        if not math.isfinite(L) or L <= 0:
            break

    err = LineSearchError(
        f"no L satisfied the acceptance window after {len(trials)} trials "
        f"(last sandwich {trials[-1].sandwich:.3e}, M_p={M_p})")
    err.min_displacement = min(t.min_displacement for t in trials)
    err.best = min(trials, key=lambda t: abs(math.log(max(t.sandwich, 1e-300)) - math.log(0.75)))
    raise err


def run_atm(
    oracle: Oracle,
    y0: Vector,
    iterations: int,
    p: int,
    M_p: float,
    stop_grad: float | None = None,
    stop_window: int | None = None,
    subproblem_tol: float | None = None,
    L_init: float | None = None,
    check_invariants: bool = True,
    keep_trace: bool = True,
    on_iteration=None,
    freeze_floor: float = 1e-14,
) -> AtmResult:
    """Run the accelerated method for a fixed iteration budget.

    Both starting points coincide (u_0 = y_0).  Early exits: ``stop_grad``
    stops once the gradient norm reaches the target; ``stop_window`` stops
    when the gradient norm has not improved over that many iterations.

    Once the iterate reaches the numerical floor -- gradient below
    ``freeze_floor`` relative to its initial size, vanishing displacement,
    or (for p >= 2) a gradient plateau at the inner solver's tolerance --
    remaining iterations are emitted as frozen no-ops so that a fixed budget
    can always be accounted for.  Without this the dual point keeps
    integrating noise-level gradients with growing weights and drifts.

    ``on_iteration(record, y, grad)`` is called after every iteration with
    the new iterate and its gradient.
    """
    if iterations < 1:
        raise ValueError(f"iteration budget must be >= 1, got {iterations}")
    if p not in (1, 2, 3):
        raise ValueError(f"order p must be 1, 2 or 3, got {p}")
    y0 = np.asarray(y0, dtype=float)
    tol = subproblem_tol if subproblem_tol is not None else max(
        1e-10, 1e-3 * (stop_grad if stop_grad else 0.0))

    state = AtmState(k=0, A=0.0, y=y0.copy(), u=y0.copy(), L_prev=None)
    g = np.asarray(oracle.gradient(y0), dtype=float)
    gn = float(np.linalg.norm(g))
    f_y = float(oracle.value(y0))
    grad_floor = freeze_floor * (1.0 + gn)
    oracle_calls = 2
    trials_total = 0
    best_gn = gn
    best_iter = 0
    frozen = False
    stop_reason = "budget"
    iters_done = 0

    if stop_grad is not None and gn <= stop_grad:
        return AtmResult(state.y, state.u, 0.0, None, 0, "grad", [], 0, oracle_calls)

    for k in range(1, iterations + 1):
        iters_done = k
        if not frozen and gn <= grad_floor:
            frozen = True
        # inexact inner solves floor the reachable gradient norm; stepping in
        # place would only let the dual point drift on noise gradients
        if not frozen and p >= 2 and (
                (k == 1 and gn <= 10.0 * tol)
                or (best_gn <= 10.0 * tol and k - 1 - best_iter >= 100)):
            frozen = True
        if frozen and (stop_grad is not None or stop_window is not None):
            stop_reason = "floor"
            iters_done = k - 1
            break
        if frozen:
            rec = IterationRecord(k, state.L_prev or 0.0, state.A, f_y, gn, 0.0,
                                  0, 0, oracle_calls, frozen=True)
            if keep_trace:
                state.trace.append(rec)
            if on_iteration is not None:
                on_iteration(rec, state.y, g)
            continue

        try:
            acc = search_L(oracle, state, p, M_p, subproblem_tol=tol, L_init=L_init)
        except LineSearchError as err:
            x_scale = 1.0 + float(np.linalg.norm(state.y))
            if err.min_displacement <= 1e3 * _EPS * x_scale:
                frozen = True
                rec = IterationRecord(k, state.L_prev or 0.0, state.A, f_y, gn,
                                      0.0, 0, 0, oracle_calls, frozen=True)
                if keep_trace:
                    state.trace.append(rec)
                if on_iteration is not None:
                    on_iteration(rec, state.y, g)
                continue
            err.trace = state.trace
            raise

        trials_total += acc.trials
        # one value + gradient (+ Hessian for p >= 2) per trial, plus one
        # third-order contraction per inner subsolver iteration
        oracle_calls += acc.trials * (2 + (1 if p >= 2 else 0)) + acc.trial_inner_total

        if check_invariants:
            resid = abs(acc.L * acc.a**2 - acc.A_next) / max(acc.A_next, 1e-300)
            if resid > 1e-9:
                raise LineSearchError(
                    f"weight recurrence violated: |L a^2 - A| relative residual {resid:.3e}",
                    trace=state.trace)
            if not (0.5 - 1e-9 <= acc.sandwich <= 1.0 + 1e-9):
                raise LineSearchError(
                    f"acceptance window violated: s = {acc.sandwich}", trace=state.trace)

        y_new = acc.step.y
        f_new = float(oracle.value(y_new))
        g_new = np.asarray(oracle.gradient(y_new), dtype=float)
        oracle_calls += 2
        if not (math.isfinite(f_new) and np.all(np.isfinite(g_new))):
            raise EvaluationError(
                f"non-finite objective or gradient at iteration {k}")

        if check_invariants:
            # guaranteed decrease of an exact order-p step; for p = 1 the view
            # step from the extrapolation point equals the plain step on the
            # oracle itself, whose first-order constant M_p legitimizes M = M_p
            if p == 1:
                dec = float(oracle.value(acc.x)) - f_new
                need = float(np.linalg.norm(g_new)) ** 2 / (16.0 * M_p)
            else:
                view = RegularizedOracle(oracle, acc.x, acc.L)
                dec, need = guaranteed_decrease(view, acc.x, y_new, p, p * M_p)
            if dec < need - 1e-10 * (1.0 + abs(f_new)):
                raise LineSearchError(
                    f"per-step decrease {dec:.3e} below required {need:.3e}",
                    trace=state.trace)

        state.u = state.u - acc.a * g_new
        state.y = y_new
        state.A = acc.A_next
        state.L_prev = acc.L
        state.k = k
        f_y, g, gn = f_new, g_new, float(np.linalg.norm(g_new))

        rec = IterationRecord(k, acc.L, state.A, f_y, gn,
                              float(np.linalg.norm(y_new - acc.x)),
                              acc.step.inner_iterations, acc.trials, oracle_calls)
        if keep_trace:
            state.trace.append(rec)
        if on_iteration is not None:
            on_iteration(rec, state.y, g)

        if gn < best_gn:
            best_gn, best_iter = gn, k
        if stop_grad is not None and gn <= stop_grad:
            stop_reason = "grad"
            break
        if stop_window is not None and k - best_iter >= stop_window:
            stop_reason = "stagnation"
            break
    return AtmResult(state.y, state.u, state.A, state.L_prev, iters_done,
                     stop_reason, state.trace, trials_total, oracle_calls)
