"""Regularized Taylor-model steps of order 1..3.

A step of order p from a point x minimizes

    sum_{r=0..p} (1/r!) D^r f(x)[h]^r  +  M/(p+1)! * ||h||^{p+1}

over the displacement h.  For M at least p times the p-th smoothness
constant the model is convex and overestimates f, so the minimizer makes
guaranteed progress on f itself.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import CapabilityError, SubproblemError
from .oracles import Oracle, Vector

_EPS = np.finfo(float).eps


@dataclass
class TensorStepResult:
    """Minimizer of the regularized Taylor model plus solve diagnostics."""

    y: Vector
    model_value: float
    model_grad_norm: float
    inner_iterations: int


def taylor_model_value(oracle: Oracle, x: Vector, y: Vector, p: int, M: float) -> float:
    """Evaluate the order-p Taylor model of ``oracle`` around x at y."""
    if p not in (1, 2, 3):
        raise ValueError(f"order p must be 1, 2 or 3, got {p}")
    if p > oracle.order_supported:
        raise CapabilityError(
            f"order {p} model needs derivatives the oracle does not provide")
    if M < 0:
        raise ValueError(f"regularization weight must be >= 0, got {M}")
    h = np.asarray(y, dtype=float) - np.asarray(x, dtype=float)
    val = oracle.value(x) + float(oracle.gradient(x) @ h)
    if p >= 2:
        val += 0.5 * float(h @ (oracle.hessian(x) @ h))
    if p >= 3:
        _, ts = oracle.third_contract(x, h)
        val += ts / 6.0
    nh = float(np.linalg.norm(h))
    val += M / math.factorial(p + 1) * nh ** (p + 1)
    return val


def _symmetrized_eig(H: np.ndarray):
    lam, Q = np.linalg.eigh(0.5 * (H + H.T))
    # convex inputs only; small negative eigenvalues are rounding noise
    return np.maximum(lam, 0.0), Q


def _solve_quartic_prox(lam, Q, v, tau):
    """Solve H h + tau ||h||^2 h = v given the eigendecomposition of H.

    Reduces to the scalar fixed point w(s) = s for w(s) = sum v_i^2/(lam_i+tau s)^2
    with s = ||h||^2; w is decreasing so bisection is safe.
    """
    vt = Q.T @ v
    vn2 = float(vt @ vt)
    if vn2 == 0.0:
        return np.zeros_like(v)
    s_hi = (vn2 / tau**2) ** (1.0 / 3.0)
    lo, hi = 0.0, s_hi

    def w(s):
        return float(np.sum(vt**2 / (lam + tau * s) ** 2))

    for _ in range(110):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if w(mid) > mid:
            lo = mid
        else:
            hi = mid
    s = 0.5 * (lo + hi)
    denom = lam + tau * s
    coeff = np.divide(vt, denom, out=np.zeros_like(vt), where=denom > 0)
    return Q @ coeff


def tensor_step(
    oracle: Oracle,
    x: Vector,
    p: int,
    M: float,
    tol: float = 1e-10,
    max_iterations: int = 5000,
) -> TensorStepResult:
    """Minimize the order-p regularized Taylor model of ``oracle`` around x.

    Solvers by order: p=1 closed form; p=2 via the scalar secular equation
    (H + (M/2) r I) h = -g with r = ||h|| solved by bisection; p=3 by
    relatively-smooth mirror descent with the quadratic-plus-quartic
    reference, using only Hessian products and third-order contractions.
    Initialization is always h = 0, so the output is deterministic.

    Returns a point whose model gradient norm is at most ``tol``; raises
    SubproblemError (carrying the best iterate) on non-convergence.
    """
    if p not in (1, 2, 3):
        raise ValueError(f"order p must be 1, 2 or 3, got {p}")
    if p > oracle.order_supported:
        raise CapabilityError(
            f"order {p} step needs derivatives the oracle does not provide")
    if M <= 0:
        raise ValueError(f"regularization weight must be > 0, got {M}")
    declared = oracle.lipschitz(p)
    if declared is not None and M < p * declared * (1 - 1e-12):
        warnings.warn(
            f"regularization weight {M} below {p} * declared constant {declared}; "
            "the model may be nonconvex", stacklevel=2)

    x = np.asarray(x, dtype=float)
    f0 = oracle.value(x)
    g = np.asarray(oracle.gradient(x), dtype=float)

    if p == 1:
        h = -g / M
        val = f0 + float(g @ h) + 0.5 * M * float(h @ h)
        return TensorStepResult(x + h, val, 0.0, 0)

    H = np.asarray(oracle.hessian(x), dtype=float)
    lam, Q = _symmetrized_eig(H)
    gt = Q.T @ g
    gn = float(np.linalg.norm(g))

    if p == 2:
        if gn == 0.0:
            return TensorStepResult(x.copy(), f0, 0.0, 0)
        # ||h(r)|| <= 2||g||/(M r), so the fixed point lies below sqrt(2||g||/M)
        hi = math.sqrt(2.0 * gn / M) * (1 + 1e-12)
        lo = 0.0
        h = np.zeros_like(g)
        iters = 0
        for iters in range(1, 201):
            r = 0.5 * (lo + hi)
            ht = -gt / (lam + 0.5 * M * r)
            nh = float(np.linalg.norm(ht))
            if 0.5 * M * abs(nh - r) * nh <= tol or hi - lo <= _EPS * hi:
                h = Q @ ht
                break
            if nh > r:
                lo = r
            else:
                hi = r
        else:
            h = Q @ ht
        Hh = H @ h
        nh = float(np.linalg.norm(h))
        grad = g + Hh + 0.5 * M * nh * h
        gnorm = float(np.linalg.norm(grad))
        val = f0 + float(g @ h) + 0.5 * float(h @ Hh) + M / 6.0 * nh**3
        if gnorm > tol:
            raise SubproblemError(
                f"secular bisection stalled at model gradient {gnorm:.3e} > {tol:.3e}",
                best=TensorStepResult(x + h, val, gnorm, iters))
        return TensorStepResult(x + h, val, gnorm, iters)

    # p == 3: mirror descent relative to rho(h) = h'Hh/2 + tau/4 ||h||^4.
    # For convex f and M >= 3 M_3 the model Hessian is bounded by twice the
    # reference Hessian, so a relative step of beta = 2 always decreases.
    tau = M / 3.0

    def model(h, Hh, ts, nh2):
        return float(g @ h) + 0.5 * float(h @ Hh) + ts / 6.0 + M / 24.0 * nh2**2

    def model_grad(h, Hh, tv, nh2):
        return g + Hh + 0.5 * tv + M / 6.0 * nh2 * h

    h = np.zeros_like(g)
    Hh = np.zeros_like(g)
    tv = np.zeros_like(g)
    ts = 0.0
    nh2 = 0.0
    omega = 0.0
    grad = model_grad(h, Hh, tv, nh2)
    gnorm = float(np.linalg.norm(grad))
    best = (h, omega, gnorm)
    beta = 2.0
    stall = 0
    iters = 0
    while gnorm > tol and iters < max_iterations:
        iters += 1
        rho_grad = Hh + tau * nh2 * h
        accepted = False
        for _ in range(40):
            v = rho_grad - grad / beta
            h_new = _solve_quartic_prox(lam, Q, v, tau)
            Hh_new = H @ h_new
            tv_new, ts_new = oracle.third_contract(x, h_new)
            nh2_new = float(h_new @ h_new)
            omega_new = model(h_new, Hh_new, ts_new, nh2_new)
            dh = h_new - h
            a, b2 = float(h @ dh), float(dh @ dh)
            # Bregman distance of rho, expanded into a cancellation-free form
            bregman = 0.5 * float(dh @ (H @ dh)) + tau * (0.5 * nh2 * b2 + (a + 0.5 * b2) ** 2)
            upper = omega + float(grad @ dh) + beta * bregman + 1e-12 * (1 + abs(omega))
            if omega_new <= upper:
                accepted = True
                break
            beta *= 2.0
        if not accepted:
            break
        h, Hh, tv, ts, nh2, omega = h_new, Hh_new, tv_new, ts_new, nh2_new, omega_new
        grad = model_grad(h, Hh, tv, nh2)
        gnorm = float(np.linalg.norm(grad))
        beta = max(2.0, beta * 0.5)
        if gnorm < best[2] * (1 - 1e-3):
            best = (h, omega, gnorm)
            stall = 0
        else:
            stall += 1
            if gnorm < best[2]:
                best = (h, omega, gnorm)
            if stall >= 400:
                break

    if gnorm > best[2]:
        h, omega, gnorm = best
    if gnorm > tol:
        raise SubproblemError(
            f"order-3 model solve stalled at gradient {gnorm:.3e} > {tol:.3e} "
            f"after {iters} iterations",
            best=TensorStepResult(x + h, f0 + omega, gnorm, iters))
    return TensorStepResult(x + h, f0 + omega, gnorm, iters)


def brute_force_tensor_step(
    oracle: Oracle,
    x: Vector,
    p: int,
    M: float,
    radius: float,
    grid: int,
) -> Vector:
    """Grid-search reference minimizer of the order-p model (test oracle).

    Coarse scan over the box of the given radius around x followed by
    coordinate-wise refinement with a shrinking window.  Cost grows as
    grid**n, so only n <= 3 is supported.
    """
    x = np.asarray(x, dtype=float)
    n = oracle.dim
    if n > 3:
        raise CapabilityError(f"brute force search is limited to n <= 3, got n={n}")
    if grid < 10:
        raise ValueError(f"grid must be >= 10, got {grid}")
    if radius <= 0:
        raise ValueError(f"radius must be > 0, got {radius}")

    def model(y):
        return taylor_model_value(oracle, x, y, p, M)

    axes = [np.linspace(x[i] - radius, x[i] + radius, grid) for i in range(n)]
    best_y = x.copy()
    best_v = model(best_y)
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    for y in mesh:
        v = model(y)
        if v < best_v:
            best_v, best_y = v, y.copy()

    window = 2 * radius / (grid - 1)
    while window > 1e-10 * max(radius, 1.0):
        for i in range(n):
            offs = np.linspace(-window, window, 21)
            cand = np.tile(best_y, (21, 1))
            cand[:, i] += offs
            vals = np.array([model(c) for c in cand])
            j = int(np.argmin(vals))
            if vals[j] < best_v:
                best_v, best_y = vals[j], cand[j].copy()
        window *= 0.55
    return best_y


def guaranteed_decrease(
    oracle: Oracle, x: Vector, y: Vector, p: int, M: float
) -> tuple[float, float]:
    """Return (decrease achieved, decrease required) for a step x -> y.

    The required amount is ||grad f(y)||^((p+1)/p) / (8 (p+1)! M^(1/p)),
    which every exact order-p step with M >= p M_p must achieve.
    """
    dec = oracle.value(x) - oracle.value(y)
    gn = float(np.linalg.norm(oracle.gradient(y)))
    need = gn ** ((p + 1) / p) / (8.0 * math.factorial(p + 1) * M ** (1.0 / p))
    return dec, need
