"""Differentiable-objective interface, quadratic regularization, derivative checks.

An :class:`Oracle` exposes a convex objective together with its analytic
derivatives up to third order.  Third-order information is only ever exposed
through directional contractions (the vector ``D3 f(x)[h,h,.]`` and the scalar
``D3 f(x)[h,h,h]``), never as a full tensor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CapabilityError, EvaluationError

Vector = np.ndarray
Matrix = np.ndarray


class Oracle:
    """Convex objective with analytic derivatives up to ``order_supported``.

    Evaluation methods never mutate state, so a single oracle may be shared
    between concurrent solver runs.

    Attributes:
        dim: dimension of the domain.
        order_supported: highest derivative order available (1, 2 or 3).
    """

    dim: int
    order_supported: int = 1

    def value(self, x: Vector) -> float:
        raise NotImplementedError

    def gradient(self, x: Vector) -> Vector:
        raise NotImplementedError

    def hessian(self, x: Vector) -> Matrix:
        raise CapabilityError(f"{type(self).__name__} does not provide Hessians")

    def third_contract(self, x: Vector, h: Vector) -> tuple[Vector, float]:
        """Return the pair ``(D3 f(x)[h,h,.], D3 f(x)[h,h,h])``."""
        raise CapabilityError(f"{type(self).__name__} does not provide third derivatives")

    def lipschitz(self, p: int) -> float | None:
        """Declared Lipschitz constant of the p-th derivative, or None."""
        return None


class RegularizedOracle(Oracle):
    """View of ``base`` with an added quadratic ``(coeff/2) * ||x - center||^2``.

    Derivatives of order >= 3 are identical to the base oracle; the Hessian
    is shifted by ``coeff * I`` and the first-order smoothness constant grows
    by ``coeff``.  Views compose (a view of a view is fine).
    """

    def __init__(self, base: Oracle, center: Vector, coeff: float):
        center = np.asarray(center, dtype=float)
        if coeff < 0:
            raise ValueError(f"regularization coefficient must be >= 0, got {coeff}")
        if center.shape != (base.dim,):
            raise ValueError(
                f"center has shape {center.shape}, expected ({base.dim},)")
        self.base = base
        self.center = center
        self.coeff = float(coeff)
        self.dim = base.dim
        self.order_supported = base.order_supported

    def value(self, x):
        d = x - self.center
        return self.base.value(x) + 0.5 * self.coeff * float(d @ d)

    def gradient(self, x):
        return self.base.gradient(x) + self.coeff * (x - self.center)

    def hessian(self, x):
        H = self.base.hessian(x).copy()
        H[np.diag_indices_from(H)] += self.coeff
        return H

    def third_contract(self, x, h):
        return self.base.third_contract(x, h)

    def lipschitz(self, p):
        m = self.base.lipschitz(p)
        if p == 1:
            return None if m is None else m + self.coeff
        return m


def make_regularized(base: Oracle, center: Vector, coeff: float) -> RegularizedOracle:
    """Quadratically regularized view of ``base`` around ``center``."""
    return RegularizedOracle(base, center, coeff)


# -- finite-difference validation ------------------------------------------

def default_fd_step(order: int, x: Vector) -> float:
    """Central-difference step balancing truncation against cancellation."""
    scale = 1.0 + float(np.linalg.norm(x))
    return {1: 1e-6, 2: 1e-5, 3: 1e-4}[order] * scale


@dataclass
class FdOrderReport:
    order: int
    max_rel_error: float
    worst_index: int
    step: float
    passed: bool


@dataclass
class FdReport:
    entries: list[FdOrderReport] = field(default_factory=list)
    tol: float = 0.0

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def max_rel_error(self) -> float:
        return max((e.max_rel_error for e in self.entries), default=0.0)

    def __str__(self):
        lines = [
            f"  order {e.order}: max rel err {e.max_rel_error:.3e} "
            f"(worst index {e.worst_index}, step {e.step:.1e}) "
            f"{'ok' if e.passed else 'FAIL'}"
            for e in self.entries
        ]
        return "\n".join(lines)


def _check_finite(name, arr):
    if not np.all(np.isfinite(arr)):
        raise EvaluationError(f"non-finite {name} encountered during finite differencing")


def estimate_lipschitz(
    oracle: Oracle, p: int, n_samples: int = 30, radius: float = 1.0, seed: int = 0
) -> float:
    """Crude sampling estimate of the order-p smoothness constant.

    Maximizes the difference-quotient of the p-th derivative over random
    point pairs (directional for p = 3).  This is a heuristic lower bound,
    not a certified constant; wrapper guarantees built on it are best-effort.
    """
    if p not in (1, 2, 3):
        raise ValueError(f"order p must be 1, 2 or 3, got {p}")
    rng = np.random.default_rng(seed)
    n = oracle.dim
    best = 0.0
    for _ in range(n_samples):
        x = radius * rng.standard_normal(n)
        y = x + radius * 0.5 * rng.standard_normal(n)
        dist = float(np.linalg.norm(x - y))
        if dist == 0.0:
            continue
        if p == 1:
            diff = float(np.linalg.norm(oracle.gradient(x) - oracle.gradient(y)))
        elif p == 2:
            diff = float(np.linalg.norm(oracle.hessian(x) - oracle.hessian(y), 2))
        else:
            h = rng.standard_normal(n)
            h /= np.linalg.norm(h)
            tx, _ = oracle.third_contract(x, h)
            ty, _ = oracle.third_contract(y, h)
            diff = float(np.linalg.norm(np.asarray(tx) - np.asarray(ty)))
        best = max(best, diff / dist)
    return best


def fd_check(
    oracle: Oracle,
    x: Vector,
    order: int = 1,
    step: float | None = None,
    tol: float = 1e-5,
    direction: Vector | None = None,
) -> FdReport:
    """Compare analytic derivatives against central finite differences at ``x``.

    Checks each order from 1 up to ``order``.  Relative errors are measured
    against ``max(1, scale)`` of the analytic quantity, and the report lists
    the worst coordinate for each order.  ``direction`` feeds the order-3
    directional check; if omitted a fixed ramp direction is used so results
    are reproducible.

    Raises EvaluationError if a non-finite value is produced.
    """
    x = np.asarray(x, dtype=float)
    _check_finite("input point", x)
    if order > oracle.order_supported:
        raise CapabilityError(
            f"order {order} requested but oracle supports {oracle.order_supported}")
    n = oracle.dim
    report = FdReport(tol=tol)

    # order 1: gradient vs central differences of the value
    h1 = step if step is not None else default_fd_step(1, x)
    g = np.asarray(oracle.gradient(x), dtype=float)
    _check_finite("gradient", g)
    fd_g = np.empty(n)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h1
        fp, fm = oracle.value(x + e), oracle.value(x - e)
        _check_finite("value", np.array([fp, fm]))
        fd_g[i] = (fp - fm) / (2 * h1)
    scale = max(1.0, float(np.max(np.abs(g))))
    err = np.abs(fd_g - g) / scale
    worst = int(np.argmax(err))
    report.entries.append(FdOrderReport(1, float(err[worst]), worst, h1, err[worst] <= tol))

    if order >= 2:
        h2 = step if step is not None else default_fd_step(2, x)
        H = np.asarray(oracle.hessian(x), dtype=float)
        _check_finite("hessian", H)
        fd_H = np.empty((n, n))
        for j in range(n):
            e = np.zeros(n)
            e[j] = h2
            gp = np.asarray(oracle.gradient(x + e), dtype=float)
            gm = np.asarray(oracle.gradient(x - e), dtype=float)
            _check_finite("gradient", gp)
            _check_finite("gradient", gm)
            fd_H[:, j] = (gp - gm) / (2 * h2)
        scale = max(1.0, float(np.max(np.abs(H))))
        errm = np.abs(fd_H - H) / scale
        flat = int(np.argmax(errm))
        report.entries.append(
            FdOrderReport(2, float(errm.flat[flat]), flat % n, h2, errm.flat[flat] <= tol))

    if order >= 3:
        h3 = step if step is not None else default_fd_step(3, x)
        if direction is None:
            direction = 1.0 + np.arange(n) / max(n, 1)
        d = np.asarray(direction, dtype=float)
        d = d / np.linalg.norm(d)
        tv, ts = oracle.third_contract(x, d)
        tv = np.asarray(tv, dtype=float)
        _check_finite("third contraction", tv)
        Hp = np.asarray(oracle.hessian(x + h3 * d), dtype=float)
        Hm = np.asarray(oracle.hessian(x - h3 * d), dtype=float)
        _check_finite("hessian", Hp)
        _check_finite("hessian", Hm)
        fd_tv = (Hp @ d - Hm @ d) / (2 * h3)
        fd_ts = float(d @ fd_tv)
        scale = max(1.0, float(np.max(np.abs(tv))), abs(ts))
        errv = np.abs(fd_tv - tv) / scale
        errs = abs(fd_ts - ts) / scale
        worst = int(np.argmax(errv))
        emax = max(float(errv[worst]), errs)
        report.entries.append(FdOrderReport(3, emax, worst, h3, emax <= tol))

    return report
