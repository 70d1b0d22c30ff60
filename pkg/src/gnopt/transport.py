"""Entropy-regularized transport: smoothed dual objective, primal recovery, certificates.

The dual variable is stacked as lambda = (xi, eta) in R^(2n).  All softmax
computations run in the log domain so that small regularization weights do
not overflow.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .oracles import Oracle, Vector


@dataclass
class TransportInstance:
    """Cost matrix, two histograms, and the entropic regularization weight.

    The derived marginal operator A maps a vectorized n x n plan to its row
    and column sums; the right-hand side stacks the two histograms.
    """

    cost: np.ndarray
    source: np.ndarray
    target: np.ndarray
    gamma: float

    def __post_init__(self):
        self.cost = np.asarray(self.cost, dtype=float)
        self.source = np.asarray(self.source, dtype=float)
        self.target = np.asarray(self.target, dtype=float)
        n = self.cost.shape[0]
        if self.cost.shape != (n, n):
            raise ValueError("cost must be square")
        if not np.allclose(self.cost, self.cost.T, atol=1e-12):
            raise ValueError("cost must be symmetric")
        if np.any(self.cost < 0):
            raise ValueError("cost must be nonnegative")
        for name, h in (("source", self.source), ("target", self.target)):
            if h.shape != (n,):
                raise ValueError(f"{name} histogram must have length {n}")
            if np.any(h < 0):
                raise ValueError(f"{name} histogram must be nonnegative")
            if abs(float(np.sum(h)) - 1.0) > 1e-12:
                raise ValueError(f"{name} histogram must sum to 1")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")

    @property
    def n(self) -> int:
        return self.cost.shape[0]

    @property
    def rhs(self) -> Vector:
        return np.concatenate([self.source, self.target])

    def marginal_operator(self) -> np.ndarray:
        """Dense 2n x n^2 operator A with A vec(X) = (X 1; X' 1) (column-major vec)."""
        n = self.n
        A = np.zeros((2 * n, n * n))
        for j in range(n):
            for i in range(n):
                col = j * n + i
                A[i, col] = 1.0
                A[n + j, col] = 1.0
        return A


def _log_weights(instance: TransportInstance, lam: Vector) -> np.ndarray:
    n = instance.n
    xi, eta = lam[:n], lam[n:]
    return (xi[:, None] + eta[None, :] - instance.cost) / instance.gamma


def _stable_softmax(logw: np.ndarray) -> tuple[np.ndarray, float]:
    """Return (softmax weights, logsumexp) of a matrix of log weights."""
    m = float(np.max(logw))
    E = np.exp(logw - m)
    Z = float(np.sum(E))
    return E / Z, m + float(np.log(Z))


class TransportDualOracle(Oracle):
    """Smoothed dual of the entropy-regularized transport problem (minimized).

    phi(lambda) = gamma * logsumexp((xi_i + eta_j - cost_ij)/gamma) - <lambda, rhs>.
    The gradient equals the marginal residual of the softmax plan; third-order
    smoothness is declared through the exact operator norm ||A||^2 = 2n.
    """

    order_supported = 3

    def __init__(self, instance: TransportInstance):
        self.instance = instance
        self.dim = 2 * instance.n
        g = instance.gamma
        n = instance.n
        self._m1 = 2.0 * n / g
        self._m3 = 15.0 / g**3 * (2.0 * n) ** 2

    def _plan(self, lam):
        S, lse = _stable_softmax(_log_weights(self.instance, lam))
        return S, lse

    def value(self, lam):
        _, lse = self._plan(lam)
        return self.instance.gamma * lse - float(lam @ self.instance.rhs)

    def gradient(self, lam):
        S, _ = self._plan(lam)
        return np.concatenate([S.sum(axis=1), S.sum(axis=0)]) - self.instance.rhs

    def hessian(self, lam):
        S, _ = self._plan(lam)
        n = self.instance.n
        r, c = S.sum(axis=1), S.sum(axis=0)
        H = np.zeros((2 * n, 2 * n))
        H[:n, :n] = np.diag(r)
        H[n:, n:] = np.diag(c)
        H[:n, n:] = S
        H[n:, :n] = S.T
        a = np.concatenate([r, c])
        return (H - np.outer(a, a)) / self.instance.gamma

    def third_contract(self, lam, h):
        S, _ = self._plan(lam)
        n = self.instance.n
        U = h[:n, None] + h[None, n:]
        SU = S * U
        m1 = float(np.sum(SU))
        m2 = float(np.sum(SU * U))
        V = SU * U - m2 * S - 2.0 * m1 * SU + 2.0 * m1**2 * S
        vec = np.concatenate([V.sum(axis=1), V.sum(axis=0)]) / self.instance.gamma**2
        scalar = float(np.sum(V * U)) / self.instance.gamma**2
        return vec, scalar

    def lipschitz(self, p):
        if p == 1:
            return self._m1
        if p == 3:
            return self._m3
        return None


def ot_dual_problem(instance: TransportInstance) -> TransportDualOracle:
    return TransportDualOracle(instance)


# -- primal recovery ---------------------------------------------------------

@dataclass
class TransportPlan:
    """Nonnegative plan on the n^2 simplex with its marginal residuals."""

    X: np.ndarray
    row_residual: np.ndarray
    col_residual: np.ndarray


@dataclass
class Certificate:
    """Optimality certificate from a dual point.

    eps_eq bounds the marginal (feasibility) violation of the recovered plan;
    eps_f bounds its objective suboptimality.  The unclamped inner product is
    kept for diagnostics.
    """

    eps_f: float
    eps_eq: float
    eps_f_raw: float
    dual_value: float


def primal_plan(lam: Vector, instance: TransportInstance) -> TransportPlan:
    """Softmax-form plan from dual variables, normalized over the simplex."""
    lam = np.asarray(lam, dtype=float)
    S, _ = _stable_softmax(_log_weights(instance, lam))
    return TransportPlan(
        X=S,
        row_residual=S.sum(axis=1) - instance.source,
        col_residual=S.sum(axis=0) - instance.target,
    )


def certificate(lam: Vector, instance: TransportInstance) -> Certificate:
    lam = np.asarray(lam, dtype=float)
    oracle = TransportDualOracle(instance)
    grad = oracle.gradient(lam)
    raw = -float(lam @ grad)
    return Certificate(
        eps_f=max(0.0, raw),
        eps_eq=float(np.linalg.norm(grad)),
        eps_f_raw=raw,
        dual_value=oracle.value(lam),
    )


def transport_cost(plan: TransportPlan, instance: TransportInstance) -> tuple[float, float]:
    """Return (linear cost, entropic objective) of a plan.

    The entropic objective is <cost, X> - gamma * E(X) with the entropy
    E(X) = -sum X log X and the convention 0 log 0 = 0.
    """
    X = plan.X
    linear = float(np.sum(instance.cost * X))
    mask = X > 0
    entropy = -float(np.sum(X[mask] * np.log(X[mask])))
    return linear, linear - instance.gamma * entropy


# -- construction and I/O ----------------------------------------------------

def random_transport_instance(n: int, gamma: float, seed: int = 0) -> TransportInstance:
    """Squared-distance cost on random support points, random histograms."""
    rng = np.random.default_rng(seed)
    pts = rng.random(n)
    cost = (pts[:, None] - pts[None, :]) ** 2
    source = rng.random(n) + 0.1
    target = rng.random(n) + 0.1
    source /= source.sum()
    target /= target.sum()
    return TransportInstance(cost=cost, source=source, target=target, gamma=gamma)


def cost_from_csv(path: str) -> np.ndarray:
    """Read an n x n cost matrix from a CSV file with a header row."""
    with open(path, "r", newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ValueError(f"{path}: expected a header row and data rows")
    return np.asarray([[float(v) for v in row] for row in rows[1:]], dtype=float)


def histogram_from_csv(path: str) -> np.ndarray:
    """Read a one-column histogram from a CSV file with a header row."""
    with open(path, "r", newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ValueError(f"{path}: expected a header row and data rows")
    return np.asarray([float(row[0]) for row in rows[1:]], dtype=float)


def save_plan_csv(plan: TransportPlan, path: str) -> None:
    n = plan.X.shape[0]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"col_{j}" for j in range(n)])
        for row in plan.X:
            writer.writerow([repr(float(v)) for v in row])


def reference_entropic_objective(instance: TransportInstance, lam_ref: Vector) -> float:
    """Entropic objective of the plan recovered from a reference dual point."""
    plan = primal_plan(lam_ref, instance)
    _, entropic = transport_cost(plan, instance)
    return entropic
