"""Shared test oracles and utilities."""

from __future__ import annotations

import numpy as np

from gnopt.oracles import Oracle


class ConvexPolyOracle(Oracle):
    """f(x) = 1/2 x'Qx + b'x + sum_j rho_j (a_j'x)^4 with Q PSD, rho >= 0.

    Analytic derivatives of all orders; the exact order-3 constant is
    sum_j 24 rho_j ||a_j||^4.
    """

    order_supported = 3

    def __init__(self, Q, b, directions, weights):
        self.Q = np.asarray(Q, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.A = np.asarray(directions, dtype=float)  # rows a_j
        self.w = np.asarray(weights, dtype=float)
        self.dim = self.b.shape[0]
        self._m3 = float(np.sum(24.0 * self.w * np.linalg.norm(self.A, axis=1) ** 4))

    def value(self, x):
        t = self.A @ x
        return 0.5 * float(x @ (self.Q @ x)) + float(self.b @ x) + float(self.w @ t**4)

    def gradient(self, x):
        t = self.A @ x
        return self.Q @ x + self.b + self.A.T @ (4.0 * self.w * t**3)

    def hessian(self, x):
        t = self.A @ x
        return self.Q + (self.A.T * (12.0 * self.w * t**2)) @ self.A

    def third_contract(self, x, h):
        t = self.A @ x
        th = self.A @ h
        coeff = 24.0 * self.w * t * th**2
        return self.A.T @ coeff, float(coeff @ th)

    def lipschitz(self, p):
        if p == 3:
            return self._m3
        return None


def random_convex_poly(n: int, seed: int) -> ConvexPolyOracle:
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, n))
    Q = B @ B.T / n + 0.1 * np.eye(n)
    b = 0.5 * rng.standard_normal(n)
    k = 2
    directions = rng.standard_normal((k, n)) * 0.7
    weights = rng.random(k) * 0.3
    return ConvexPolyOracle(Q, b, directions, weights)


class BrokenGradientOracle(Oracle):
    """Quadratic whose gradient is deliberately wrong on coordinate 0."""

    order_supported = 1

    def __init__(self, n):
        self.dim = n

    def value(self, x):
        return 0.5 * float(x @ x)

    def gradient(self, x):
        g = x.copy()
        g[0] += 1.0
        return g
