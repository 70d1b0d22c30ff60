"""Problem zoo: quadratics, logistic regression, worst-case power chains, datasets."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .oracles import Oracle, Vector


# -- convex quadratics -------------------------------------------------------

class QuadraticOracle(Oracle):
    """f(x) = 1/2 (x - shift)' Q (x - shift) + offset with PSD Q.

    The minimizer and optimal value are known exactly, which makes this the
    reference problem for rate checks.
    """

    order_supported = 3

    def __init__(self, Q: np.ndarray, shift: Vector | None = None, offset: float = 0.0):
        Q = np.asarray(Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ValueError("Q must be a square matrix")
        self.Q = 0.5 * (Q + Q.T)
        self.dim = Q.shape[0]
        self.shift = np.zeros(self.dim) if shift is None else np.asarray(shift, dtype=float)
        self.offset = float(offset)
        self._m1 = float(np.linalg.norm(self.Q, 2)) if self.dim else 0.0

    @property
    def minimizer(self) -> Vector:
        return self.shift.copy()

    @property
    def min_value(self) -> float:
        return self.offset

    def value(self, x):
        d = x - self.shift
        return 0.5 * float(d @ (self.Q @ d)) + self.offset

    def gradient(self, x):
        return self.Q @ (x - self.shift)

    def hessian(self, x):
        return self.Q.copy()

    def third_contract(self, x, h):
        return np.zeros(self.dim), 0.0

    def lipschitz(self, p):
        if p == 1:
            return self._m1
        if p in (2, 3):
            return 0.0
        return None


def quadratic_problem(n: int, seed: int = 0, cond: float = 10.0) -> QuadraticOracle:
    """Random PSD quadratic with eigenvalues log-spaced in [1/cond, 1]."""
    rng = np.random.default_rng(seed)
    eigs = np.logspace(-math.log10(cond), 0.0, n)
    B = rng.standard_normal((n, n))
    U, _ = np.linalg.qr(B)
    Q = (U * eigs) @ U.T
    shift = rng.standard_normal(n)
    return QuadraticOracle(Q, shift=shift)


# -- logistic regression -----------------------------------------------------

@dataclass
class LogisticDataset:
    """Labels in {-1, +1} and dense feature rows."""

    labels: np.ndarray
    features: np.ndarray

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=float)
        self.features = np.asarray(self.features, dtype=float)
        if self.labels.ndim != 1 or self.features.ndim != 2:
            raise ValueError("labels must be a vector, features a matrix")
        if self.labels.shape[0] != self.features.shape[0]:
            raise ValueError("labels and feature rows disagree in count")
        if not np.all(np.isin(self.labels, (-1.0, 1.0))):
            raise ValueError("labels must be +-1")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("features must be finite")

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]


class LogisticOracle(Oracle):
    """Average logistic loss of a linear classifier over a dataset.

    With t_i = -y_i <w_i, x> and s = sigmoid(t):
        loss'   = s
        loss''  = s (1 - s)
        loss''' = s (1 - s) (1 - 2 s)
    Declares the first- and third-order smoothness constants implied by the
    global bounds 1/4 and 1/8 on the second and fourth loss derivatives.
    """

    order_supported = 3

    def __init__(self, data: LogisticDataset):
        if data.n_samples == 0:
            raise ValueError("empty dataset")
        self.data = data
        self.dim = data.n_features
        W = data.features
        row_sq = np.einsum("ij,ij->i", W, W)
        d = data.n_samples
        self._m1 = float(np.sum(row_sq)) / (4.0 * d)
        self._m3 = float(np.sum(row_sq**2)) / (8.0 * d)

    def _margins(self, x):
        return -self.data.labels * (self.data.features @ x)

    def value(self, x):
        t = self._margins(x)
        # ln(1 + e^t) computed without overflow
        return float(np.mean(np.maximum(t, 0.0) + np.log1p(np.exp(-np.abs(t)))))

    def _sigma(self, x):
        t = self._margins(x)
        return 0.5 * (1.0 + np.tanh(0.5 * t))

    def gradient(self, x):
        s = self._sigma(x)
        d = self.data.n_samples
        return -(self.data.features.T @ (self.data.labels * s)) / d

    def hessian(self, x):
        s = self._sigma(x)
        w2 = s * (1.0 - s)
        W = self.data.features
        return (W.T * w2) @ W / self.data.n_samples

    def third_contract(self, x, h):
        s = self._sigma(x)
        w3 = s * (1.0 - s) * (1.0 - 2.0 * s)
        W = self.data.features
        Wh = W @ h
        coeff = -self.data.labels * w3 * Wh**2 / self.data.n_samples
        vec = W.T @ coeff
        return vec, float(coeff @ Wh)

    def lipschitz(self, p):
        if p == 1:
            return self._m1
        if p == 3:
            return self._m3
        return None


def logistic_problem(data: LogisticDataset) -> LogisticOracle:
    return LogisticOracle(data)


def synthetic_logistic(d: int, n: int, seed: int = 0, flip_fraction: float = 0.1) -> LogisticDataset:
    """Gaussian features with labels from a planted hyperplane, 10% flipped."""
    if d < 1 or n < 1:
        raise ValueError("d and n must be >= 1")
    rng = np.random.default_rng(seed)
    W = rng.standard_normal((d, n))
    planted = rng.standard_normal(n)
    y = np.sign(W @ planted)
    y[y == 0] = 1.0
    flips = rng.random(d) < flip_fraction
    y[flips] *= -1.0
    return LogisticDataset(labels=y, features=W)


def load_libsvm(
    path: str,
    n_features: int | None = None,
    normalize_rows: bool = False,
    max_rows: int | None = None,
    subsample_seed: int = 0,
) -> LogisticDataset:
    """Read a dense dataset from LIBSVM text format.

    Each line is ``label index:value ...`` with 1-based indices.  Binary
    labels {0,1} and {1,2} are remapped to {-1,+1}.  ``max_rows`` subsamples
    with a fixed seed so that dense Hessians stay affordable.
    """
    raw_labels: list[float] = []
    rows: list[dict[int, float]] = []
    max_idx = 0
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            try:
                label = float(parts[0])
                entries = {}
                for tok in parts[1:]:
                    idx_s, val_s = tok.split(":")
                    idx = int(idx_s)
                    if idx < 1:
                        raise ValueError("indices are 1-based")
                    entries[idx] = float(val_s)
            except (ValueError, IndexError) as exc:
                raise ValueError(f"{path}:{lineno}: malformed line ({exc})") from exc
            raw_labels.append(label)
            rows.append(entries)
            if entries:
                max_idx = max(max_idx, max(entries))
    if not rows:
        raise ValueError(f"{path}: empty dataset")

    labels = np.asarray(raw_labels)
    uniq = set(np.unique(labels))
    if uniq <= {-1.0, 1.0}:
        pass
    elif uniq <= {0.0, 1.0}:
        labels = np.where(labels == 0.0, -1.0, 1.0)
    elif uniq <= {1.0, 2.0}:
        labels = np.where(labels == 2.0, -1.0, 1.0)
    else:
        raise ValueError(f"{path}: labels {sorted(uniq)} are not binary")

    n = n_features if n_features is not None else max_idx
    if n < max_idx:
        raise ValueError(f"{path}: feature index {max_idx} exceeds n_features={n}")
    W = np.zeros((len(rows), n))
    for i, entries in enumerate(rows):
        for idx, val in entries.items():
            W[i, idx - 1] = val

    if max_rows is not None and len(rows) > max_rows:
        rng = np.random.default_rng(subsample_seed)
        keep = rng.choice(len(rows), size=max_rows, replace=False)
        keep.sort()
        W, labels = W[keep], labels[keep]

    if normalize_rows:
        norms = np.linalg.norm(W, axis=1)
        norms[norms == 0] = 1.0
        W = W / norms[:, None]
    return LogisticDataset(labels=labels, features=W)


# -- worst-case power-chain family -------------------------------------------

@dataclass
class HardFamilySpec:
    """Power-chain instance: order p, dimension n, active block size m."""

    p: int
    n: int
    m: int

    def __post_init__(self):
        if self.p not in (1, 2, 3):
            raise ValueError("order p must be 1, 2 or 3")
        if not (2 <= self.m <= self.n):
            raise ValueError(f"need 2 <= m <= n, got m={self.m}, n={self.n}")


def chain_matrix(n: int, m: int) -> np.ndarray:
    """Block-diagonal matrix: upper-bidiagonal difference block, then identity."""
    A = np.eye(n)
    idx = np.arange(m - 1)
    A[idx, idx + 1] = -1.0
    return A


class HardFamilyOracle(Oracle):
    """f(x) = sum |(A x)_i|^(p+1) / (p+1)  -  x_1.

    The separable (p+1)-power composed with a bidiagonal difference chain;
    minimizer x* = (m, m-1, ..., 1, 0, ...) and f* = -m p / (p+1) exactly.
    """

    order_supported = 3

    def __init__(self, spec: HardFamilySpec):
        self.spec = spec
        self.dim = spec.n
        self.A = chain_matrix(spec.n, spec.m)
        self._norm_A = float(np.linalg.norm(self.A, 2))
        self._mp = math.factorial(spec.p) * self._norm_A ** (spec.p + 1)

    @property
    def minimizer(self) -> Vector:
        x = np.zeros(self.dim)
        x[: self.spec.m] = np.arange(self.spec.m, 0, -1, dtype=float)
        return x

    @property
    def min_value(self) -> float:
        p, m = self.spec.p, self.spec.m
        return -m * p / (p + 1)

    def value(self, x):
        p = self.spec.p
        u = self.A @ x
        return float(np.sum(np.abs(u) ** (p + 1))) / (p + 1) - x[0]

    def gradient(self, x):
        p = self.spec.p
        u = self.A @ x
        g = self.A.T @ (np.abs(u) ** p * np.sign(u))
        g[0] -= 1.0
        return g

    def hessian(self, x):
        p = self.spec.p
        u = self.A @ x
        w = p * np.abs(u) ** (p - 1)
        return (self.A.T * w) @ self.A

    def third_contract(self, x, h):
        p = self.spec.p
        if p == 1:
            return np.zeros(self.dim), 0.0
        u = self.A @ x
        Ah = self.A @ h
        w = p * (p - 1) * np.abs(u) ** (p - 2) * np.sign(u)
        coeff = w * Ah**2
        vec = self.A.T @ coeff
        return vec, float(coeff @ Ah)

    def lipschitz(self, p):
        if p == self.spec.p:
            return self._mp
        return None


def hard_family_problem(spec: HardFamilySpec) -> HardFamilyOracle:
    return HardFamilyOracle(spec)
