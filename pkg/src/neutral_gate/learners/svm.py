"""Soft-margin RBF SVM trained with sequential minimal optimization.

Solves the dual

    max  sum_i a_i - 1/2 sum_ij a_i a_j y_i y_j K(x_i, x_j)
    s.t. 0 <= a_i <= C,  sum_i a_i y_i = 0

by Platt-style pairwise coordinate ascent with an error cache, then fits a
Platt sigmoid on validation decision values so predictions land in [0, 1].
Kernel rows are served through an LRU cache bounded by cache_budget_bytes;
results do not depend on the cache size.
"""

from __future__ import annotations

import math
from collections import OrderedDict
from dataclasses import dataclass, field

import numpy as np


class SvmError(Exception):
    pass


@dataclass(frozen=True)
class SvmConfig:
    C: float = 3.0
    gamma: float = 0.002
    kkt_tolerance: float = 1e-3
    max_passes: int = 10
    cache_budget_bytes: int = 256 * 1024 * 1024
    kernel: str = "rbf"

    def __post_init__(self):
        if self.C <= 0 or self.gamma <= 0 or self.kkt_tolerance <= 0:
            raise SvmError("C, gamma and kkt_tolerance must be positive")
        if self.kernel != "rbf":
            raise SvmError(f"unsupported kernel {self.kernel!r}")


@dataclass
class SvmModel:
    support_vectors: np.ndarray  # (n_sv, dim)
    dual_coef: np.ndarray        # alpha_i * y_i, (n_sv,)
    bias: float
    gamma: float
    platt_a: float
    platt_b: float
    diagnostics: dict = field(default_factory=dict)

    def decision_values(self, X: np.ndarray) -> np.ndarray:
        K = _rbf_kernel(np.atleast_2d(X), self.support_vectors, self.gamma)
        return K @ self.dual_coef + self.bias

    def confidence(self, X: np.ndarray) -> np.ndarray:
        f = self.decision_values(X)
        return _sigmoid(-(self.platt_a * f + self.platt_b))


def _rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    sq = (
        np.sum(A * A, axis=1)[:, None]
        + np.sum(B * B, axis=1)[None, :]
        - 2.0 * (A @ B.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-gamma * sq)


def _sigmoid(z: np.ndarray | float) -> np.ndarray | float:
    return np.where(z >= 0, 1.0 / (1.0 + np.exp(-z)), np.exp(z) / (1.0 + np.exp(z)))


class _KernelCache:
    """LRU cache of kernel matrix rows."""

    def __init__(self, X: np.ndarray, gamma: float, budget_bytes: int):
        self.X = X
        self.gamma = gamma
        self.sq_norms = np.sum(X * X, axis=1)
        row_bytes = max(1, 8 * X.shape[0])
        self.max_rows = max(2, budget_bytes // row_bytes)
        self._rows: OrderedDict[int, np.ndarray] = OrderedDict()

    def row(self, i: int) -> np.ndarray:
        cached = self._rows.get(i)
        if cached is not None:
            self._rows.move_to_end(i)
            return cached
        sq = self.sq_norms[i] + self.sq_norms - 2.0 * (self.X @ self.X[i])
        np.maximum(sq, 0.0, out=sq)
        row = np.exp(-self.gamma * sq)
        self._rows[i] = row
        if len(self._rows) > self.max_rows:
            self._rows.popitem(last=False)
        return row


class _Smo:
    def __init__(self, X: np.ndarray, y: np.ndarray, cfg: SvmConfig):
        self.X = X
        self.y = y.astype(np.float64)
        self.C = float(cfg.C)
        self.tol = float(cfg.kkt_tolerance)
        self.eps = 1e-12
        self.cache = _KernelCache(X, cfg.gamma, cfg.cache_budget_bytes)
        self.n = X.shape[0]
        self.alpha = np.zeros(self.n)
        self.b = 0.0
        # f(x_i) - y_i; alpha starts at 0 so f = b = 0
        self.errors = -self.y.copy()

    def objective(self) -> float:
        active = self.alpha > 0
        if not active.any():
            return 0.0
        idx = np.nonzero(active)[0]
        K = _rbf_kernel(self.X[idx], self.X[idx], self.cache.gamma)
        ay = self.alpha[idx] * self.y[idx]
        return float(self.alpha[idx].sum() - 0.5 * ay @ K @ ay)

    def _take_step(self, i1: int, i2: int) -> bool:
        if i1 == i2:
            return False
        a1_old, a2_old = self.alpha[i1], self.alpha[i2]
        y1, y2 = self.y[i1], self.y[i2]
        e1, e2 = self.errors[i1], self.errors[i2]
        s = y1 * y2
        if s < 0:
            lo = max(0.0, a2_old - a1_old)
            hi = min(self.C, self.C + a2_old - a1_old)
        else:
            lo = max(0.0, a1_old + a2_old - self.C)
            hi = min(self.C, a1_old + a2_old)
        if lo >= hi:
            return False

        row1 = self.cache.row(i1)
        k11, k12, k22 = row1[i1], row1[i2], self.cache.row(i2)[i2]
        eta = k11 + k22 - 2.0 * k12
        if eta > 0:
            a2 = a2_old + y2 * (e1 - e2) / eta
            a2 = min(max(a2, lo), hi)
        else:
            # objective is flat or concave along the pair direction: test the ends
            f1 = y1 * (e1 - self.b) - a1_old * k11 - s * a2_old * k12
            f2 = y2 * (e2 - self.b) - s * a1_old * k12 - a2_old * k22
            l1 = a1_old + s * (a2_old - lo)
            h1 = a1_old + s * (a2_old - hi)
            obj_lo = (
                l1 * f1 + lo * f2 + 0.5 * l1 * l1 * k11 + 0.5 * lo * lo * k22 + s * lo * l1 * k12
            )
            obj_hi = (
                h1 * f1 + hi * f2 + 0.5 * h1 * h1 * k11 + 0.5 * hi * hi * k22 + s * hi * h1 * k12
            )
            if obj_lo < obj_hi - self.eps:
                a2 = lo
            elif obj_lo > obj_hi + self.eps:
                a2 = hi
            else:
                return False
        if abs(a2 - a2_old) < self.eps * (a2 + a2_old + self.eps):
            return False
        a1 = a1_old + s * (a2_old - a2)
        if a1 < 0.0:
            a1 = 0.0
        elif a1 > self.C:
            a1 = self.C

        d1 = y1 * (a1 - a1_old)
        d2 = y2 * (a2 - a2_old)
        b1 = self.b - e1 - d1 * k11 - d2 * k12
        b2 = self.b - e2 - d1 * k12 - d2 * k22
        if 0.0 < a1 < self.C:
            b_new = b1
        elif 0.0 < a2 < self.C:
            b_new = b2
        else:
            b_new = 0.5 * (b1 + b2)

        row2 = self.cache.row(i2)
        self.errors += d1 * row1 + d2 * row2 + (b_new - self.b)
        self.alpha[i1], self.alpha[i2] = a1, a2
        self.b = b_new
        return True

    def _examine(self, i2: int) -> bool:
        y2, a2, e2 = self.y[i2], self.alpha[i2], self.errors[i2]
        r2 = e2 * y2
        if not ((r2 < -self.tol and a2 < self.C) or (r2 > self.tol and a2 > 0)):
            return False
        non_bound = np.nonzero((self.alpha > 0) & (self.alpha < self.C))[0]
        if len(non_bound) > 1:
            i1 = int(non_bound[np.argmax(np.abs(self.errors[non_bound] - e2))])
            if self._take_step(i1, i2):
                return True
        offset = (i2 * 2654435761) % max(1, len(non_bound)) if len(non_bound) else 0
        for j in range(len(non_bound)):
            if self._take_step(int(non_bound[(j + offset) % len(non_bound)]), i2):
                return True
        start = (i2 * 2654435761) % self.n
        for j in range(self.n):
            if self._take_step((j + start) % self.n, i2):
                return True
        return False

    def solve(self, max_passes: int) -> bool:
        """Run until a full sweep changes nothing. Returns convergence flag."""
        examine_all = True
        stalled_sweeps = 0
        prev_obj = self.objective()
        while True:
            changed = 0
            if examine_all:
                for i in range(self.n):
                    changed += self._examine(i)
            else:
                for i in np.nonzero((self.alpha > 0) & (self.alpha < self.C))[0]:
                    changed += self._examine(int(i))
            if examine_all:
                if changed == 0:
                    return True
                obj = self.objective()
                if obj <= prev_obj + 1e-12:
                    stalled_sweeps += 1
                    if stalled_sweeps >= max_passes:
                        return False
                else:
                    stalled_sweeps = 0
                prev_obj = obj
                examine_all = False
            elif changed == 0:
                examine_all = True


def kkt_violation(model_alpha: np.ndarray, y: np.ndarray, decision: np.ndarray, C: float) -> float:
    """Largest violation of the KKT complementarity conditions (0 if satisfied)."""
    margin = y * decision
    viol = 0.0
    for a, m in zip(model_alpha, margin):
        if a < 1e-12:
            viol = max(viol, 1.0 - m)  # must have margin >= 1
        elif a > C - 1e-12:
            viol = max(viol, m - 1.0)  # must have margin <= 1
        else:
            viol = max(viol, abs(m - 1.0))  # must sit on the margin
    return max(0.0, viol)


def fit_platt(decision: np.ndarray, is_positive: np.ndarray, max_iter: int = 100) -> tuple[float, float]:
    """Platt sigmoid fit (Lin, Lin & Weng's robust Newton variant).

    Returns (A, B) such that P(positive | f) = 1 / (1 + exp(A*f + B)).
    """
    f = np.asarray(decision, dtype=np.float64)
    pos = np.asarray(is_positive, dtype=bool)
    prior1 = int(pos.sum())
    prior0 = len(pos) - prior1
    hi = (prior1 + 1.0) / (prior1 + 2.0)
    lo = 1.0 / (prior0 + 2.0)
    t = np.where(pos, hi, lo)

    a, b = 0.0, math.log((prior0 + 1.0) / (prior1 + 1.0))
    sigma = 1e-12
    min_step = 1e-10

    def nll(a_, b_):
        z = a_ * f + b_
        return float(np.sum(np.where(z >= 0, t * z + np.log1p(np.exp(-z)), (t - 1) * z + np.log1p(np.exp(z)))))

    fval = nll(a, b)
    for _ in range(max_iter):
        z = a * f + b
        p = _sigmoid(-z)  # P(positive)
        d1 = t - p
        d2 = p * (1.0 - p)
        g1 = float(np.sum(f * d1))
        g2 = float(np.sum(d1))
        if abs(g1) < 1e-10 and abs(g2) < 1e-10:
            break
        h11 = float(np.sum(f * f * d2)) + sigma
        h22 = float(np.sum(d2)) + sigma
        h21 = float(np.sum(f * d2))
        det = h11 * h22 - h21 * h21
        da = -(h22 * g1 - h21 * g2) / det
        db = -(-h21 * g1 + h11 * g2) / det
        gd = g1 * da + g2 * db
        step = 1.0
        while step >= min_step:
            new_f = nll(a + step * da, b + step * db)
            if new_f < fval + 1e-4 * step * gd:
                a, b = a + step * da, b + step * db
                fval = new_f
                break
            step /= 2.0
        else:
            break
    return a, b


def _final_bias(X: np.ndarray, y: np.ndarray, alpha: np.ndarray, cfg: SvmConfig) -> float:
    """Bias from the KKT feasibility interval at the converged alphas.

    Free support vectors pin the bias exactly (averaged for stability); with
    every alpha at a bound the bias may sit anywhere in an interval, so the
    midpoint is taken.
    """
    g = _rbf_kernel(X, X, cfg.gamma) @ (alpha * y)  # bias-free outputs
    b_exact = y - g  # bias making each sample sit on the margin
    free = (alpha > 1e-9) & (alpha < cfg.C - 1e-9)
    if free.any():
        return float(b_exact[free].mean())
    lower = ((alpha <= 1e-9) & (y > 0)) | ((alpha >= cfg.C - 1e-9) & (y < 0))
    upper = ((alpha <= 1e-9) & (y < 0)) | ((alpha >= cfg.C - 1e-9) & (y > 0))
    lo = b_exact[lower].max() if lower.any() else -np.inf
    hi = b_exact[upper].min() if upper.any() else np.inf
    if not np.isfinite(lo):
        return float(hi)
    if not np.isfinite(hi):
        return float(lo)
    return float(0.5 * (lo + hi))


def train_svm(
    X_train: np.ndarray,
    y_train: np.ndarray,
    X_val: np.ndarray | None,
    y_val: np.ndarray | None,
    cfg: SvmConfig,
) -> SvmModel:
    """Train on labels in {-1, +1} (+1 = neutral); Platt fit on the validation split."""
    X_train = np.asarray(X_train, dtype=np.float64)
    y_train = np.asarray(y_train, dtype=np.float64)
    if set(np.unique(y_train)) != {-1.0, 1.0}:
        raise SvmError("training data must contain both classes")

    smo = _Smo(X_train, y_train, cfg)
    converged = smo.solve(cfg.max_passes)
    smo.b = _final_bias(X_train, y_train, smo.alpha, cfg)

    sv_mask = smo.alpha > 1e-12
    if not sv_mask.any():
        raise SvmError("no support vectors found")
    model = SvmModel(
        support_vectors=X_train[sv_mask].copy(),
        dual_coef=(smo.alpha * y_train)[sv_mask].copy(),
        bias=float(smo.b),
        gamma=float(cfg.gamma),
        platt_a=0.0,
        platt_b=0.0,
        diagnostics={
            "converged": bool(converged),
            "dual_objective": smo.objective(),
            "n_support_vectors": int(sv_mask.sum()),
            "alpha": smo.alpha.tolist(),
        },
    )

    if X_val is not None and len(X_val) > 0:
        cal_f = model.decision_values(np.asarray(X_val, dtype=np.float64))
        cal_y = np.asarray(y_val) > 0
    else:
        cal_f = model.decision_values(X_train)
        cal_y = y_train > 0
    model.platt_a, model.platt_b = fit_platt(cal_f, cal_y)
    return model
