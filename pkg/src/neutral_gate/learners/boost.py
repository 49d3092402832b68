"""Discrete AdaBoost over depth-bounded Gini trees with weight trimming.

Each round fits a tree on the highest-weight samples whose cumulative weight
reaches weight_trim_rate, computes the weighted error over all samples,
sets alpha = ln((1-e)/e), reweights misclassified samples and renormalizes.
Rounds stop early at e = 0 (the perfect tree is kept) or e >= 0.5 (the tree
is dropped).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tree import TreeNode, grow_tree, predict_tree_batch


class BoostError(Exception):
    pass


@dataclass(frozen=True)
class BoostConfig:
    weak_count: int = 8000
    weight_trim_rate: float = 0.9
    min_sample_count: int = 12
    max_depth: int = 50
    seed: int = 0

    def __post_init__(self):
        if self.weak_count < 1:
            raise BoostError("weak_count must be >= 1")
        if not 0.0 < self.weight_trim_rate <= 1.0:
            raise BoostError("weight_trim_rate must be in (0,1]")


@dataclass
class BoostModel:
    trees: list[TreeNode]
    alphas: list[float]
    diagnostics: dict = field(default_factory=dict)

    def margin(self, X: np.ndarray) -> np.ndarray:
        """Normalized vote sum in [-1, 1]."""
        X = np.atleast_2d(X)
        total = sum(self.alphas)
        s = np.zeros(X.shape[0])
        for tree, alpha in zip(self.trees, self.alphas):
            s += alpha * predict_tree_batch(tree, X)
        return s / total

    def confidence(self, X: np.ndarray) -> np.ndarray:
        s = self.margin(X)
        return 1.0 / (1.0 + np.exp(-2.0 * s))


def _trim(weights: np.ndarray, trim_rate: float) -> np.ndarray:
    """Indices of the minimal highest-weight prefix with cumulative weight >= trim_rate."""
    order = np.argsort(-weights, kind="stable")
    cum = np.cumsum(weights[order])
    keep = int(np.searchsorted(cum, trim_rate)) + 1
    keep = min(keep, len(weights))
    return np.sort(order[:keep])


def train_boost(X: np.ndarray, y: np.ndarray, cfg: BoostConfig) -> BoostModel:
    """Train on labels in {-1, +1}; both classes required."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if set(np.unique(y)) != {-1, 1}:
        raise BoostError("training data must contain both classes")
    n = X.shape[0]
    w = np.full(n, 1.0 / n)

    trees: list[TreeNode] = []
    alphas: list[float] = []
    rounds: list[dict] = []

    for _ in range(cfg.weak_count):
        kept = _trim(w, cfg.weight_trim_rate)
        tree = grow_tree(
            X[kept],
            y[kept],
            w[kept],
            max_depth=cfg.max_depth,
            min_sample_count=cfg.min_sample_count,
        )
        preds = predict_tree_batch(tree, X)
        mis = preds != y
        e = float(w[mis].sum())

        if e >= 0.5:
            rounds.append({"error": e, "alpha": None, "weight_sum": float(w.sum())})
            break
        if e == 0.0:
            trees.append(tree)
            alphas.append(1.0)
            rounds.append({"error": 0.0, "alpha": 1.0, "weight_sum": float(w.sum())})
            break

        alpha = float(np.log((1.0 - e) / e))
        trees.append(tree)
        alphas.append(alpha)
        w = w * np.exp(alpha * mis)
        w = w / w.sum()
        rounds.append({"error": e, "alpha": alpha, "weight_sum": float(w.sum())})

    if not trees:
        raise BoostError("no weak learner achieved error below 0.5")

    return BoostModel(
        trees=trees,
        alphas=alphas,
        diagnostics={"rounds": rounds, "final_weights": w.tolist()},
    )
