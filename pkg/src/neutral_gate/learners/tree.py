"""Binary decision trees with weighted Gini splits.

Shared by the random forest (feature subsampling per node) and AdaBoost
(weighted samples, full feature set). Labels are +1 (neutral) / -1
(non-neutral). Tie-breaking is deterministic: a split is replaced only by a
strictly better one, and candidates are scanned in ascending feature index
and ascending threshold order, so the lowest index / lowest threshold wins.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass
class TreeNode:
    # leaf: feature < 0, prediction in {-1, +1}
    feature: int
    threshold: float
    prediction: int
    left: Optional["TreeNode"] = None
    right: Optional["TreeNode"] = None

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0

    def to_dict(self) -> dict:
        if self.is_leaf:
            return {"leaf": True, "prediction": self.prediction}
        return {
            "leaf": False,
            "feature": self.feature,
            "threshold": float(self.threshold),
            "left": self.left.to_dict(),
            "right": self.right.to_dict(),
        }

    @staticmethod
    def from_dict(d: dict) -> "TreeNode":
        if d["leaf"]:
            return TreeNode(feature=-1, threshold=0.0, prediction=int(d["prediction"]))
        return TreeNode(
            feature=int(d["feature"]),
            threshold=float(d["threshold"]),
            prediction=0,
            left=TreeNode.from_dict(d["left"]),
            right=TreeNode.from_dict(d["right"]),
        )


def _leaf_prediction(y: np.ndarray, w: np.ndarray) -> int:
    """Weighted majority; exact ties go to -1 (non-neutral)."""
    pos = float(w[y > 0].sum())
    neg = float(w[y < 0].sum())
    return 1 if pos > neg else -1


def _best_split(
    X: np.ndarray, y: np.ndarray, w: np.ndarray, feature_indices: np.ndarray
) -> tuple[int, float] | None:
    """Best (feature, threshold) by weighted Gini; None when nothing improves.

    Threshold candidates are midpoints between consecutive distinct values;
    samples go left when value < threshold.
    """
    w_total = float(w.sum())
    pos_total = float(w[y > 0].sum())
    parent_gini = _gini(pos_total, w_total)

    best: tuple[float, int, float] | None = None
    for f in np.sort(feature_indices):
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        col_sorted = col[order]
        w_sorted = w[order]
        wpos_sorted = np.where(y[order] > 0, w_sorted, 0.0)

        cum_w = np.cumsum(w_sorted)
        cum_pos = np.cumsum(wpos_sorted)
        # split after position i is valid when the value changes
        change = col_sorted[:-1] < col_sorted[1:]
        if not change.any():
            continue
        idx = np.nonzero(change)[0]
        wl = cum_w[idx]
        pl = cum_pos[idx]
        wr = w_total - wl
        pr = pos_total - pl
        impurity = wl * _gini_vec(pl, wl) + wr * _gini_vec(pr, wr)
        impurity = impurity / w_total
        k = int(np.argmin(impurity))  # argmin takes the first, i.e. lowest threshold
        score = float(impurity[k])
        if score >= parent_gini - 1e-15:
            continue
        if best is None or score < best[0] - 1e-15:
            threshold = float((col_sorted[idx[k]] + col_sorted[idx[k] + 1]) / 2.0)
            best = (score, int(f), threshold)
    if best is None:
        return None
    return best[1], best[2]


def _gini(pos: float, total: float) -> float:
    if total <= 0.0:
        return 0.0
    p = pos / total
    return 2.0 * p * (1.0 - p)


def _gini_vec(pos: np.ndarray, total: np.ndarray) -> np.ndarray:
    p = np.divide(pos, total, out=np.zeros_like(pos), where=total > 0)
    return 2.0 * p * (1.0 - p)


def grow_tree(
    X: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    max_depth: int,
    min_sample_count: int,
    active_var_count: int | None = None,
    rng: np.random.Generator | None = None,
) -> TreeNode:
    """Grow a tree; nodes stop at purity, max_depth, or < min_sample_count samples."""
    n_features = X.shape[1]

    def build(indices: np.ndarray, depth: int) -> TreeNode:
        yi, wi = y[indices], w[indices]
        pure = np.all(yi == yi[0])
        if pure or depth >= max_depth or len(indices) < min_sample_count:
            return TreeNode(feature=-1, threshold=0.0, prediction=_leaf_prediction(yi, wi))
        if active_var_count is not None and active_var_count < n_features:
            feats = rng.choice(n_features, size=active_var_count, replace=False)
        else:
            feats = np.arange(n_features)
        split = _best_split(X[indices], yi, wi, feats)
        if split is None:
            return TreeNode(feature=-1, threshold=0.0, prediction=_leaf_prediction(yi, wi))
        f, t = split
        mask = X[indices, f] < t
        left = build(indices[mask], depth + 1)
        right = build(indices[~mask], depth + 1)
        return TreeNode(feature=f, threshold=t, prediction=0, left=left, right=right)

    return build(np.arange(X.shape[0]), 0)


def predict_tree(node: TreeNode, x: np.ndarray) -> int:
    while not node.is_leaf:
        node = node.left if x[node.feature] < node.threshold else node.right
    return node.prediction


def predict_tree_batch(node: TreeNode, X: np.ndarray) -> np.ndarray:
    return np.array([predict_tree(node, x) for x in X], dtype=np.int64)


def tree_depth(node: TreeNode) -> int:
    if node.is_leaf:
        return 0
    return 1 + max(tree_depth(node.left), tree_depth(node.right))
