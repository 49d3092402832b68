"""Random forest of Gini trees over bootstrap resamples.

Tree growth terminates either at max_trees or as soon as the out-of-bag
error changes by less than oob_epsilon between consecutive trees (combined
count-plus-epsilon criterion). Per-tree RNG streams are spawned from the
master seed so training is deterministic and order-independent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tree import TreeNode, grow_tree, predict_tree_batch


class ForestError(Exception):
    pass


@dataclass(frozen=True)
class ForestConfig:
    max_trees: int = 75
    oob_epsilon: float = 0.05
    active_var_count: int = 100
    min_sample_count: int = 12
    max_depth: int = 25
    seed: int = 0

    def __post_init__(self):
        if self.max_trees < 1:
            raise ForestError("max_trees must be >= 1")
        if not 0.0 < self.oob_epsilon < 1.0:
            raise ForestError("oob_epsilon must be in (0,1)")
        if self.active_var_count < 1:
            raise ForestError("active_var_count must be >= 1")


@dataclass
class ForestModel:
    trees: list[TreeNode]
    diagnostics: dict = field(default_factory=dict)

    def confidence(self, X: np.ndarray) -> np.ndarray:
        """Fraction of trees voting neutral (+1)."""
        X = np.atleast_2d(X)
        votes = np.zeros(X.shape[0])
        for tree in self.trees:
            votes += predict_tree_batch(tree, X) > 0
        return votes / len(self.trees)


def train_forest(X: np.ndarray, y: np.ndarray, cfg: ForestConfig) -> ForestModel:
    """Train on labels in {-1, +1}; both classes required."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if set(np.unique(y)) != {-1, 1}:
        raise ForestError("training data must contain both classes")
    n = X.shape[0]
    w = np.ones(n)

    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.max_trees)
    trees: list[TreeNode] = []
    bootstraps: list[list[int]] = []
    oob_votes = np.zeros(n)       # signed vote sum from trees where sample is OOB
    oob_counts = np.zeros(n, dtype=np.int64)
    oob_errors: list[float] = []

    for t in range(cfg.max_trees):
        rng = np.random.Generator(np.random.PCG64(seeds[t]))
        boot = rng.integers(0, n, size=n)
        tree = grow_tree(
            X[boot],
            y[boot],
            w[boot],
            max_depth=cfg.max_depth,
            min_sample_count=cfg.min_sample_count,
            active_var_count=cfg.active_var_count,
            rng=rng,
        )
        trees.append(tree)
        bootstraps.append(boot.tolist())

        oob_mask = np.ones(n, dtype=bool)
        oob_mask[boot] = False
        if oob_mask.any():
            preds = predict_tree_batch(tree, X[oob_mask])
            oob_votes[oob_mask] += preds
            oob_counts[oob_mask] += 1
        covered = oob_counts > 0
        if covered.any():
            # ties (vote sum 0) count as errors
            correct = np.sign(oob_votes[covered]) == y[covered]
            oob_err = 1.0 - float(correct.mean())
        else:
            oob_err = 1.0
        oob_errors.append(oob_err)
        if len(oob_errors) >= 2 and abs(oob_errors[-1] - oob_errors[-2]) < cfg.oob_epsilon:
            break

    return ForestModel(
        trees=trees,
        diagnostics={
            "oob_errors": oob_errors,
            "n_trees": len(trees),
            "bootstrap_indices": bootstraps,
        },
    )
