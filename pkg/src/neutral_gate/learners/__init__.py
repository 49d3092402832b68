from .boost import BoostConfig, BoostError, BoostModel, train_boost
from .forest import ForestConfig, ForestError, ForestModel, train_forest
from .model_io import (
    ModelError,
    ModelKind,
    TrainedClassifier,
    load_model,
    save_model,
    train,
)
from .svm import SvmConfig, SvmError, SvmModel, fit_platt, kkt_violation, train_svm
from .tree import TreeNode, grow_tree, predict_tree, predict_tree_batch, tree_depth

__all__ = [
    "BoostConfig",
    "BoostError",
    "BoostModel",
    "ForestConfig",
    "ForestError",
    "ForestModel",
    "ModelError",
    "ModelKind",
    "SvmConfig",
    "SvmError",
    "SvmModel",
    "TrainedClassifier",
    "TreeNode",
    "fit_platt",
    "grow_tree",
    "kkt_violation",
    "load_model",
    "predict_tree",
    "predict_tree_batch",
    "save_model",
    "train",
    "train_boost",
    "train_forest",
    "train_svm",
    "tree_depth",
]
