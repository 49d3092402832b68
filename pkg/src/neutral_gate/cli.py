"""Command-line pipeline: train, score, eval-det, eval-edc, class-flow.

Standard output carries only key=value lines so runs can be diffed in CI.
Exit codes: 0 success, 1 data/model error, 2 usage error. A JSON config file
(--config) may supply any flag by its dest name; explicit flags win.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import evaluation, neutrality
from .codec import CodecError, ComboScheme, combine, load_records
from .dataset import (
    BinaryLabel,
    DatasetError,
    SplitSpec,
    balance,
    balance_per_dataset,
    binarize,
    split_identity_disjoint,
)
from .evaluation import EvalError
from .learners import (
    BoostConfig,
    BoostError,
    ForestConfig,
    ForestError,
    ModelError,
    ModelKind,
    SvmConfig,
    SvmError,
    load_model,
    save_model,
    train,
)

_DATA_ERRORS = (
    CodecError,
    DatasetError,
    SvmError,
    ForestError,
    BoostError,
    ModelError,
    EvalError,
    OSError,
    ValueError,
)

_MODEL_KINDS = {"svm": ModelKind.SVM, "rf": ModelKind.RANDOM_FOREST, "adaboost": ModelKind.ADABOOST}


class UsageError(Exception):
    pass


def _emit(key: str, value) -> None:
    if isinstance(value, float):
        value = f"{value:.9f}"
    print(f"{key}={value}")


def _apply_config(args: argparse.Namespace, parser_keys: set[str]) -> None:
    """Overlay config-file values under explicit flags; unknown keys are usage errors."""
    if not getattr(args, "config", None):
        return
    with open(args.config, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise UsageError("config file must contain a JSON object")
    unknown = sorted(set(cfg) - parser_keys)
    if unknown:
        raise UsageError(f"unknown config keys: {unknown}")
    for key, value in cfg.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)


def _resolve(args, key, default):
    value = getattr(args, key, None)
    return default if value is None else value


def _load_labeled(manifest: str, features: str):
    records = load_records(manifest, features)
    return records, binarize(records)


def _as_xy(samples, scheme: ComboScheme):
    X = np.stack([combine(s.record, scheme).values for s in samples]).astype(np.float64)
    y = np.array([1 if s.label is BinaryLabel.NEUTRAL else -1 for s in samples], dtype=np.int64)
    return X, y


def _accuracy(clf, X, y) -> float:
    conf = clf.predict_confidence(X)
    pred = np.where(conf >= 0.5, 1, -1)
    return float((pred == y).mean())


def cmd_train(args: argparse.Namespace) -> int:
    seed = int(_resolve(args, "seed", 42))
    scheme = ComboScheme(args.combo)
    kind = _MODEL_KINDS[args.model]

    _, samples = _load_labeled(args.manifest, args.features)
    balance_mode = _resolve(args, "balance", "global")
    if balance_mode == "global":
        samples = balance(samples, seed)
    elif balance_mode == "per-dataset":
        samples = balance_per_dataset(samples, seed)
    elif balance_mode != "none":
        raise UsageError(f"unknown balance mode {balance_mode!r}")

    spec = SplitSpec(validation_fraction=float(_resolve(args, "validation_fraction", 0.30)), seed=seed)
    train_samples, val_samples = split_identity_disjoint(samples, spec)
    X_train, y_train = _as_xy(train_samples, scheme)
    X_val, y_val = _as_xy(val_samples, scheme) if val_samples else (None, None)

    if kind is ModelKind.SVM:
        cfg = SvmConfig(
            C=float(_resolve(args, "svm_c", 3.0)),
            gamma=float(_resolve(args, "gamma", 0.002)),
            kkt_tolerance=float(_resolve(args, "kkt_tolerance", 1e-3)),
            max_passes=int(_resolve(args, "max_passes", 10)),
            cache_budget_bytes=int(_resolve(args, "cache_budget_bytes", 256 * 1024 * 1024)),
        )
    elif kind is ModelKind.RANDOM_FOREST:
        cfg = ForestConfig(
            max_trees=int(_resolve(args, "max_trees", 75)),
            oob_epsilon=float(_resolve(args, "oob_epsilon", 0.05)),
            active_var_count=int(_resolve(args, "active_var_count", 100)),
            min_sample_count=int(_resolve(args, "min_sample_count", 12)),
            max_depth=int(_resolve(args, "max_depth", 25)),
            seed=seed,
        )
    else:
        cfg = BoostConfig(
            weak_count=int(_resolve(args, "weak_count", 8000)),
            weight_trim_rate=float(_resolve(args, "weight_trim_rate", 0.9)),
            min_sample_count=int(_resolve(args, "min_sample_count", 12)),
            max_depth=int(_resolve(args, "max_depth", 50)),
            seed=seed,
        )

    clf = train(kind, scheme, X_train, y_train, X_val, y_val, cfg)
    save_model(clf, args.out)

    _emit("model", args.model)
    _emit("combo", scheme.value)
    _emit("seed", seed)
    _emit("balance", balance_mode)
    _emit("n_train", len(train_samples))
    _emit("n_validation", len(val_samples))
    for key, value in sorted(vars(cfg).items()):
        _emit(f"cfg_{key}", value)
    _emit("train_accuracy", _accuracy(clf, X_train, y_train))
    if X_val is not None:
        _emit("validation_accuracy", _accuracy(clf, X_val, y_val))
    _emit("out", args.out)
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    clf = load_model(args.model)
    records = load_records(args.manifest, args.features)
    scores = neutrality.score_samples(clf, records)
    neutrality.write_scores_csv(args.out, scores)
    _emit("n_scored", len(scores))
    _emit("combo", clf.scheme.value)
    _emit("out", args.out)
    return 0


def _quality_map(scores_path: str) -> dict[str, float]:
    return {s.sample_id: s.confidence for s in neutrality.read_scores_csv(scores_path)}


def cmd_eval_det(args: argparse.Namespace) -> int:
    qualities = _quality_map(args.scores)
    records = load_records(args.manifest, args.features) if args.features else None
    if records is None:
        from .codec import read_manifest

        entries = read_manifest(args.manifest)
        labels = {str(e["sample_id"]): e["expression_label"] == "neutral" for e in entries}
    else:
        labels = {r.sample_id: r.expression_label == "neutral" for r in records}
    missing = sorted(set(qualities) - set(labels))
    if missing:
        raise EvalError(f"scores without manifest entries: {missing[:5]}")
    ids = sorted(qualities)
    curve = evaluation.det_curve(
        np.array([qualities[i] for i in ids]),
        np.array([labels[i] for i in ids], dtype=bool),
    )
    evaluation.write_det_csv(args.out, curve)
    _emit("eer", curve.eer)
    _emit("n_thresholds", len(curve.thresholds))
    _emit("out", args.out)
    return 0


def cmd_eval_edc(args: argparse.Namespace) -> int:
    if (args.threshold is None) == (args.starting_fnmr is None):
        raise UsageError("exactly one of --threshold / --starting-fnmr is required")
    qualities = _quality_map(args.scores)
    comparisons = evaluation.read_comparisons_csv(args.comparisons)
    d_max = float(_resolve(args, "dmax", 0.20))
    grid_step = float(_resolve(args, "grid_step", 0.01))
    curve = evaluation.edc_curve(
        qualities,
        comparisons,
        d_max=d_max,
        grid_step=grid_step,
        threshold=args.threshold,
        starting_fnmr=args.starting_fnmr,
    )
    evaluation.write_edc_csv(args.out, curve)
    _emit("pauc", curve.pauc)
    _emit("pauc_normalized", curve.pauc_normalized)
    _emit("threshold", curve.threshold)
    _emit("dmax", d_max)
    _emit("grid_step", grid_step)
    _emit("truncated", int(curve.truncated))
    _emit("out", args.out)
    return 0


def cmd_class_flow(args: argparse.Namespace) -> int:
    qualities = _quality_map(args.scores)
    records = load_records(args.manifest, args.features)
    d_max = float(_resolve(args, "dmax", 0.90))
    grid_step = float(_resolve(args, "grid_step", 0.05))
    grid = evaluation._discard_grid(d_max, grid_step)
    flow = evaluation.class_flow(qualities, records, grid)
    evaluation.write_flow_csv(args.out, flow)
    _emit("n_samples", len(records))
    _emit("n_labels", len(flow.proportions))
    _emit("dmax", d_max)
    _emit("grid_step", grid_step)
    _emit("out", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="neutral-gate", description="Expression-neutrality estimation pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--seed", type=int, default=None, help="master RNG seed (default 42)")
        p.add_argument("--config", default=None, help="JSON file supplying flag values; flags win")

    p_train = sub.add_parser("train", help="train a classifier on a manifest + feature directory")
    p_train.add_argument("--manifest", required=True)
    p_train.add_argument("--features", required=True)
    p_train.add_argument("--combo", required=True, choices=[s.value for s in ComboScheme])
    p_train.add_argument("--model", required=True, choices=sorted(_MODEL_KINDS))
    p_train.add_argument("--out", required=True)
    p_train.add_argument("--validation-fraction", dest="validation_fraction", type=float, default=None)
    p_train.add_argument("--balance", choices=["global", "per-dataset", "none"], default=None)
    p_train.add_argument("--svm-c", dest="svm_c", type=float, default=None)
    p_train.add_argument("--gamma", type=float, default=None)
    p_train.add_argument("--kkt-tolerance", dest="kkt_tolerance", type=float, default=None)
    p_train.add_argument("--max-passes", dest="max_passes", type=int, default=None)
    p_train.add_argument("--cache-budget-bytes", dest="cache_budget_bytes", type=int, default=None)
    p_train.add_argument("--max-trees", dest="max_trees", type=int, default=None)
    p_train.add_argument("--oob-epsilon", dest="oob_epsilon", type=float, default=None)
    p_train.add_argument("--active-var-count", dest="active_var_count", type=int, default=None)
    p_train.add_argument("--min-sample-count", dest="min_sample_count", type=int, default=None)
    p_train.add_argument("--max-depth", dest="max_depth", type=int, default=None)
    p_train.add_argument("--weak-count", dest="weak_count", type=int, default=None)
    p_train.add_argument("--weight-trim-rate", dest="weight_trim_rate", type=float, default=None)
    add_common(p_train)
    p_train.set_defaults(func=cmd_train)

    p_score = sub.add_parser("score", help="score samples with a trained model")
    p_score.add_argument("--model", required=True)
    p_score.add_argument("--manifest", required=True)
    p_score.add_argument("--features", required=True)
    p_score.add_argument("--out", required=True)
    add_common(p_score)
    p_score.set_defaults(func=cmd_score)

    p_det = sub.add_parser("eval-det", help="DET curve and EER from scores + manifest labels")
    p_det.add_argument("--scores", required=True)
    p_det.add_argument("--manifest", required=True)
    p_det.add_argument("--features", default=None, help="optional; labels come from the manifest")
    p_det.add_argument("--out", required=True)
    add_common(p_det)
    p_det.set_defaults(func=cmd_eval_det)

    p_edc = sub.add_parser("eval-edc", help="EDC curve and pAUC from scores + mated comparisons")
    p_edc.add_argument("--scores", required=True)
    p_edc.add_argument("--comparisons", required=True)
    p_edc.add_argument("--dmax", type=float, default=None)
    p_edc.add_argument("--grid-step", dest="grid_step", type=float, default=None)
    p_edc.add_argument("--threshold", type=float, default=None)
    p_edc.add_argument("--starting-fnmr", dest="starting_fnmr", type=float, default=None)
    p_edc.add_argument("--out", required=True)
    add_common(p_edc)
    p_edc.set_defaults(func=cmd_eval_edc)

    p_flow = sub.add_parser("class-flow", help="expression-class proportions along the discard grid")
    p_flow.add_argument("--scores", required=True)
    p_flow.add_argument("--manifest", required=True)
    p_flow.add_argument("--features", required=True)
    p_flow.add_argument("--dmax", type=float, default=None)
    p_flow.add_argument("--grid-step", dest="grid_step", type=float, default=None)
    p_flow.add_argument("--out", required=True)
    add_common(p_flow)
    p_flow.set_defaults(func=cmd_class_flow)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        keys = {k for k in vars(args) if k not in ("func", "command", "config")}
        _apply_config(args, keys)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _DATA_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
