"""Versioned model container and the unified train/predict surface.

Container layout (little-endian): magic "NGMD", version u32, kind u8,
scheme u8, payload length u64, JSON payload, CRC-32 over all preceding
bytes. JSON floats are written with shortest round-trip repr, so saving is
deterministic and load(save(m)) reproduces confidences bit-for-bit.
"""

from __future__ import annotations

import enum
import json
import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..codec import ComboScheme
from .boost import BoostConfig, BoostModel, train_boost
from .forest import ForestConfig, ForestModel, train_forest
from .svm import SvmConfig, SvmModel, train_svm
from .tree import TreeNode

MODEL_MAGIC = b"NGMD"
MODEL_VERSION = 1
_HEADER = struct.Struct("<4sIBBQ")


class ModelError(Exception):
    pass


class ModelKind(enum.Enum):
    SVM = 1
    RANDOM_FOREST = 2
    ADABOOST = 3


_SCHEME_CODES = {s: i for i, s in enumerate(ComboScheme)}
_SCHEME_FROM_CODE = {i: s for s, i in _SCHEME_CODES.items()}


@dataclass
class TrainedClassifier:
    kind: ModelKind
    scheme: ComboScheme
    model: SvmModel | ForestModel | BoostModel
    format_version: int = MODEL_VERSION

    def predict_confidence(self, X: np.ndarray, scheme: ComboScheme | None = None) -> np.ndarray:
        """Neutral-class confidence in [0,1] for each row of X."""
        if scheme is not None and scheme != self.scheme:
            raise ModelError(f"scheme mismatch: model is {self.scheme.value}, input is {scheme.value}")
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.scheme.dim:
            raise ModelError(f"expected {self.scheme.dim}-dim input for {self.scheme.value}, got {X.shape[1]}")
        conf = self.model.confidence(X)
        return np.clip(conf, 0.0, 1.0)


def train(
    kind: ModelKind,
    scheme: ComboScheme,
    X_train: np.ndarray,
    y_train: np.ndarray,
    X_val: np.ndarray | None,
    y_val: np.ndarray | None,
    cfg: SvmConfig | ForestConfig | BoostConfig,
) -> TrainedClassifier:
    if kind is ModelKind.SVM:
        model = train_svm(X_train, y_train, X_val, y_val, cfg)
    elif kind is ModelKind.RANDOM_FOREST:
        model = train_forest(X_train, y_train, cfg)
    else:
        model = train_boost(X_train, y_train, cfg)
    return TrainedClassifier(kind=kind, scheme=scheme, model=model)


def _payload_dict(clf: TrainedClassifier) -> dict:
    m = clf.model
    if clf.kind is ModelKind.SVM:
        params = {
            "support_vectors": [[float(v) for v in row] for row in m.support_vectors],
            "dual_coef": [float(v) for v in m.dual_coef],
            "bias": float(m.bias),
            "gamma": float(m.gamma),
            "platt_a": float(m.platt_a),
            "platt_b": float(m.platt_b),
        }
    elif clf.kind is ModelKind.RANDOM_FOREST:
        params = {"trees": [t.to_dict() for t in m.trees]}
    else:
        params = {
            "trees": [t.to_dict() for t in m.trees],
            "alphas": [float(a) for a in m.alphas],
        }
    return {
        "kind": clf.kind.name,
        "scheme": clf.scheme.value,
        "parameters": params,
        "diagnostics": m.diagnostics,
    }


def save_model(clf: TrainedClassifier, path: str | Path) -> None:
    payload = json.dumps(_payload_dict(clf), sort_keys=True, separators=(",", ":")).encode("utf-8")
    header = _HEADER.pack(
        MODEL_MAGIC,
        MODEL_VERSION,
        clf.kind.value,
        _SCHEME_CODES[clf.scheme],
        len(payload),
    )
    crc = zlib.crc32(header + payload) & 0xFFFFFFFF
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)
        fh.write(struct.pack("<I", crc))


def load_model(path: str | Path, expected_kind: ModelKind | None = None) -> TrainedClassifier:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size + 4:
        raise ModelError(f"{path}: file too short")
    magic, version, kind_code, scheme_code, payload_len = _HEADER.unpack_from(data)
    if magic != MODEL_MAGIC:
        raise ModelError(f"{path}: bad magic {magic!r}")
    if version != MODEL_VERSION:
        raise ModelError(f"{path}: unsupported version {version}")
    if len(data) != _HEADER.size + payload_len + 4:
        raise ModelError(f"{path}: payload length mismatch")
    payload = data[_HEADER.size : _HEADER.size + payload_len]
    (stored_crc,) = struct.unpack_from("<I", data, _HEADER.size + payload_len)
    crc = zlib.crc32(data[: _HEADER.size + payload_len]) & 0xFFFFFFFF
    if crc != stored_crc:
        raise ModelError(f"{path}: checksum failure")

    try:
        kind = ModelKind(kind_code)
        scheme = _SCHEME_FROM_CODE[scheme_code]
    except (ValueError, KeyError) as exc:
        raise ModelError(f"{path}: unknown kind/scheme code") from exc

    doc = json.loads(payload.decode("utf-8"))
    if doc.get("kind") != kind.name or doc.get("scheme") != scheme.value:
        raise ModelError(f"{path}: payload kind/scheme disagrees with header")
    if expected_kind is not None and kind is not expected_kind:
        raise ModelError(f"{path}: expected {expected_kind.name} model, found {kind.name}")

    params = doc["parameters"]
    diagnostics = doc.get("diagnostics", {})
    if kind is ModelKind.SVM:
        model = SvmModel(
            support_vectors=np.asarray(params["support_vectors"], dtype=np.float64),
            dual_coef=np.asarray(params["dual_coef"], dtype=np.float64),
            bias=float(params["bias"]),
            gamma=float(params["gamma"]),
            platt_a=float(params["platt_a"]),
            platt_b=float(params["platt_b"]),
            diagnostics=diagnostics,
        )
    elif kind is ModelKind.RANDOM_FOREST:
        model = ForestModel(
            trees=[TreeNode.from_dict(t) for t in params["trees"]],
            diagnostics=diagnostics,
        )
    else:
        model = BoostModel(
            trees=[TreeNode.from_dict(t) for t in params["trees"]],
            alphas=[float(a) for a in params["alphas"]],
            diagnostics=diagnostics,
        )
    return TrainedClassifier(kind=kind, scheme=scheme, model=model, format_version=version)
