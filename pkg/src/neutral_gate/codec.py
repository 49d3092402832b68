"""Feature matrix container (.feat), sample manifests and feature combination.

The .feat layout is fixed: magic ``FEAT``, version u32, rows u32, cols u32,
then rows*cols float32 values, row-major, everything little-endian. Embedding
dimensions follow the two expression-recognition backbones (1280 and 1408)
plus their eight-class softmax outputs.
"""

from __future__ import annotations

import enum
import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

FEAT_MAGIC = b"FEAT"
FEAT_VERSION = 1
_HEADER = struct.Struct("<4sIII")

HSE1_DIM = 1280
HSE2_DIM = 1408
SOFTMAX_DIM = 8

EXPRESSION_LABELS = (
    "anger",
    "contempt",
    "disgust",
    "fear",
    "happiness",
    "neutral",
    "sadness",
    "surprise",
    "non_neutral_unspecified",
)

MANIFEST_KEYS = ("row", "sample_id", "subject_id", "dataset_name", "expression_label")


class CodecError(Exception):
    """Malformed .feat file or manifest."""


class ComboScheme(enum.Enum):
    """Feature combination schemes and their fixed output dimensions."""

    HSE1 = "hse1"
    HSE2 = "hse2"
    HSE1C = "hse1c"
    HSE2C = "hse2c"
    HSE12 = "hse12"
    HSE12C = "hse12c"

    @property
    def dim(self) -> int:
        return _SCHEME_DIMS[self]


_SCHEME_DIMS = {
    ComboScheme.HSE1: HSE1_DIM,
    ComboScheme.HSE2: HSE2_DIM,
    ComboScheme.HSE1C: HSE1_DIM + SOFTMAX_DIM,
    ComboScheme.HSE2C: HSE2_DIM + SOFTMAX_DIM,
    ComboScheme.HSE12: HSE1_DIM + HSE2_DIM,
    ComboScheme.HSE12C: HSE1_DIM + HSE2_DIM + 2 * SOFTMAX_DIM,
}


@dataclass(frozen=True)
class FeatureRecord:
    """One sample's embeddings and metadata, row-aligned across .feat files."""

    sample_id: str
    subject_id: str
    dataset_name: str
    expression_label: str
    hse1: np.ndarray
    hse2: np.ndarray
    softmax1: np.ndarray
    softmax2: np.ndarray

    def validate(self) -> None:
        if self.expression_label not in EXPRESSION_LABELS:
            raise CodecError(f"unknown expression label {self.expression_label!r}")
        if self.hse1.shape != (HSE1_DIM,):
            raise CodecError(f"hse1 must have {HSE1_DIM} entries, got {self.hse1.shape}")
        if self.hse2.shape != (HSE2_DIM,):
            raise CodecError(f"hse2 must have {HSE2_DIM} entries, got {self.hse2.shape}")
        for name, sm in (("softmax1", self.softmax1), ("softmax2", self.softmax2)):
            if sm.shape != (SOFTMAX_DIM,):
                raise CodecError(f"{name} must have {SOFTMAX_DIM} entries, got {sm.shape}")
            if np.any(sm < 0.0) or np.any(sm > 1.0):
                raise CodecError(f"{name} entries must lie in [0,1]")
            if abs(float(sm.sum()) - 1.0) > 1e-3:
                raise CodecError(f"{name} must sum to 1 within 1e-3, got {float(sm.sum())}")


@dataclass(frozen=True)
class ComboVector:
    scheme: ComboScheme
    values: np.ndarray


def write_matrix(path: str | Path, matrix: np.ndarray) -> None:
    """Write a 2-D float array as a .feat file, bit-exact float32."""
    matrix = np.asarray(matrix, dtype=np.float32)
    if matrix.ndim != 2:
        raise CodecError(f"matrix must be 2-D, got shape {matrix.shape}")
    rows, cols = matrix.shape
    if rows >= 2**32 or cols >= 2**32:
        raise CodecError("matrix dimensions overflow unsigned 32-bit")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(FEAT_MAGIC, FEAT_VERSION, rows, cols))
        fh.write(matrix.astype("<f4", copy=False).tobytes(order="C"))


def read_matrix(path: str | Path) -> np.ndarray:
    """Read a .feat file, validating magic, version and exact byte length."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise CodecError(f"{path}: truncated header ({len(data)} bytes)")
    magic, version, rows, cols = _HEADER.unpack_from(data)
    if magic != FEAT_MAGIC:
        raise CodecError(f"{path}: bad magic {magic!r}")
    if version != FEAT_VERSION:
        raise CodecError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + 4 * rows * cols
    if len(data) != expected:
        raise CodecError(f"{path}: expected {expected} bytes, found {len(data)}")
    values = np.frombuffer(data, dtype="<f4", offset=_HEADER.size)
    return values.reshape(rows, cols).copy()


def _parse_manifest_line(line: str, lineno: int) -> dict:
    try:
        entry = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CodecError(f"manifest line {lineno}: invalid record: {exc}") from exc
    if not isinstance(entry, dict):
        raise CodecError(f"manifest line {lineno}: record must be an object")
    missing = [k for k in MANIFEST_KEYS if k not in entry]
    if missing:
        raise CodecError(f"manifest line {lineno}: missing keys {missing}")
    return entry


def read_manifest(path: str | Path) -> list[dict]:
    """Read a line-delimited manifest; one self-describing record per line."""
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            entries.append(_parse_manifest_line(line, lineno))
    return entries


def write_manifest(path: str | Path, entries: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(json.dumps({k: entry[k] for k in MANIFEST_KEYS}, sort_keys=True))
            fh.write("\n")


def load_records(manifest: str | Path, feature_dir: str | Path) -> list[FeatureRecord]:
    """Bind manifest metadata to the four row-aligned feature matrices."""
    feature_dir = Path(feature_dir)
    entries = read_manifest(manifest)
    matrices = {
        name: read_matrix(feature_dir / f"{name}.feat")
        for name in ("hse1", "hse2", "softmax1", "softmax2")
    }
    row_counts = {name: m.shape[0] for name, m in matrices.items()}
    if len(set(row_counts.values())) > 1:
        raise CodecError(f"feature matrices disagree on row count: {row_counts}")
    n_rows = row_counts["hse1"]
    if len(entries) != n_rows:
        raise CodecError(f"manifest has {len(entries)} rows, matrices have {n_rows}")

    seen_ids: set[str] = set()
    records = []
    for entry in entries:
        row = int(entry["row"])
        if not 0 <= row < n_rows:
            raise CodecError(f"row index {row} out of range [0, {n_rows})")
        sample_id = str(entry["sample_id"])
        if sample_id in seen_ids:
            raise CodecError(f"duplicate sample_id {sample_id!r}")
        seen_ids.add(sample_id)
        record = FeatureRecord(
            sample_id=sample_id,
            subject_id=str(entry["subject_id"]),
            dataset_name=str(entry["dataset_name"]),
            expression_label=str(entry["expression_label"]),
            hse1=matrices["hse1"][row],
            hse2=matrices["hse2"][row],
            softmax1=matrices["softmax1"][row],
            softmax2=matrices["softmax2"][row],
        )
        record.validate()
        records.append(record)
    return records


def combine(record: FeatureRecord, scheme: ComboScheme) -> ComboVector:
    """Assemble one combination vector; order is backbone-then-softmax, HSE-1 first."""
    parts = {
        ComboScheme.HSE1: (record.hse1,),
        ComboScheme.HSE2: (record.hse2,),
        ComboScheme.HSE1C: (record.hse1, record.softmax1),
        ComboScheme.HSE2C: (record.hse2, record.softmax2),
        ComboScheme.HSE12: (record.hse1, record.hse2),
        ComboScheme.HSE12C: (record.hse1, record.hse2, record.softmax1, record.softmax2),
    }[scheme]
    values = np.concatenate([np.asarray(p, dtype=np.float32) for p in parts])
    assert values.shape == (scheme.dim,)
    return ComboVector(scheme=scheme, values=values)
