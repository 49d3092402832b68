"""Writers for the binary feature-matrix container and line-delimited manifest.

These mirror the downstream consumer's file contracts byte for byte:
a 16-byte little-endian header (magic "FEAT", version 1, rows, cols)
followed by row-major float32 data, and one JSON object per manifest line
with keys row, sample_id, subject_id, dataset_name, expression_label.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

FEAT_MAGIC = b"FEAT"
FEAT_VERSION = 1
_HEADER = struct.Struct("<4sIII")

MANIFEST_KEYS = ("row", "sample_id", "subject_id", "dataset_name", "expression_label")


def write_matrix(path: str | Path, matrix: np.ndarray) -> None:
    matrix = np.ascontiguousarray(matrix, dtype=np.float32)
    if matrix.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {matrix.shape}")
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(FEAT_MAGIC, FEAT_VERSION, matrix.shape[0], matrix.shape[1]))
        fh.write(matrix.astype("<f4").tobytes())


def write_manifest(path: str | Path, entries: list[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(json.dumps({k: entry[k] for k in MANIFEST_KEYS}, sort_keys=True))
            fh.write("\n")
