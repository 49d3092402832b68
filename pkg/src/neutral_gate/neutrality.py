"""Neutrality confidence to component quality mapping and batch scoring."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .codec import FeatureRecord, combine
from .learners.model_io import TrainedClassifier

THREADS_ENV = "NEUTRAL_GATE_THREADS"


@dataclass(frozen=True)
class NeutralityQuality:
    sample_id: str
    confidence: float
    quality: int


def quality_from_confidence(confidence: float) -> int:
    """Map [0,1] confidence to an integer quality in [0,100], rounding half-up."""
    if not 0.0 <= confidence <= 1.0:
        raise ValueError(f"confidence must be in [0,1], got {confidence}")
    return min(100, int(math.floor(100.0 * confidence + 0.5)))


def worker_count() -> int:
    """Thread cap from NEUTRAL_GATE_THREADS (0 or unset = auto)."""
    raw = os.environ.get(THREADS_ENV, "0")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = os.cpu_count() or 1
    return n


def score_samples(model: TrainedClassifier, records: list[FeatureRecord]) -> list[NeutralityQuality]:
    """Score records in order; batches may run on several threads."""
    if not records:
        return []
    X = np.stack([combine(r, model.scheme).values for r in records]).astype(np.float64)

    threads = min(worker_count(), len(records))
    if threads <= 1 or len(records) < 64:
        conf = model.predict_confidence(X)
    else:
        chunks = np.array_split(np.arange(len(records)), threads)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda idx: model.predict_confidence(X[idx]), chunks))
        conf = np.concatenate(parts)

    return [
        NeutralityQuality(
            sample_id=r.sample_id,
            confidence=float(c),
            quality=quality_from_confidence(float(c)),
        )
        for r, c in zip(records, conf)
    ]


def write_scores_csv(path: str | Path, scores: list[NeutralityQuality]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("sample_id,confidence,quality\n")
        for s in scores:
            fh.write(f"{s.sample_id},{s.confidence:.9g},{s.quality}\n")


def read_scores_csv(path: str | Path) -> list[NeutralityQuality]:
    scores = []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "sample_id,confidence,quality":
            raise ValueError(f"{path}: unexpected scores header {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            sample_id, conf, quality = line.split(",")
            scores.append(
                NeutralityQuality(sample_id=sample_id, confidence=float(conf), quality=int(quality))
            )
    return scores
