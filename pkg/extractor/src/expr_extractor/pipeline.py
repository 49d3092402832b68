"""Feature and comparison extraction jobs.

The labels file is a CSV with header sample_id,subject_id,dataset_name,
expression_label where sample_id doubles as the image path relative to
image_root. Output row order always equals labels-file order regardless
of batch size; undecodable images are logged and skipped, and the
manifest simply omits them (rows renumbered over the kept samples).
"""

from __future__ import annotations

import csv
import itertools
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image, UnidentifiedImageError
from torchvision import transforms

from .featio import write_manifest, write_matrix
from .models import (
    NORMALIZE_MEAN,
    NORMALIZE_STD,
    PREPROCESSING,
    CheckpointError,
    load_expression_model,
    load_fr_model,
    resolve_device,
)

log = logging.getLogger("expr_extractor")

LABELS_HEADER = ["sample_id", "subject_id", "dataset_name", "expression_label"]


class ExtractError(Exception):
    pass


@dataclass(frozen=True)
class ExtractionJob:
    image_root: Path
    labels_file: Path
    checkpoint_1: Path
    checkpoint_2: Path
    output_dir: Path
    device: str = "cpu"
    batch_size: int = 16


def _read_labels(path: Path) -> list[dict]:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != LABELS_HEADER:
            raise ExtractError(f"{path}: expected header {','.join(LABELS_HEADER)}, got {reader.fieldnames}")
        rows = list(reader)
    seen = set()
    for row in rows:
        if row["sample_id"] in seen:
            raise ExtractError(f"duplicate sample_id {row['sample_id']!r} in {path}")
        seen.add(row["sample_id"])
    return rows


def _build_transform(spec: dict) -> transforms.Compose:
    return transforms.Compose([
        transforms.Resize(spec["resize"]),
        transforms.CenterCrop(spec["crop"]),
        transforms.ToTensor(),
        transforms.Normalize(NORMALIZE_MEAN, NORMALIZE_STD),
    ])


def _load_images(image_root: Path, rows: list[dict]) -> tuple[list[dict], list[Image.Image]]:
    """Decode each referenced image; skip and log rows that fail."""
    kept_rows, images = [], []
    for row in rows:
        path = image_root / row["sample_id"]
        try:
            with Image.open(path) as img:
                images.append(img.convert("RGB"))
            kept_rows.append(row)
        except (FileNotFoundError, UnidentifiedImageError, OSError) as exc:
            log.warning("skipping undecodable image %s: %s", path, exc)
    return kept_rows, images


def _run_batched(model, images: list[Image.Image], transform, device, batch_size: int):
    """Forward all images preserving order; returns the stacked outputs."""
    outputs = []
    with torch.no_grad():
        for start in range(0, len(images), batch_size):
            batch = torch.stack([transform(im) for im in images[start:start + batch_size]])
            outputs.append(model(batch.to(device)))
    return outputs


def extract_features(job: ExtractionJob) -> dict[str, Path]:
    """Emit hse1/hse2/softmax1/softmax2 matrices plus an aligned manifest."""
    rows = _read_labels(job.labels_file)
    device = resolve_device(job.device)
    model_1 = load_expression_model(job.checkpoint_1, "b0", device)
    model_2 = load_expression_model(job.checkpoint_2, "b2", device)

    kept_rows, images = _load_images(job.image_root, rows)

    parts = {"hse1": [], "softmax1": [], "hse2": [], "softmax2": []}
    for name, model in (("1", model_1), ("2", model_2)):
        transform = _build_transform(PREPROCESSING[model.variant])
        for emb, probs in _run_batched(model, images, transform, device, job.batch_size):
            parts[f"hse{name}"].append(emb.cpu().numpy())
            parts[f"softmax{name}"].append(probs.cpu().numpy())

    job.output_dir.mkdir(parents=True, exist_ok=True)
    out = {}
    for name, dim in (("hse1", model_1.embedding_dim), ("hse2", model_2.embedding_dim),
                      ("softmax1", 8), ("softmax2", 8)):
        chunks = parts[name]
        matrix = np.concatenate(chunks, axis=0) if chunks else np.zeros((0, dim), np.float32)
        out[name] = job.output_dir / f"{name}.feat"
        write_matrix(out[name], matrix)

    entries = [
        {
            "row": i,
            "sample_id": row["sample_id"],
            "subject_id": row["subject_id"],
            "dataset_name": row["dataset_name"],
            "expression_label": row["expression_label"],
        }
        for i, row in enumerate(kept_rows)
    ]
    out["manifest"] = job.output_dir / "manifest.jsonl"
    write_manifest(out["manifest"], entries)

    out["preprocessing"] = job.output_dir / "preprocessing.json"
    with open(out["preprocessing"], "w", encoding="utf-8") as fh:
        json.dump(
            {
                "hse1": PREPROCESSING["b0"],
                "hse2": PREPROCESSING["b2"],
                "normalize_mean": NORMALIZE_MEAN,
                "normalize_std": NORMALIZE_STD,
            },
            fh,
            indent=2,
            sort_keys=True,
        )
    return out


def extract_comparisons(
    image_root: Path,
    labels_file: Path,
    fr_checkpoint: Path,
    out_path: Path,
    device: str = "cpu",
    batch_size: int = 16,
) -> int:
    """Emit all within-subject mated pairs with cosine similarity; returns the pair count."""
    rows = _read_labels(labels_file)
    dev = resolve_device(device)
    model = load_fr_model(fr_checkpoint, dev)
    kept_rows, images = _load_images(image_root, rows)

    transform = _build_transform(PREPROCESSING["fr"])
    chunks = [o.cpu().numpy() for o in _run_batched(model, images, transform, dev, batch_size)]
    embeddings = np.concatenate(chunks, axis=0) if chunks else np.zeros((0, 1), np.float32)
    norms = np.linalg.norm(embeddings, axis=1, keepdims=True)
    unit = embeddings / np.maximum(norms, 1e-12)

    by_subject: dict[str, list[int]] = {}
    for i, row in enumerate(kept_rows):
        by_subject.setdefault(row["subject_id"], []).append(i)

    n_pairs = 0
    with open(out_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("probe_id,reference_id,similarity\n")
        for subject in sorted(by_subject):
            indices = by_subject[subject]
            if len(indices) < 2:
                log.info("subject %s has a single image; no mated pairs", subject)
                continue
            for i, j in itertools.combinations(indices, 2):
                sim = float(unit[i] @ unit[j])
                fh.write(f"{kept_rows[i]['sample_id']},{kept_rows[j]['sample_id']},{sim:.9g}\n")
                n_pairs += 1
    return n_pairs
