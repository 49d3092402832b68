"""Binary relabeling, class balancing and identity-disjoint splitting."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .codec import FeatureRecord


class DatasetError(Exception):
    """Invalid balancing or splitting input."""


class BinaryLabel(enum.Enum):
    NEUTRAL = "neutral"
    NON_NEUTRAL = "non_neutral"


@dataclass(frozen=True)
class LabeledSample:
    record: FeatureRecord
    label: BinaryLabel


@dataclass(frozen=True)
class SplitSpec:
    validation_fraction: float = 0.30
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.validation_fraction < 1.0:
            raise DatasetError(
                f"validation_fraction must be in (0,1), got {self.validation_fraction}"
            )


def binarize(records: list[FeatureRecord]) -> list[LabeledSample]:
    """Map neutral to NEUTRAL and every other expression to NON_NEUTRAL."""
    return [
        LabeledSample(
            record=r,
            label=BinaryLabel.NEUTRAL
            if r.expression_label == "neutral"
            else BinaryLabel.NON_NEUTRAL,
        )
        for r in records
    ]


def balance(samples: list[LabeledSample], seed: int) -> list[LabeledSample]:
    """Down-sample the majority class uniformly at random to equal class counts.

    The minority class is kept in full. Output order is deterministic given the
    seed: kept samples stay in their original relative order.
    """
    neutral_idx = [i for i, s in enumerate(samples) if s.label is BinaryLabel.NEUTRAL]
    non_neutral_idx = [i for i, s in enumerate(samples) if s.label is BinaryLabel.NON_NEUTRAL]
    if not neutral_idx or not non_neutral_idx:
        raise DatasetError("balance requires both classes to be present")

    if len(neutral_idx) >= len(non_neutral_idx):
        majority, target = neutral_idx, len(non_neutral_idx)
    else:
        majority, target = non_neutral_idx, len(neutral_idx)

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    kept_majority = set(rng.choice(len(majority), size=target, replace=False).tolist())
    dropped = {majority[j] for j in range(len(majority)) if j not in kept_majority}
    return [s for i, s in enumerate(samples) if i not in dropped]


def balance_per_dataset(samples: list[LabeledSample], seed: int) -> list[LabeledSample]:
    """Balance within each dataset_name group; single-class groups are dropped.

    Each kept group contributes equal class counts, so the union is balanced.
    """
    groups: dict[str, list[LabeledSample]] = {}
    for s in samples:
        groups.setdefault(s.record.dataset_name, []).append(s)

    seeds = np.random.SeedSequence(seed).spawn(len(groups))
    out: list[LabeledSample] = []
    for sub_seed, (_, group) in zip(seeds, sorted(groups.items())):
        labels = {s.label for s in group}
        if len(labels) < 2:
            continue
        out.extend(balance(group, int(sub_seed.generate_state(1)[0])))
    if not out:
        raise DatasetError("no dataset group contains both classes")
    return out


def split_identity_disjoint(
    samples: list[LabeledSample], spec: SplitSpec
) -> tuple[list[LabeledSample], list[LabeledSample]]:
    """Split into train/validation with no subject appearing in both partitions.

    Subjects are assigned whole: after a seeded shuffle, subjects are moved into
    validation greedily until its sample share reaches validation_fraction as
    closely as whole-subject assignment allows.
    """
    by_subject: dict[str, list[int]] = {}
    for i, s in enumerate(samples):
        by_subject.setdefault(s.record.subject_id, []).append(i)
    if len(by_subject) < 2:
        raise DatasetError("identity-disjoint split requires at least 2 subjects")

    subjects = sorted(by_subject)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(spec.seed)))
    rng.shuffle(subjects)

    n_total = len(samples)
    target = spec.validation_fraction * n_total
    val_subjects: set[str] = set()
    val_count = 0
    for subj in subjects:
        size = len(by_subject[subj])
        if len(val_subjects) == len(subjects) - 1:
            break  # keep at least one subject for training
        # take the subject only if it brings the share closer to the target
        if abs(val_count + size - target) <= abs(val_count - target):
            val_subjects.add(subj)
            val_count += size
    if not val_subjects:
        val_subjects.add(subjects[0])

    train = [s for s in samples if s.record.subject_id not in val_subjects]
    validation = [s for s in samples if s.record.subject_id in val_subjects]
    return train, validation
