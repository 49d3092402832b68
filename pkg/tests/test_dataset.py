from collections import Counter

import pytest

from neutral_gate.dataset import (
    BinaryLabel,
    DatasetError,
    SplitSpec,
    balance,
    balance_per_dataset,
    binarize,
    split_identity_disjoint,
)

from synthdata import make_record, make_records

import numpy as np


def labeled(n_neutral, n_non_neutral, seed=0, n_subjects=10, dataset_name="synthetic"):
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n_neutral):
        records.append(make_record(rng, f"n{i}", f"subj{i % n_subjects}", "neutral", dataset_name))
    for i in range(n_non_neutral):
        records.append(make_record(rng, f"x{i}", f"subj{i % n_subjects}", "happiness", dataset_name))
    return binarize(records)


class TestBinarize:
    @pytest.mark.parametrize(
        "label", ["anger", "contempt", "disgust", "fear", "happiness", "sadness", "surprise", "non_neutral_unspecified"]
    )
    def test_non_neutral_labels(self, rng, label):
        [sample] = binarize([make_record(rng, "a", "s", label)])
        assert sample.label is BinaryLabel.NON_NEUTRAL

    def test_neutral_label(self, rng):
        [sample] = binarize([make_record(rng, "a", "s", "neutral")])
        assert sample.label is BinaryLabel.NEUTRAL

    def test_empty(self):
        assert binarize([]) == []


class TestBalance:
    def test_downsamples_majority(self):
        samples = labeled(100, 60)
        out = balance(samples, seed=7)
        counts = Counter(s.label for s in out)
        assert counts[BinaryLabel.NEUTRAL] == 60
        assert counts[BinaryLabel.NON_NEUTRAL] == 60

    def test_output_is_subset(self):
        samples = labeled(30, 12)
        out = balance(samples, seed=3)
        ids_in = [s.record.sample_id for s in samples]
        assert all(s.record.sample_id in ids_in for s in out)
        assert len({s.record.sample_id for s in out}) == len(out)

    def test_already_balanced_unchanged(self):
        samples = labeled(50, 50)
        out = balance(samples, seed=1)
        assert Counter(id(s) for s in out) == Counter(id(s) for s in samples)

    def test_one_class_absent_errors(self):
        samples = labeled(0, 10)
        with pytest.raises(DatasetError):
            balance(samples, seed=0)

    def test_deterministic(self):
        samples = labeled(80, 20, seed=5)
        a = [s.record.sample_id for s in balance(samples, seed=11)]
        b = [s.record.sample_id for s in balance(samples, seed=11)]
        assert a == b

    def test_per_dataset_balances_each_group(self):
        samples = labeled(20, 10, dataset_name="d1") + labeled(5, 15, seed=1, dataset_name="d2")
        out = balance_per_dataset(samples, seed=0)
        for name, n_expected in (("d1", 10), ("d2", 5)):
            counts = Counter(s.label for s in out if s.record.dataset_name == name)
            assert counts[BinaryLabel.NEUTRAL] == n_expected
            assert counts[BinaryLabel.NON_NEUTRAL] == n_expected

    def test_per_dataset_drops_single_class_groups(self):
        samples = labeled(10, 10, dataset_name="d1") + labeled(7, 0, seed=1, dataset_name="d2")
        out = balance_per_dataset(samples, seed=0)
        assert all(s.record.dataset_name == "d1" for s in out)


class TestSplit:
    def test_ten_subjects_thirty_percent(self):
        rng = np.random.default_rng(0)
        records = [
            make_record(rng, f"s{i}_{j}", f"subj{i}", "neutral") for i in range(10) for j in range(10)
        ]
        train, val = split_identity_disjoint(binarize(records), SplitSpec(0.30, seed=4))
        assert len(val) == 30 and len(train) == 70
        train_subj = {s.record.subject_id for s in train}
        val_subj = {s.record.subject_id for s in val}
        assert not train_subj & val_subj
        assert len(train) + len(val) == 100

    def test_two_subjects_one_each(self):
        rng = np.random.default_rng(0)
        records = [make_record(rng, f"a{j}", "subjA", "neutral") for j in range(5)]
        records += [make_record(rng, f"b{j}", "subjB", "anger") for j in range(5)]
        train, val = split_identity_disjoint(binarize(records), SplitSpec(0.30, seed=1))
        assert {s.record.subject_id for s in train} != {s.record.subject_id for s in val}
        assert len({s.record.subject_id for s in train}) == 1
        assert len({s.record.subject_id for s in val}) == 1

    def test_single_subject_errors(self):
        rng = np.random.default_rng(0)
        samples = binarize([make_record(rng, f"a{j}", "only", "neutral") for j in range(4)])
        with pytest.raises(DatasetError):
            split_identity_disjoint(samples, SplitSpec(0.30, seed=0))

    def test_deterministic(self):
        samples = labeled(40, 40, n_subjects=12)
        spec = SplitSpec(0.30, seed=9)
        t1, v1 = split_identity_disjoint(samples, spec)
        t2, v2 = split_identity_disjoint(samples, spec)
        assert [s.record.sample_id for s in t1] == [s.record.sample_id for s in t2]
        assert [s.record.sample_id for s in v1] == [s.record.sample_id for s in v2]

    def test_union_equals_input(self):
        samples = labeled(25, 35, n_subjects=7)
        train, val = split_identity_disjoint(samples, SplitSpec(0.30, seed=2))
        assert Counter(s.record.sample_id for s in train + val) == Counter(
            s.record.sample_id for s in samples
        )

    def test_bad_fraction_rejected(self):
        with pytest.raises(DatasetError):
            SplitSpec(validation_fraction=1.0)
