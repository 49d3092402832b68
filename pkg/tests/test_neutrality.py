import numpy as np
import pytest

from neutral_gate.codec import ComboScheme
from neutral_gate.learners import ForestConfig, ModelKind, train
from neutral_gate.neutrality import (
    quality_from_confidence,
    read_scores_csv,
    score_samples,
    write_scores_csv,
)

from synthdata import make_records
from neutral_gate.codec import combine


@pytest.mark.parametrize(
    "confidence,expected",
    [(1.0, 100), (0.0, 0), (0.494, 49), (0.495, 50), (0.005, 1), (0.5, 50)],
)
def test_quality_rounding_half_up(confidence, expected):
    assert quality_from_confidence(confidence) == expected


def test_quality_rejects_out_of_range():
    with pytest.raises(ValueError):
        quality_from_confidence(1.5)


def test_quality_monotone_in_confidence():
    grid = np.linspace(0, 1, 1001)
    qualities = [quality_from_confidence(c) for c in grid]
    assert all(b >= a for a, b in zip(qualities, qualities[1:]))


@pytest.fixture(scope="module")
def forest_clf():
    records = make_records(60, seed=8)
    X = np.stack([combine(r, ComboScheme.HSE1C).values for r in records])
    y = np.array([1 if r.expression_label == "neutral" else -1 for r in records])
    cfg = ForestConfig(max_trees=5, active_var_count=50, min_sample_count=4,
                       max_depth=6, oob_epsilon=1e-9, seed=3)
    return train(ModelKind.RANDOM_FOREST, ComboScheme.HSE1C, X, y, None, None, cfg)


def test_score_samples_order_and_length(forest_clf):
    records = make_records(25, seed=9)
    scores = score_samples(forest_clf, records)
    assert [s.sample_id for s in scores] == [r.sample_id for r in records]
    for s in scores:
        assert 0.0 <= s.confidence <= 1.0
        assert s.quality == quality_from_confidence(s.confidence)


def test_score_samples_empty(forest_clf):
    assert score_samples(forest_clf, []) == []


def test_scores_csv_roundtrip(tmp_path, forest_clf):
    records = make_records(10, seed=10)
    scores = score_samples(forest_clf, records)
    path = tmp_path / "scores.csv"
    write_scores_csv(path, scores)
    lines = path.read_text().splitlines()
    assert lines[0] == "sample_id,confidence,quality"
    assert len(lines) == 11
    loaded = read_scores_csv(path)
    assert [s.sample_id for s in loaded] == [s.sample_id for s in scores]
    for a, b in zip(loaded, scores):
        assert a.confidence == pytest.approx(b.confidence, abs=1e-9)
        assert a.quality == b.quality


def test_parallel_scoring_matches_serial(forest_clf, monkeypatch):
    records = make_records(130, seed=11)
    monkeypatch.setenv("NEUTRAL_GATE_THREADS", "1")
    serial = score_samples(forest_clf, records)
    monkeypatch.setenv("NEUTRAL_GATE_THREADS", "4")
    parallel = score_samples(forest_clf, records)
    assert [s.confidence for s in serial] == [s.confidence for s in parallel]
