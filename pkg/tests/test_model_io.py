import numpy as np
import pytest

from neutral_gate.codec import ComboScheme
from neutral_gate.learners import (
    BoostConfig,
    ForestConfig,
    ModelError,
    ModelKind,
    SvmConfig,
    load_model,
    save_model,
    train,
)


def separable(n, dim, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, dim))
    y = np.where(X[:, 0] > 0, 1, -1).astype(np.int64)
    X[:, 0] += y * 1.5
    return X, y


CONFIGS = {
    ModelKind.SVM: SvmConfig(C=3.0, gamma=0.5),
    ModelKind.RANDOM_FOREST: ForestConfig(max_trees=6, active_var_count=2, min_sample_count=4,
                                          max_depth=5, oob_epsilon=1e-9, seed=1),
    ModelKind.ADABOOST: BoostConfig(weak_count=5, min_sample_count=4, max_depth=2, seed=1),
}


@pytest.mark.parametrize("kind", list(ModelKind))
def test_roundtrip_preserves_confidences(tmp_path, kind):
    X, y = separable(80, 5, seed=3)
    clf = train(kind, ComboScheme.HSE1, X, y, X, y, CONFIGS[kind])
    path = tmp_path / "model.ngmd"
    save_model(clf, path)
    loaded = load_model(path)
    assert loaded.kind is kind
    assert loaded.scheme is ComboScheme.HSE1

    probes = np.random.default_rng(9).normal(size=(100, 5))
    before = clf.model.confidence(probes)
    after = loaded.model.confidence(probes)
    assert np.array_equal(before, after)


def test_save_is_deterministic(tmp_path):
    X, y = separable(50, 4, seed=5)
    clf = train(ModelKind.SVM, ComboScheme.HSE2, X, y, None, None, CONFIGS[ModelKind.SVM])
    p1, p2 = tmp_path / "a", tmp_path / "b"
    save_model(clf, p1)
    save_model(clf, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_magic_present(tmp_path):
    X, y = separable(30, 3, seed=1)
    clf = train(ModelKind.ADABOOST, ComboScheme.HSE1, X, y, None, None, CONFIGS[ModelKind.ADABOOST])
    path = tmp_path / "m"
    save_model(clf, path)
    assert path.read_bytes()[:4] == b"NGMD"


def test_corrupted_payload_fails_checksum(tmp_path):
    X, y = separable(30, 3, seed=2)
    clf = train(ModelKind.RANDOM_FOREST, ComboScheme.HSE1, X, y, None, None,
                CONFIGS[ModelKind.RANDOM_FOREST])
    path = tmp_path / "m"
    save_model(clf, path)
    data = bytearray(path.read_bytes())
    data[30] ^= 0xFF
    path.write_bytes(bytes(data))
    with pytest.raises(ModelError, match="checksum"):
        load_model(path)


def test_kind_mismatch_on_load(tmp_path):
    X, y = separable(30, 3, seed=2)
    clf = train(ModelKind.SVM, ComboScheme.HSE1, X, y, None, None, CONFIGS[ModelKind.SVM])
    path = tmp_path / "m"
    save_model(clf, path)
    with pytest.raises(ModelError, match="expected RANDOM_FOREST"):
        load_model(path, expected_kind=ModelKind.RANDOM_FOREST)


def test_version_mismatch(tmp_path):
    X, y = separable(30, 3, seed=2)
    clf = train(ModelKind.SVM, ComboScheme.HSE1, X, y, None, None, CONFIGS[ModelKind.SVM])
    path = tmp_path / "m"
    save_model(clf, path)
    data = bytearray(path.read_bytes())
    data[4] = 99
    path.write_bytes(bytes(data))
    with pytest.raises(ModelError, match="version"):
        load_model(path)


def test_scheme_dim_enforced_at_predict(tmp_path):
    X, y = separable(30, 3, seed=2)
    clf = train(ModelKind.SVM, ComboScheme.HSE1, X, y, None, None, CONFIGS[ModelKind.SVM])
    with pytest.raises(ModelError, match="1280"):
        clf.predict_confidence(np.zeros((2, 3)))
    with pytest.raises(ModelError, match="scheme mismatch"):
        clf.predict_confidence(np.zeros((2, 1408)), scheme=ComboScheme.HSE2)
