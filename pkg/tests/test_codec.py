import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from neutral_gate.codec import (
    CodecError,
    ComboScheme,
    combine,
    load_records,
    read_matrix,
    write_matrix,
)

from synthdata import make_record, make_records, write_feature_dir

SCHEME_DIMS = {
    ComboScheme.HSE1: 1280,
    ComboScheme.HSE2: 1408,
    ComboScheme.HSE1C: 1288,
    ComboScheme.HSE2C: 1416,
    ComboScheme.HSE12: 2688,
    ComboScheme.HSE12C: 2704,
}


class TestMatrixFile:
    def test_2x3_zero_matrix_is_40_bytes(self, tmp_path):
        path = tmp_path / "m.feat"
        write_matrix(path, np.zeros((2, 3)))
        assert path.stat().st_size == 40

    def test_empty_matrix_is_16_bytes_and_valid(self, tmp_path):
        path = tmp_path / "m.feat"
        write_matrix(path, np.zeros((0, 0)))
        assert path.stat().st_size == 16
        assert read_matrix(path).shape == (0, 0)

    def test_roundtrip_bit_exact(self, tmp_path, rng):
        path = tmp_path / "m.feat"
        m = rng.normal(size=(17, 5)).astype(np.float32)
        write_matrix(path, m)
        out = read_matrix(path)
        assert out.dtype == np.float32
        assert np.array_equal(m.view(np.uint32), out.view(np.uint32))

    def test_single_row_backbone_width(self, tmp_path, rng):
        path = tmp_path / "m.feat"
        write_matrix(path, rng.normal(size=(1, 1280)).astype(np.float32))
        assert read_matrix(path).shape == (1, 1280)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "m.feat"
        write_matrix(path, np.zeros((1, 1)))
        data = bytearray(path.read_bytes())
        data[:4] = b"FEAX"
        path.write_bytes(bytes(data))
        with pytest.raises(CodecError, match="magic"):
            read_matrix(path)

    def test_bad_version_rejected(self, tmp_path):
        path = tmp_path / "m.feat"
        write_matrix(path, np.zeros((1, 1)))
        data = bytearray(path.read_bytes())
        struct.pack_into("<I", data, 4, 7)
        path.write_bytes(bytes(data))
        with pytest.raises(CodecError, match="version"):
            read_matrix(path)

    def test_truncated_payload_rejected(self, tmp_path):
        path = tmp_path / "m.feat"
        write_matrix(path, np.ones((2, 2)))
        path.write_bytes(path.read_bytes()[:-1])
        with pytest.raises(CodecError, match="bytes"):
            read_matrix(path)

    @settings(max_examples=30, deadline=None)
    @given(rows=st.integers(0, 20), cols=st.integers(0, 20), seed=st.integers(0, 2**31))
    def test_roundtrip_property(self, tmp_path_factory, rows, cols, seed):
        path = tmp_path_factory.mktemp("feat") / "m.feat"
        m = np.random.default_rng(seed).normal(size=(rows, cols)).astype(np.float32)
        write_matrix(path, m)
        assert np.array_equal(read_matrix(path), m)


class TestCombine:
    @pytest.mark.parametrize("scheme", list(ComboScheme))
    def test_dimensions(self, rng, scheme):
        record = make_record(rng, "a", "s", "neutral")
        assert combine(record, scheme).values.shape == (SCHEME_DIMS[scheme],)

    def test_hse1_is_identity(self, rng):
        record = make_record(rng, "a", "s", "happiness")
        assert np.array_equal(combine(record, ComboScheme.HSE1).values, record.hse1)

    def test_position_stability(self, rng):
        record = make_record(rng, "a", "s", "anger")
        full = combine(record, ComboScheme.HSE12C).values
        assert np.array_equal(full[:1280], record.hse1)
        assert np.array_equal(full[1280:2688], record.hse2)
        assert np.array_equal(full[2688:2696], record.softmax1)
        assert np.array_equal(full[2696:], record.softmax2)

    def test_concatenation_order_hse1c_hse2c(self, rng):
        record = make_record(rng, "a", "s", "fear")
        v1 = combine(record, ComboScheme.HSE1C).values
        assert np.array_equal(v1[:1280], record.hse1)
        assert np.array_equal(v1[1280:], record.softmax1)
        v2 = combine(record, ComboScheme.HSE2C).values
        assert np.array_equal(v2[:1408], record.hse2)
        assert np.array_equal(v2[1408:], record.softmax2)


class TestLoadRecords:
    def test_loads_all_rows(self, tmp_path):
        records = make_records(12, seed=1)
        manifest, feature_dir = write_feature_dir(tmp_path, records)
        loaded = load_records(manifest, feature_dir)
        assert len(loaded) == 12
        assert [r.sample_id for r in loaded] == [r.sample_id for r in records]
        assert np.array_equal(loaded[3].hse1, records[3].hse1)

    def test_empty_manifest(self, tmp_path):
        manifest, feature_dir = write_feature_dir(tmp_path, [])
        assert load_records(manifest, feature_dir) == []

    def test_row_count_mismatch(self, tmp_path):
        records = make_records(10, seed=2)
        manifest, feature_dir = write_feature_dir(tmp_path, records)
        write_matrix(feature_dir / "hse1.feat", np.zeros((11, 1280), dtype=np.float32))
        with pytest.raises(CodecError, match="row count"):
            load_records(manifest, feature_dir)

    def test_duplicate_sample_id(self, tmp_path):
        records = make_records(4, seed=3)
        manifest, feature_dir = write_feature_dir(tmp_path, records)
        manifest.write_text(manifest.read_text().replace("s0001", "s0000"))
        with pytest.raises(CodecError, match="duplicate"):
            load_records(manifest, feature_dir)

    def test_unknown_expression_label(self, tmp_path):
        records = make_records(3, seed=4)
        manifest, feature_dir = write_feature_dir(tmp_path, records)
        manifest.write_text(manifest.read_text().replace("neutral", "squint"))
        with pytest.raises(CodecError, match="expression label"):
            load_records(manifest, feature_dir)

    def test_row_out_of_range(self, tmp_path):
        records = make_records(3, seed=5)
        manifest, feature_dir = write_feature_dir(tmp_path, records)
        manifest.write_text(manifest.read_text().replace('"row": 2', '"row": 9'))
        with pytest.raises(CodecError, match="out of range"):
            load_records(manifest, feature_dir)
