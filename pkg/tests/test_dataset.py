"""Dataset generation, split arithmetic, and container round-trip tests."""

import struct

import numpy as np
import pytest

from specsense import dataset
from specsense.dataset import (
    BadMagicError,
    Dataset,
    DatasetFormatError,
    LabeledExample,
    LabelRangeError,
    Task,
    TruncatedRecordError,
    VersionMismatchError,
)


@pytest.fixture(scope="module")
def small_mod():
    return dataset.generate_dataset(Task.MODULATION, 2, (-4, 12), seed=71, n=64)


@pytest.fixture(scope="module")
def small_interf():
    return dataset.generate_dataset(Task.INTERFERENCE, 1, (0,), seed=72, n=64)


class TestSegment:
    def test_windows_and_remainder(self):
        out = dataset.segment(np.arange(10), 4)
        np.testing.assert_array_equal(out, [[0, 1, 2, 3], [4, 5, 6, 7]])

    def test_exact_fit(self):
        assert dataset.segment(np.arange(8), 4).shape == (2, 4)

    def test_short_stream_rejected(self):
        with pytest.raises(ValueError):
            dataset.segment(np.arange(3), 4)


class TestGenerate:
    def test_exact_balance(self, small_mod):
        assert len(small_mod.examples) == 11 * 2 * 2
        counts = small_mod.class_counts()
        np.testing.assert_array_equal(counts, np.full(11, 4))

    def test_capture_shape_and_dtype(self, small_mod):
        for ex in small_mod.examples:
            assert ex.capture.shape == (64,)
            assert ex.capture.dtype == np.complex64
            assert np.all(np.isfinite(ex.capture.view(np.float32)))

    def test_snr_labels_on_grid(self, small_mod):
        assert set(int(s) for s in small_mod.snrs()) == {-4, 12}

    def test_interference_classes(self, small_interf):
        assert small_interf.k == 15
        assert len(small_interf.examples) == 15

    def test_deterministic_regeneration(self, small_mod):
        again = dataset.generate_dataset(Task.MODULATION, 2, (-4, 12), seed=71, n=64)
        np.testing.assert_array_equal(small_mod.captures(), again.captures())

    def test_seed_changes_output(self, small_mod):
        other = dataset.generate_dataset(Task.MODULATION, 2, (-4, 12), seed=99, n=64)
        assert np.any(small_mod.captures() != other.captures())

    def test_per_example_stream_is_order_free(self, small_mod):
        """Example (ci, si, m) can be regenerated in isolation."""
        ci, si, m = 3, 1, 0
        rng = dataset.derive_rng(71, ci, si, m)
        capture = dataset._generate_example(Task.MODULATION, ci, 12, rng, 64)
        index = ci * 4 + si * 2 + m
        np.testing.assert_array_equal(capture, small_mod.examples[index].capture)

    def test_validation(self):
        with pytest.raises(ValueError):
            dataset.generate_dataset(Task.MODULATION, 0, (0,), seed=1)
        with pytest.raises(ValueError):
            dataset.generate_dataset(Task.MODULATION, 1, (), seed=1)
        with pytest.raises(ValueError):
            dataset.generate_dataset(Task.MODULATION, 1, (25,), seed=1)

    def test_onehot(self):
        ex = LabeledExample(np.zeros(4, dtype=np.complex64), 2, 0)
        vec = ex.onehot(5)
        assert vec.sum() == 1.0 and vec[2] == 1.0


class TestSplit:
    def test_sizes_100(self):
        caps = [LabeledExample(np.zeros(8, dtype=np.complex64), 0, 0) for _ in range(100)]
        ds = Dataset(Task.MODULATION, ("A",), (0,), caps)
        train, val, test = dataset.split(ds, 0.67, seed=5)
        assert (len(train.examples), len(val.examples), len(test.examples)) == (67, 17, 16)

    def test_partition_no_loss_no_overlap(self, small_mod):
        train, val, test = dataset.split(small_mod, 0.67, seed=6)
        total = len(train.examples) + len(val.examples) + len(test.examples)
        assert total == len(small_mod.examples)

        def keys(ds):
            return [ex.capture.tobytes() for ex in ds.examples]

        combined = sorted(keys(train) + keys(val) + keys(test))
        assert combined == sorted(keys(small_mod))

    def test_deterministic(self, small_mod):
        a = dataset.split(small_mod, 0.67, seed=7)
        b = dataset.split(small_mod, 0.67, seed=7)
        for part_a, part_b in zip(a, b):
            assert [e.label for e in part_a.examples] == [e.label for e in part_b.examples]

    def test_bad_fraction(self, small_mod):
        with pytest.raises(ValueError):
            dataset.split(small_mod, 1.0, seed=1)


class TestContainer:
    def test_round_trip_bit_exact(self, small_mod, tmp_path):
        path = tmp_path / "mod.spds"
        dataset.save_dataset(small_mod, path)
        loaded = dataset.load_dataset(path)
        assert loaded.task is Task.MODULATION
        assert loaded.class_names == small_mod.class_names
        assert loaded.snr_grid == small_mod.snr_grid
        np.testing.assert_array_equal(loaded.captures(), small_mod.captures())
        np.testing.assert_array_equal(loaded.labels(), small_mod.labels())
        np.testing.assert_array_equal(loaded.snrs(), small_mod.snrs())

    def test_interference_round_trip(self, small_interf, tmp_path):
        path = tmp_path / "interf.spds"
        dataset.save_dataset(small_interf, path)
        loaded = dataset.load_dataset(path)
        assert loaded.task is Task.INTERFERENCE
        np.testing.assert_array_equal(loaded.captures(), small_interf.captures())

    def test_same_seed_same_bytes(self, tmp_path):
        a = dataset.generate_dataset(Task.MODULATION, 1, (0,), seed=13, n=32)
        b = dataset.generate_dataset(Task.MODULATION, 1, (0,), seed=13, n=32)
        pa, pb = tmp_path / "a.spds", tmp_path / "b.spds"
        dataset.save_dataset(a, pa)
        dataset.save_dataset(b, pb)
        assert pa.read_bytes() == pb.read_bytes()

    def test_bad_magic(self, small_mod, tmp_path):
        path = tmp_path / "bad.spds"
        dataset.save_dataset(small_mod, path)
        raw = bytearray(path.read_bytes())
        raw[0] = ord(b"X")
        path.write_bytes(bytes(raw))
        with pytest.raises(BadMagicError):
            dataset.load_dataset(path)

    def test_version_mismatch(self, small_mod, tmp_path):
        path = tmp_path / "ver.spds"
        dataset.save_dataset(small_mod, path)
        raw = bytearray(path.read_bytes())
        raw[8:12] = struct.pack("<I", 9)
        path.write_bytes(bytes(raw))
        with pytest.raises(VersionMismatchError):
            dataset.load_dataset(path)

    def test_truncated(self, small_mod, tmp_path):
        path = tmp_path / "trunc.spds"
        dataset.save_dataset(small_mod, path)
        raw = path.read_bytes()
        path.write_bytes(raw[: len(raw) - 7])
        with pytest.raises(TruncatedRecordError):
            dataset.load_dataset(path)

    def test_label_out_of_range(self, small_mod, tmp_path):
        path = tmp_path / "label.spds"
        dataset.save_dataset(small_mod, path)
        raw = bytearray(path.read_bytes())
        offset = 8 + 20 + 2 * len(small_mod.snr_grid)
        for name in small_mod.class_names:
            offset += 2 + len(name.encode("utf-8"))
        raw[offset : offset + 2] = struct.pack("<H", small_mod.k)
        path.write_bytes(bytes(raw))
        with pytest.raises(LabelRangeError):
            dataset.load_dataset(path)

    def test_trailing_bytes_rejected(self, small_mod, tmp_path):
        path = tmp_path / "trail.spds"
        dataset.save_dataset(small_mod, path)
        path.write_bytes(path.read_bytes() + b"\x00")
        with pytest.raises(DatasetFormatError):
            dataset.load_dataset(path)

    def test_error_hierarchy(self):
        for err in (BadMagicError, VersionMismatchError, TruncatedRecordError, LabelRangeError):
            assert issubclass(err, DatasetFormatError)
            assert issubclass(err, ValueError)
