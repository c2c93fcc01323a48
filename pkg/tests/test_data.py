import struct

import numpy as np
import pytest

from src.core.data import (
    batches,
    dataset_files,
    denormalize_bytes,
    load_idx,
    load_raw,
    load_samples,
    normalize,
    prepare,
    read_idx,
    write_idx,
)
from src.core.data.idx import IMAGES_MAGIC, LABELS_MAGIC
from src.core.exceptions import BadMagicError, CountMismatchError, DataError, SampleSizeError, TruncatedFileError
from src.schemas.config import DatasetName, DatasetSpec

from tests.helpers import synthetic_raw, write_dataset, write_mnist


class TestIdx:
    def test_reads_images_and_labels(self, tmp_path):
        images, labels = synthetic_raw([3, 1, 4])
        write_idx(tmp_path / "images", images)
        write_idx(tmp_path / "labels", labels)
        got_images, got_labels = load_idx(tmp_path / "images", tmp_path / "labels")
        assert got_images.shape == (3, 28, 28)
        assert got_images.dtype == np.uint8
        np.testing.assert_array_equal(got_images, images)
        np.testing.assert_array_equal(got_labels, [3, 1, 4])

    def test_gzip_is_transparent(self, tmp_path):
        images, _ = synthetic_raw([0, 1])
        write_idx(tmp_path / "images.gz", images)
        np.testing.assert_array_equal(read_idx(tmp_path / "images.gz", IMAGES_MAGIC), images)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "labels"
        path.write_bytes(struct.pack(">ii", 0x00000802, 1) + b"\x00")
        with pytest.raises(BadMagicError):
            read_idx(path, LABELS_MAGIC)

    def test_images_file_read_as_labels_is_rejected(self, tmp_path):
        images, _ = synthetic_raw([0])
        write_idx(tmp_path / "images", images)
        with pytest.raises(BadMagicError):
            read_idx(tmp_path / "images", LABELS_MAGIC)

    def test_truncated_payload(self, tmp_path):
        path = tmp_path / "labels"
        path.write_bytes(struct.pack(">ii", LABELS_MAGIC, 10) + b"\x01\x02")
        with pytest.raises(TruncatedFileError):
            read_idx(path, LABELS_MAGIC)

    def test_truncated_header(self, tmp_path):
        path = tmp_path / "images"
        path.write_bytes(struct.pack(">ii", IMAGES_MAGIC, 5))
        with pytest.raises(TruncatedFileError):
            read_idx(path, IMAGES_MAGIC)

    def test_count_mismatch(self, tmp_path):
        images, labels = synthetic_raw([1, 2, 3])
        write_idx(tmp_path / "images", images)
        write_idx(tmp_path / "labels", labels[:2])
        with pytest.raises(CountMismatchError):
            load_idx(tmp_path / "images", tmp_path / "labels")

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            read_idx(tmp_path / "nothing", IMAGES_MAGIC)


class TestDatasets:
    def test_locates_plain_and_gzip_files(self, tmp_path):
        write_mnist(tmp_path, per_class=2, gz=True)
        images_path, labels_path = dataset_files(DatasetName.MNIST, tmp_path)
        assert images_path.name.endswith(".gz") and labels_path.name.endswith(".gz")
        images, labels = load_raw(DatasetName.MNIST, tmp_path)
        assert images.shape == (20, 28, 28) and labels.shape == (20,)

    def test_missing_dataset_directory(self, tmp_path):
        with pytest.raises(DataError):
            load_raw(DatasetName.FASHION_MNIST, tmp_path)

    def test_emnist_is_transposed(self, tmp_path):
        images, labels = synthetic_raw([1, 2, 3])
        write_dataset(
            tmp_path,
            "emnist",
            "emnist-letters-train-images-idx3-ubyte",
            "emnist-letters-train-labels-idx1-ubyte",
            images,
            labels,
        )
        loaded, _ = load_raw(DatasetName.EMNIST_LETTERS, tmp_path)
        np.testing.assert_array_equal(loaded, np.transpose(images, (0, 2, 1)))

    def test_first_samples_of_class_in_file_order(self, data_root):
        _, labels = load_raw(DatasetName.MNIST, data_root)
        samples = load_samples(DatasetSpec(name="mnist", class_filter=7, samples_per_class=5), data_root)
        assert len(samples) == 5
        np.testing.assert_array_equal(samples.ids, np.flatnonzero(labels == 7)[:5])
        assert np.all(samples.labels == 7)
        assert samples.pixels.shape == (5, 1, 28, 28)

    def test_pixels_are_in_signed_unit_range(self, digit_one):
        assert digit_one.pixels.min() >= -1.0 and digit_one.pixels.max() <= 1.0
        assert not digit_one.pixels.flags.writeable

    def test_all_classes(self, data_root):
        raw = load_raw(DatasetName.MNIST, data_root)
        samples = prepare(DatasetSpec(name="mnist", class_filter=None, samples_per_class=3), raw)
        assert len(samples) == 30
        assert sorted(set(samples.labels.tolist())) == list(range(10))

    def test_not_enough_samples(self, data_root):
        raw = load_raw(DatasetName.MNIST, data_root)
        with pytest.raises(SampleSizeError):
            prepare(DatasetSpec(name="mnist", class_filter=1, samples_per_class=13), raw)

    def test_label_outside_dataset_is_rejected(self):
        with pytest.raises(ValueError):
            DatasetSpec(name="emnist-letters", class_filter=0)

    def test_normalization_round_trip(self):
        raw = np.array([0, 1, 127, 128, 254, 255], dtype=np.uint8)
        assert normalize(raw)[0] == -1.0 and normalize(raw)[-1] == 1.0
        np.testing.assert_array_equal(denormalize_bytes(normalize(raw)), raw)


class TestBatches:
    def test_same_seed_same_order(self, digit_one):
        first = [b.ids.tolist() for b in batches(digit_one, 3, epoch_seed=[0, 1])]
        second = [b.ids.tolist() for b in batches(digit_one, 3, epoch_seed=[0, 1])]
        other = [b.ids.tolist() for b in batches(digit_one, 3, epoch_seed=[0, 2])]
        assert first == second
        assert first != other

    def test_each_sample_once_per_epoch(self, digit_one):
        seen = np.concatenate([b.ids for b in batches(digit_one, 3, epoch_seed=[5, 1])])
        assert sorted(seen.tolist()) == sorted(digit_one.ids.tolist())

    def test_trailing_single_sample_is_dropped(self, digit_one):
        sizes = [len(b) for b in batches(digit_one.subset(7), 3, epoch_seed=[0, 1])]
        assert sizes == [3, 3]

    def test_unshuffled_keeps_file_order(self, digit_one):
        ids = np.concatenate([b.ids for b in batches(digit_one, 4, shuffle=False)])
        np.testing.assert_array_equal(ids, digit_one.ids)

    def test_targets_are_unit_range(self, digit_one):
        batch = next(batches(digit_one, 4, shuffle=False))
        assert batch.targets.min() >= 0.0 and batch.targets.max() <= 1.0

    def test_batch_of_one_is_rejected(self, digit_one):
        with pytest.raises(DataError):
            next(batches(digit_one, 1))
