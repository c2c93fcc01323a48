import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np

from src.core.data.idx import load_idx
from src.core.exceptions import DataError, SampleSizeError
from src.schemas.config import LABEL_RANGES, DatasetName, DatasetSpec

logger = logging.getLogger(__name__)

_FILES = {
    DatasetName.MNIST: ("mnist", "train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    DatasetName.FASHION_MNIST: ("fashion-mnist", "train-images-idx3-ubyte", "train-labels-idx1-ubyte"),
    DatasetName.EMNIST_LETTERS: (
        "emnist",
        "emnist-letters-train-images-idx3-ubyte",
        "emnist-letters-train-labels-idx1-ubyte",
    ),
}


@dataclass(frozen=True)
class SampleSet:
    """Prepared samples: pixels ``(n, 1, H, W)`` in [-1, 1], labels, and file indices."""

    pixels: np.ndarray
    labels: np.ndarray
    ids: np.ndarray

    def __len__(self) -> int:
        return self.labels.shape[0]

    def subset(self, count: int) -> "SampleSet":
        return SampleSet(self.pixels[:count], self.labels[:count], self.ids[:count])


@dataclass(frozen=True)
class ImageBatch:
    pixels: np.ndarray
    labels: np.ndarray
    ids: np.ndarray

    def __len__(self) -> int:
        return self.labels.shape[0]

    @property
    def targets(self) -> np.ndarray:
        """Pixels mapped back to [0, 1] for the reconstruction loss."""
        return to_unit_range(self.pixels)


def normalize(pixels: np.ndarray) -> np.ndarray:
    """Bytes 0..255 to [-1, 1]."""
    return pixels.astype(np.float64) / 255.0 * 2.0 - 1.0


def to_unit_range(x: np.ndarray) -> np.ndarray:
    return (x + 1.0) / 2.0


def _locate(directory: Path, stem: str) -> Path:
    for candidate in (directory / stem, directory / f"{stem}.gz"):
        if candidate.exists():
            return candidate
    raise DataError(f"Missing dataset file {stem}[.gz] under {directory}")


def dataset_files(name: DatasetName, root) -> tuple[Path, Path]:
    folder, images, labels = _FILES[name]
    directory = Path(root) / folder
    return _locate(directory, images), _locate(directory, labels)


def load_raw(name: DatasetName, root) -> tuple[np.ndarray, np.ndarray]:
    """Read the training split; E-MNIST images are transposed to upright orientation."""
    images_path, labels_path = dataset_files(name, root)
    images, labels = load_idx(images_path, labels_path)
    if name is DatasetName.EMNIST_LETTERS:
        images = np.ascontiguousarray(np.transpose(images, (0, 2, 1)))
    logger.info(f"Loaded {images.shape[0]} {name.value} images from {images_path.parent}")
    return images, labels


def prepare(spec: DatasetSpec, raw: tuple[np.ndarray, np.ndarray]) -> SampleSet:
    """First ``samples_per_class`` samples of the class (or of every class) in file order."""
    images, labels = raw
    classes = [spec.class_filter] if spec.class_filter is not None else list(LABEL_RANGES[spec.name])
    chosen = []
    for label in classes:
        ids = np.flatnonzero(labels == label)
        if ids.size < spec.samples_per_class:
            raise SampleSizeError(
                f"Class {label} of {spec.name.value} has {ids.size} samples, "
                f"{spec.samples_per_class} requested"
            )
        chosen.append(ids[: spec.samples_per_class])
    ids = np.concatenate(chosen)
    pixels = normalize(images[ids])[:, None, :, :]
    samples = SampleSet(pixels=pixels, labels=labels[ids].astype(np.int64), ids=ids.astype(np.int64))
    for array in (samples.pixels, samples.labels, samples.ids):
        array.setflags(write=False)
    return samples


def load_samples(spec: DatasetSpec, root) -> SampleSet:
    return prepare(spec, load_raw(spec.name, root))


def batches(
    samples: SampleSet,
    batch_size: int,
    epoch_seed=None,
    shuffle: bool = True,
) -> Iterator[ImageBatch]:
    """Mini-batches in a per-epoch seeded order; a trailing batch of one sample is dropped."""
    if batch_size < 2:
        raise DataError(f"batch_size must be at least 2 for BatchNorm, got {batch_size}")
    order = np.arange(len(samples))
    if shuffle:
        order = np.random.default_rng(epoch_seed).permutation(len(samples))
    for start in range(0, len(order), batch_size):
        index = order[start : start + batch_size]
        if index.size < 2:
            logger.debug(f"Dropping trailing batch of {index.size} sample")
            break
        yield ImageBatch(pixels=samples.pixels[index], labels=samples.labels[index], ids=samples.ids[index])


def denormalize_bytes(x: np.ndarray) -> np.ndarray:
    """Inverse of ``normalize``: (x + 1) / 2 * 255, rounded back to bytes."""
    return np.rint(to_unit_range(np.asarray(x)) * 255.0).astype(np.uint8)

