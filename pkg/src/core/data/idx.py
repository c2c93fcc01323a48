"""IDX file reader (the MNIST family's distribution format).

Header: two zero bytes, a type code (0x08 = unsigned byte), the number of
dimensions, then one big-endian int32 per dimension. ``.gz`` files are
decompressed transparently.
"""
import gzip
import logging
import struct
from pathlib import Path

import numpy as np

from src.core.exceptions import BadMagicError, CountMismatchError, DataError, TruncatedFileError

logger = logging.getLogger(__name__)

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801


def _read_bytes(path: Path) -> bytes:
    if not path.exists():
        raise DataError(f"Dataset file not found: {path}")
    opener = gzip.open if path.suffix == ".gz" else open
    try:
        with opener(path, "rb") as f:
            return f.read()
    except (OSError, EOFError) as e:
        raise TruncatedFileError(f"{path}: cannot read ({e})")


def read_idx(path, expected_magic: int) -> np.ndarray:
    path = Path(path)
    raw = _read_bytes(path)
    if len(raw) < 4:
        raise TruncatedFileError(f"{path}: file shorter than its IDX header")
    (magic,) = struct.unpack(">i", raw[:4])
    if magic != expected_magic:
        raise BadMagicError(f"{path}: magic number 0x{magic:08x}, expected 0x{expected_magic:08x}")
    ndim = magic & 0xFF
    header_end = 4 + 4 * ndim
    if len(raw) < header_end:
        raise TruncatedFileError(f"{path}: header declares {ndim} dimensions but the file ends early")
    dims = struct.unpack(">" + "i" * ndim, raw[4:header_end])
    count = int(np.prod(dims))
    payload = raw[header_end:]
    if len(payload) < count:
        raise TruncatedFileError(f"{path}: expected {count} data bytes, found {len(payload)}")
    data = np.frombuffer(payload, dtype=np.uint8, count=count).reshape(dims).copy()
    logger.debug(f"Read {path.name}: dims={dims}")
    return data


def load_idx(images_path, labels_path) -> tuple[np.ndarray, np.ndarray]:
    """Images ``(n, rows, cols)`` and labels ``(n,)`` as uint8 arrays."""
    images = read_idx(images_path, IMAGES_MAGIC)
    labels = read_idx(labels_path, LABELS_MAGIC)
    if images.shape[0] != labels.shape[0]:
        raise CountMismatchError(
            f"{images_path} holds {images.shape[0]} images but {labels_path} holds {labels.shape[0]} labels"
        )
    return images, labels


def write_idx(path, array: np.ndarray) -> None:
    """Write a uint8 array as IDX (used to build fixtures and small subsets)."""
    path = Path(path)
    array = np.asarray(array, dtype=np.uint8)
    header = struct.pack(">i", 0x0800 | array.ndim) + struct.pack(">" + "i" * array.ndim, *array.shape)
    opener = gzip.open if path.suffix == ".gz" else open
    with opener(path, "wb") as f:
        f.write(header + array.tobytes())
