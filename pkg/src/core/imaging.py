"""Image grids and their export as PGM (always) and PNG (optional)."""
import logging
from pathlib import Path
from typing import Optional

import numpy as np
from PIL import Image

from src.core.exceptions import ContractError, ShapeError

logger = logging.getLogger(__name__)

SEPARATOR_VALUE = 255


def quantize(pixels) -> np.ndarray:
    """Intensities in [0, 1] to bytes, round-half-up of 255 p."""
    pixels = np.clip(np.asarray(pixels, dtype=np.float64), 0.0, 1.0)
    return np.floor(pixels * 255.0 + 0.5).astype(np.uint8)


def tile_grid(
    images,
    rows: int,
    cols: int,
    image_size: int = 28,
    separator: int = 2,
) -> np.ndarray:
    """Lay ``rows * cols`` images out row-major with ``separator`` pixels between tiles.

    Missing tiles (fewer images than cells) stay at the separator value.
    """
    images = np.asarray(images, dtype=np.float64)
    if images.shape[0] == 0:
        raise ContractError("cannot tile an empty image set")
    images = images.reshape(images.shape[0], -1)
    if images.shape[1] != image_size * image_size:
        raise ShapeError(f"Expected {image_size * image_size} pixels per image, got {images.shape[1]}")
    if images.shape[0] > rows * cols:
        raise ShapeError(f"{images.shape[0]} images do not fit a {rows}x{cols} grid")
    step = image_size + separator
    grid = np.full((rows * step - separator, cols * step - separator), SEPARATOR_VALUE, dtype=np.uint8)
    tiles = quantize(images).reshape(-1, image_size, image_size)
    for index, tile in enumerate(tiles):
        r, c = divmod(index, cols)
        grid[r * step : r * step + image_size, c * step : c * step + image_size] = tile
    return grid


def write_pgm(path, grid: np.ndarray) -> Path:
    """Binary greyscale PGM (P5, maxval 255)."""
    path = Path(path)
    grid = np.asarray(grid, dtype=np.uint8)
    height, width = grid.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        f.write(grid.tobytes())
    return path


def read_pgm(path) -> np.ndarray:
    """Read a PGM in the exact layout ``write_pgm`` produces."""
    magic, size, maxval, data = Path(path).read_bytes().split(b"\n", 3)
    if magic != b"P5" or maxval != b"255":
        raise ShapeError(f"{path} is not an 8-bit binary PGM")
    width, height = (int(v) for v in size.split())
    return np.frombuffer(data, dtype=np.uint8, count=width * height).reshape(height, width)


def write_png(path, grid: np.ndarray) -> Path:
    path = Path(path)
    Image.fromarray(np.asarray(grid, dtype=np.uint8), mode="L").save(path)
    return path


def export_grid(stem, grid: np.ndarray, png: bool = False) -> list[Path]:
    """Write ``<stem>.pgm`` and, when requested, ``<stem>.png``."""
    stem = Path(stem)
    stem.parent.mkdir(parents=True, exist_ok=True)
    written = [write_pgm(stem.with_suffix(".pgm"), grid)]
    if png:
        written.append(write_png(stem.with_suffix(".png"), grid))
    logger.info(f"Wrote {', '.join(str(p) for p in written)}")
    return written


def grid_shape(n: int, cols: Optional[int] = None) -> tuple[int, int]:
    """One row by default; ``cols`` wraps into as many rows as needed."""
    if n < 1:
        raise ContractError(f"a grid needs at least one image, got {n}")
    cols = n if cols is None else min(cols, n)
    return -(-n // cols), cols
