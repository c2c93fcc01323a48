"""Pairwise image-quality metrics on images scaled to [0, 1]."""
import logging

import numpy as np
from scipy.signal import convolve2d

from src.core.exceptions import ShapeError

logger = logging.getLogger(__name__)

PSNR_CAP_DB = 100.0
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03


def gaussian_window(size: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    half = (size - 1) / 2.0
    y, x = np.ogrid[-half : half + 1, -half : half + 1]
    window = np.exp(-(x * x + y * y) / (2.0 * sigma * sigma))
    return window / window.sum()


def _as_2d(image) -> np.ndarray:
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 1:
        side = int(round(np.sqrt(image.size)))
        if side * side != image.size:
            raise ShapeError(f"Cannot view {image.size} pixels as a square image")
        image = image.reshape(side, side)
    return image.reshape(image.shape[-2], image.shape[-1])


def ssim(a, b, data_range: float = 1.0) -> float:
    """Mean SSIM over every full 11x11 Gaussian window (sigma 1.5) that fits the image."""
    a, b = _as_2d(a), _as_2d(b)
    if a.shape != b.shape:
        raise ShapeError(f"SSIM needs equal shapes, got {a.shape} and {b.shape}")
    c1 = (SSIM_K1 * data_range) ** 2
    c2 = (SSIM_K2 * data_range) ** 2
    window = gaussian_window(min(SSIM_WINDOW, *a.shape))

    def filt(img):
        # window is symmetric, so convolution equals correlation
        return convolve2d(img, window, mode="valid")

    mu_a, mu_b = filt(a), filt(b)
    var_a = filt(a * a) - mu_a * mu_a
    var_b = filt(b * b) - mu_b * mu_b
    cov = filt(a * b) - mu_a * mu_b
    numerator = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    denominator = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float(np.mean(numerator / denominator))


def psnr(a, b, data_range: float = 1.0) -> float:
    """10 log10(range^2 / MSE), capped at 100 dB for identical images."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ShapeError(f"PSNR needs equal shapes, got {a.shape} and {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return PSNR_CAP_DB
    return float(min(PSNR_CAP_DB, 10.0 * np.log10(data_range * data_range / mse)))


def _flat_pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.shape != b.shape:
        raise ShapeError(f"cosine similarity needs equal sizes, got {a.size} and {b.size}")
    return a, b


def is_degenerate_pair(a, b) -> bool:
    """True when either operand is the zero vector, so the cosine is undefined."""
    a, b = _flat_pair(a, b)
    return float(np.linalg.norm(a) * np.linalg.norm(b)) == 0.0


def cosine_similarity(a, b) -> float:
    """Cosine of the angle between the flattened operands; 0.0 when either is the zero vector."""
    a, b = _flat_pair(a, b)
    norm = np.linalg.norm(a) * np.linalg.norm(b)
    if norm == 0.0:
        logger.warning("Cosine similarity of a zero vector; reporting 0")
        return 0.0
    return float(np.clip(np.dot(a, b) / norm, -1.0, 1.0))
