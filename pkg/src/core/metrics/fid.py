"""Frechet distance between Gaussian fits of two embedded image sets.

Inception features are not available here; images are embedded either as raw
pixels or by a PCA basis fitted on the real images.
"""
import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import linalg

from src.core.exceptions import ConfigurationError, SampleSizeError, ShapeError
from src.schemas.config import FeatureKind

logger = logging.getLogger(__name__)

EIGEN_TOLERANCE = 1e-8


def _flatten(images) -> np.ndarray:
    images = np.asarray(images, dtype=np.float64)
    if images.ndim < 2:
        raise ShapeError(f"Expected a set of images, got shape {images.shape}")
    return images.reshape(images.shape[0], -1)


@dataclass(frozen=True)
class FeatureBackend:
    kind: FeatureKind
    mean: Optional[np.ndarray] = None
    components: Optional[np.ndarray] = None

    @classmethod
    def raw_pixels(cls) -> "FeatureBackend":
        return cls(FeatureKind.RAW_PIXELS)

    @classmethod
    def fit_pca(cls, real_images, k: int = 64) -> "FeatureBackend":
        """Top-``k`` principal directions of the real set (orthonormal rows)."""
        x = _flatten(real_images)
        if k > min(x.shape):
            raise SampleSizeError(f"PCA with {k} components needs at least {k} images of {k} pixels, got {x.shape}")
        mean = x.mean(axis=0)
        _, _, vt = np.linalg.svd(x - mean, full_matrices=False)
        logger.debug(f"Fitted a {k}-component PCA on {x.shape[0]} images")
        return cls(FeatureKind.PCA, mean=mean, components=vt[:k].copy())

    @classmethod
    def build(cls, kind, real_images, k: int = 64) -> "FeatureBackend":
        kind = FeatureKind(kind)
        if kind is FeatureKind.PCA:
            return cls.fit_pca(real_images, k)
        return cls.raw_pixels()

    @property
    def dim(self) -> Optional[int]:
        return None if self.components is None else self.components.shape[0]

    def embed(self, images) -> np.ndarray:
        x = _flatten(images)
        if self.kind is FeatureKind.RAW_PIXELS:
            return x
        if self.components is None or self.mean is None:
            raise ConfigurationError("PCA backend used before fitting")
        if x.shape[1] != self.mean.shape[0]:
            raise ShapeError(f"PCA was fitted on {self.mean.shape[0]} pixels, got {x.shape[1]}")
        return (x - self.mean) @ self.components.T


@dataclass(frozen=True)
class GaussianStats:
    mean: np.ndarray
    cov: np.ndarray


def gaussian_stats(features) -> GaussianStats:
    features = np.asarray(features, dtype=np.float64)
    n, k = features.shape
    if n < k + 1:
        raise SampleSizeError(f"Need at least {k + 1} samples for a {k}-dimensional covariance, got {n}")
    cov = np.cov(features, rowvar=False)
    return GaussianStats(mean=features.mean(axis=0), cov=0.5 * (cov + cov.T))


def _psd_sqrt(matrix: np.ndarray) -> np.ndarray:
    values, vectors = linalg.eigh(matrix)
    if values.min() < -EIGEN_TOLERANCE * max(1.0, abs(values).max()):
        logger.warning(f"Clipping negative eigenvalue {values.min():.3e} to 0")
    values = np.clip(values, 0.0, None)
    return (vectors * np.sqrt(values)) @ vectors.T


def frechet_distance(a: GaussianStats, b: GaussianStats) -> float:
    """|mu1 - mu2|^2 + Tr(S1 + S2 - 2 (S1^1/2 S2 S1^1/2)^1/2)."""
    root_a = _psd_sqrt(a.cov)
    middle = root_a @ b.cov @ root_a
    cross = _psd_sqrt(0.5 * (middle + middle.T))
    diff = a.mean - b.mean
    value = diff @ diff + np.trace(a.cov) + np.trace(b.cov) - 2.0 * np.trace(cross)
    return float(max(value, 0.0))


def fid(real_set, gen_set, backend: FeatureBackend) -> float:
    real = backend.embed(real_set)
    gen = backend.embed(gen_set)
    return frechet_distance(gaussian_stats(real), gaussian_stats(gen))
