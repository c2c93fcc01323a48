import numpy as np
import pytest
from scipy import linalg

from src.core.exceptions import SampleSizeError, ShapeError
from src.core.metrics import (
    PSNR_CAP_DB,
    FeatureBackend,
    cosine_similarity,
    fid,
    frechet_distance,
    gaussian_stats,
    gaussian_window,
    is_degenerate_pair,
    psnr,
    ssim,
)


def brute_force_ssim(a: np.ndarray, b: np.ndarray, size: int = 11) -> float:
    window = gaussian_window(size)
    c1, c2 = 0.01**2, 0.03**2
    scores = []
    for i in range(a.shape[0] - size + 1):
        for j in range(a.shape[1] - size + 1):
            pa = a[i : i + size, j : j + size]
            pb = b[i : i + size, j : j + size]
            mu_a, mu_b = np.sum(window * pa), np.sum(window * pb)
            var_a = np.sum(window * (pa - mu_a) ** 2)
            var_b = np.sum(window * (pb - mu_b) ** 2)
            cov = np.sum(window * (pa - mu_a) * (pb - mu_b))
            scores.append(
                (2 * mu_a * mu_b + c1) * (2 * cov + c2) / ((mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2))
            )
    return float(np.mean(scores))


class TestSSIM:
    def test_window_is_normalized(self):
        window = gaussian_window()
        assert window.shape == (11, 11)
        assert window.sum() == pytest.approx(1.0)
        assert window[5, 5] == window.max()

    def test_identical_images(self, rng):
        x = rng.uniform(size=(28, 28))
        assert ssim(x, x) == pytest.approx(1.0)

    def test_inverted_image_is_negative(self, rng):
        x = rng.uniform(size=(28, 28))
        assert ssim(x, 1.0 - x) < 0.0

    def test_constant_images(self):
        assert ssim(np.full((28, 28), 0.3), np.full((28, 28), 0.3)) == pytest.approx(1.0)
        value = ssim(np.full((28, 28), 0.2), np.full((28, 28), 0.8))
        assert np.isfinite(value) and -1.0 <= value <= 1.0

    def test_symmetric(self, rng):
        a, b = rng.uniform(size=(2, 28, 28))
        assert ssim(a, b) == pytest.approx(ssim(b, a))

    def test_matches_window_by_window_definition(self, rng):
        for _ in range(20):
            a, b = rng.uniform(size=(2, 14, 14))
            b = 0.5 * a + 0.5 * b
            assert ssim(a, b) == pytest.approx(brute_force_ssim(a, b), abs=1e-8)

    def test_accepts_flat_vectors(self, rng):
        a, b = rng.uniform(size=(2, 784))
        assert ssim(a, b) == pytest.approx(ssim(a.reshape(28, 28), b.reshape(28, 28)))

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            ssim(np.zeros((28, 28)), np.zeros((20, 20)))


class TestPSNR:
    def test_known_values(self):
        assert psnr(np.zeros(784), np.full(784, 0.1)) == pytest.approx(20.0)
        assert psnr(np.zeros(784), np.ones(784)) == pytest.approx(0.0)

    def test_identical_images_are_capped(self, rng):
        x = rng.uniform(size=784)
        assert psnr(x, x) == PSNR_CAP_DB

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            psnr(np.zeros(4), np.zeros(5))


class TestCosine:
    def test_parallel_and_opposite(self, rng):
        x = rng.normal(size=784)
        assert cosine_similarity(x, 2.0 * x) == pytest.approx(1.0)
        assert cosine_similarity(x, -x) == pytest.approx(-1.0)
        assert not is_degenerate_pair(x, -x)

    def test_returns_plain_float(self, rng):
        value = cosine_similarity(rng.normal(size=(28, 28)), rng.normal(size=784))
        assert isinstance(value, float)
        assert -1.0 <= value <= 1.0

    def test_zero_vector_is_degenerate(self):
        assert cosine_similarity(np.zeros(4), np.ones(4)) == 0.0
        assert is_degenerate_pair(np.zeros(4), np.ones(4))

    def test_size_mismatch(self):
        with pytest.raises(ShapeError):
            cosine_similarity(np.ones(3), np.ones(4))


class TestFID:
    def test_identical_sets(self, rng):
        x = rng.normal(size=(200, 3, 3))
        assert fid(x, x, FeatureBackend.raw_pixels()) == pytest.approx(0.0, abs=1e-8)

    def test_symmetric(self, rng):
        a = rng.normal(size=(300, 4))
        b = rng.normal(1.0, 2.0, size=(300, 4))
        backend = FeatureBackend.raw_pixels()
        assert fid(a, b, backend) == pytest.approx(fid(b, a, backend), rel=1e-6)

    def test_gaussian_samples_match_closed_form(self, rng):
        mean_a = np.zeros(4)
        mean_b = np.array([10.0, 0.0, 0.0, 0.0])
        var_a = np.array([1.0, 2.0, 1.0, 1.0])
        var_b = np.array([4.0, 1.0, 1.0, 1.0])
        a = mean_a + rng.normal(size=(5000, 4)) * np.sqrt(var_a)
        b = mean_b + rng.normal(size=(5000, 4)) * np.sqrt(var_b)
        expected = np.sum((mean_a - mean_b) ** 2) + np.sum((np.sqrt(var_a) - np.sqrt(var_b)) ** 2)
        assert fid(a, b, FeatureBackend.raw_pixels()) == pytest.approx(expected, rel=0.02)

    def test_matches_direct_matrix_square_root(self, rng):
        for _ in range(20):
            a = rng.normal(size=(40, 3))
            b = rng.normal(0.5, 1.5, size=(40, 3)) @ rng.normal(size=(3, 3))
            sa, sb = np.cov(a, rowvar=False), np.cov(b, rowvar=False)
            diff = a.mean(axis=0) - b.mean(axis=0)
            expected = diff @ diff + np.trace(sa + sb - 2.0 * np.real(linalg.sqrtm(sa @ sb)))
            assert fid(a, b, FeatureBackend.raw_pixels()) == pytest.approx(expected, rel=1e-7, abs=1e-8)

    def test_exact_statistics(self):
        a = gaussian_stats(np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [2.0, 2.0]]))
        b = type(a)(mean=a.mean + np.array([3.0, 4.0]), cov=a.cov)
        assert frechet_distance(a, b) == pytest.approx(25.0)

    def test_needs_more_samples_than_dimensions(self, rng):
        with pytest.raises(SampleSizeError):
            gaussian_stats(rng.normal(size=(4, 4)))

    def test_pca_components_are_orthonormal(self, rng):
        backend = FeatureBackend.fit_pca(rng.uniform(size=(100, 1, 8, 8)), k=10)
        assert backend.dim == 10
        np.testing.assert_allclose(backend.components @ backend.components.T, np.eye(10), atol=1e-10)
        assert backend.embed(rng.uniform(size=(3, 1, 8, 8))).shape == (3, 10)

    def test_pca_needs_enough_images(self, rng):
        with pytest.raises(SampleSizeError):
            FeatureBackend.fit_pca(rng.uniform(size=(5, 64)), k=10)

    def test_build_by_kind(self, rng):
        real = rng.uniform(size=(50, 16))
        assert FeatureBackend.build("raw-pixels", real).dim is None
        assert FeatureBackend.build("pca", real, k=4).dim == 4
