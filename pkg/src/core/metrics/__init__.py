from .fid import FeatureBackend, GaussianStats, fid, frechet_distance, gaussian_stats
from .image import PSNR_CAP_DB, cosine_similarity, gaussian_window, is_degenerate_pair, psnr, ssim

__all__ = [
    "FeatureBackend",
    "GaussianStats",
    "fid",
    "frechet_distance",
    "gaussian_stats",
    "PSNR_CAP_DB",
    "cosine_similarity",
    "gaussian_window",
    "is_degenerate_pair",
    "psnr",
    "ssim",
]
