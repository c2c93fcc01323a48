import argparse
import json
import logging
from pathlib import Path

import numpy as np

from src.cli.common import add_dataset_flags, dataset_from_flags, in_chunks, load_dataset, open_checkpoint
from src.core.data import to_unit_range
from src.core.exceptions import ConfigurationError, ContractError
from src.core.metrics import FeatureBackend, cosine_similarity, fid, is_degenerate_pair, psnr, ssim
from src.models import HybridAutoencoder, generate, reconstruct
from src.schemas.config import RunConfig
from src.schemas.metrics import MetricSummary, MetricsReport

logger = logging.getLogger(__name__)

PAIRWISE = ("ssim", "psnr", "cosine")
METRICS = PAIRWISE + ("fid",)


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser("evaluate", help="reconstruction and prior-sample metrics as JSON")
    parser.add_argument("--checkpoint", required=True)
    parser.add_argument("--metrics", default="ssim,psnr,cosine", help=f"comma-separated subset of {','.join(METRICS)}")
    parser.add_argument("--prior-samples", type=int, help="prior samples for a VAE (default: export.prior_samples)")
    parser.add_argument("--output", help="report path (default: metrics.json next to the checkpoint)")
    add_dataset_flags(parser)
    parser.set_defaults(handler=run)


def parse_metrics(value: str) -> list[str]:
    names = [name.strip() for name in value.split(",") if name.strip()]
    unknown = [name for name in names if name not in METRICS]
    if unknown or not names:
        raise ConfigurationError(f"Unknown metrics {unknown}; choose from {', '.join(METRICS)}")
    return names


def pairwise_metrics(first: np.ndarray, second: np.ndarray, names: list[str], image_size: int) -> dict[str, MetricSummary]:
    """Metrics of image i in ``first`` against image i in ``second``."""
    summaries = {}
    shape = (image_size, image_size)
    if "ssim" in names:
        values = [ssim(a.reshape(shape), b.reshape(shape)) for a, b in zip(first, second)]
        summaries["ssim"] = MetricSummary(mean=float(np.mean(values)), values=values)
    if "psnr" in names:
        values = [psnr(a, b) for a, b in zip(first, second)]
        summaries["psnr"] = MetricSummary(mean=float(np.mean(values)), values=values)
    if "cosine" in names:
        values = [cosine_similarity(a, b) for a, b in zip(first, second)]
        degenerate = sum(is_degenerate_pair(a, b) for a, b in zip(first, second))
        summaries["cosine"] = MetricSummary(mean=float(np.mean(values)), values=values, degenerate=degenerate)
    return summaries


def evaluate_model(
    model: HybridAutoencoder,
    config: RunConfig,
    real_pixels: np.ndarray,
    names: list[str],
    prior_samples: int,
) -> tuple[dict[str, MetricSummary], dict[str, MetricSummary], dict[str, str]]:
    """Reconstruction metrics over ``real_pixels`` and, for a VAE, prior-sample metrics."""
    if "fid" in names and not model.variational:
        raise ContractError("FID compares generated images and is not meaningful for an autoencoder")
    real = to_unit_range(real_pixels).reshape(real_pixels.shape[0], -1)
    protocol = {
        "reconstruction": "eval-mode reconstruction of each image (posterior mean for a VAE)",
        "ssim": "11x11 Gaussian window, sigma 1.5, K1 0.01, K2 0.03, data range 1",
        "psnr": "data range 1, capped at 100 dB",
    }
    reconstruction: dict[str, MetricSummary] = {}
    pairwise = [name for name in names if name in PAIRWISE]
    if pairwise:
        rebuilt = np.concatenate([reconstruct(model, chunk) for chunk in in_chunks(real_pixels)])
        reconstruction = pairwise_metrics(real, rebuilt, pairwise, config.model.image_size)

    prior: dict[str, MetricSummary] = {}
    if model.variational:
        generated = generate(model, prior_samples, np.random.default_rng(config.seeds.sample))
        protocol["prior_pairing"] = "generated image i against real image i in file order"
        count = min(len(generated), len(real))
        prior = pairwise_metrics(real[:count], generated[:count], pairwise, config.model.image_size)
        if "fid" in names:
            backend = FeatureBackend.build(config.export.feature_backend, real, config.export.pca_components)
            value = fid(real, generated, backend)
            prior["fid"] = MetricSummary(mean=value, values=[value])
            protocol["fid_features"] = (
                f"{backend.kind.value}" + (f" (k={backend.dim}, fitted on the real set)" if backend.dim else "")
            )
    return reconstruction, prior, protocol


def run(args: argparse.Namespace) -> int:
    names = parse_metrics(args.metrics)
    state, model = open_checkpoint(args.checkpoint)
    config = dataset_from_flags(state.config, args)
    samples = load_dataset(config, args)
    prior_samples = args.prior_samples or config.export.prior_samples
    reconstruction, prior, protocol = evaluate_model(model, config, samples.pixels, names, prior_samples)
    report = MetricsReport(
        dataset=config.dataset.name.value,
        class_filter=config.dataset.class_filter,
        config_hash=config.config_hash(),
        seeds=config.seeds,
        checkpoint=str(args.checkpoint),
        protocol=protocol,
        reconstruction=reconstruction,
        prior=prior,
    )
    path = Path(args.output) if args.output else Path(args.checkpoint).parent / "metrics.json"
    path.write_text(json.dumps(report.model_dump(mode="json", by_alias=True), indent=2) + "\n")
    for section, summaries in (("reconstruction", reconstruction), ("prior", prior)):
        for name, summary in summaries.items():
            logger.info(f"{section} {name}: {summary.mean:.4f}")
    print(path)
    return 0
