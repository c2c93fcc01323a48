"""Desk-scale reproduction on the real datasets (``pytest -m slow``)."""
import numpy as np
import pytest

from src.cli.evaluate import evaluate_model
from src.core.config import deep_merge, published_preset, validate_run_config
from src.core.data import load_samples
from src.core.training import train
from src.models import generate

from tests.conftest import real_data_root

pytestmark = [
    pytest.mark.slow,
    pytest.mark.skipif(real_data_root() is None, reason="MNIST files not installed under QINR_DATA_ROOT"),
]


def test_autoencoder_on_digit_one(tmp_path):
    config = validate_run_config(published_preset("ae", "mnist"))
    samples = load_samples(config.dataset, real_data_root())
    model, records = train(config, samples, run_dir=tmp_path / "ae")

    assert records[-1].rec_loss < 0.5 * records[0].rec_loss
    reconstruction, prior, _ = evaluate_model(model, config, samples.pixels, ["ssim"], prior_samples=0)
    assert reconstruction["ssim"].mean >= 0.65
    assert prior == {}


def test_vae_converges_without_collapse(tmp_path):
    config = validate_run_config(published_preset("vae", "mnist"))
    samples = load_samples(config.dataset, real_data_root())
    model, records = train(config, samples, run_dir=tmp_path / "vae")

    assert records[-1].total_loss < records[0].total_loss
    assert records[-1].rec_loss < records[0].rec_loss
    assert records[-1].kl_loss > 0.1

    images = generate(model, 10, np.random.default_rng(config.seeds.sample))
    distances = [np.mean((images[i] - images[j]) ** 2) for i in range(10) for j in range(i + 1, 10)]
    assert max(distances) > 0.01


@pytest.mark.skipif(
    real_data_root() is None or not (real_data_root() / "fashion-mnist").exists(),
    reason="Fashion-MNIST files not installed",
)
def test_multibasis_readout_reconstructs_at_least_as_well(tmp_path):
    base = deep_merge(
        published_preset("vae", "fashion-mnist", all_classes=True),
        {"dataset": {"samples_per_class": 500}, "training": {"epochs": 10}},
    )
    scores = {}
    for mode in ("z", "multibasis"):
        config = validate_run_config(deep_merge(base, {"model": {"readout_mode": mode}}))
        samples = load_samples(config.dataset, real_data_root())
        model, _ = train(config, samples, run_dir=tmp_path / mode)
        reconstruction, _, _ = evaluate_model(model, config, samples.pixels, ["ssim"], prior_samples=1)
        scores[mode] = reconstruction["ssim"].mean
    assert scores["multibasis"] >= scores["z"]
