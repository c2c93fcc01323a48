import os
from pathlib import Path

import numpy as np
import pytest

from src.core.config import get_settings
from src.core.data import load_raw, prepare
from src.schemas.config import DatasetName, DatasetSpec, ModelConfig, RunConfig

from tests.helpers import write_mnist


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_model_config():
    """Small enough for finite differences: 3 qubits, narrow encoder and readout."""
    return ModelConfig(
        n_qubits=3,
        n_layers=1,
        n_repeats=2,
        latent_dim=2,
        v_dim=4,
        readout_widths=[5, 784],
        encoder_channels=[2, 2, 2, 2],
    )


@pytest.fixture
def tiny_run_config(tiny_model_config, tmp_path):
    return RunConfig(
        dataset=DatasetSpec(name="mnist", class_filter=1, samples_per_class=8),
        model=tiny_model_config,
        training={"epochs": 2, "batch_size": 4, "record_wall_time": False},
        loss={"mode": "beta-warmup", "n_beta": 2},
        output_dir=str(tmp_path / "run"),
    )


@pytest.fixture
def data_root(tmp_path):
    root = tmp_path / "data"
    write_mnist(root, per_class=12)
    return root


@pytest.fixture
def digit_one(data_root):
    return prepare(DatasetSpec(name="mnist", class_filter=1, samples_per_class=8), load_raw(DatasetName.MNIST, data_root))


@pytest.fixture(autouse=True)
def isolated_settings(monkeypatch, tmp_path):
    monkeypatch.setenv("QINR_RUNS_DIR", str(tmp_path / "runs"))
    get_settings.cache_clear()
    yield
    get_settings.cache_clear()


def real_data_root():
    """Root holding the real datasets, or None when they are not installed."""
    root = Path(os.getenv("QINR_DATA_ROOT", "data"))
    return root if (root / "mnist").exists() else None
