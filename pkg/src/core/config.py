import json
import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from functools import lru_cache
from pathlib import Path
from typing import Any, Optional

from pydantic import ValidationError
from pydantic_settings import BaseSettings

from src.core.exceptions import ConfigurationError
from src.schemas.config import DatasetName, DecoderKind, RunConfig, ScheduleMode

logger = logging.getLogger(__name__)


class Settings(BaseSettings):
    # Process
    PROJECT_NAME: str = "QINR Autoencoders"
    LOG_LEVEL: str = "INFO"
    # BLAS pool size; main.py exports it before numpy loads
    NUM_THREADS: Optional[int] = None

    # Paths
    DATA_ROOT: str = "data"
    RUNS_DIR: str = "runs"

    class Config:
        env_prefix = "QINR_"
        env_file = ".env"
        case_sensitive = True
        extra = 'ignore'


@lru_cache()
def get_settings():
    return Settings()


# Published hyperparameters per model kind and dataset
_MODEL_PRESETS: dict[str, dict[str, Any]] = {
    "vae": {
        "model": {"variational": True, "v_dim": 128, "readout_widths": [128, 512, 784]},
        "optimizer": {"lr_classical": 0.002, "lr_quantum": 0.0002},
        "training": {"epochs": 45, "batch_size": 32},
    },
    "ae": {
        "model": {"variational": False, "v_dim": 256, "readout_widths": [256, 512, 784]},
        "optimizer": {"lr_classical": 0.002, "lr_quantum": 0.0005},
        "training": {"epochs": 25, "batch_size": 32},
        "loss": {"mode": ScheduleMode.CONSTANT.value},
    },
}

_VAE_SCHEDULES: dict[DatasetName, dict[str, Any]] = {
    DatasetName.MNIST: {"mode": ScheduleMode.BETA_WARMUP.value, "n_beta": 5},
    DatasetName.EMNIST_LETTERS: {
        "mode": ScheduleMode.CAPACITY.value, "c_max": 10.0, "n_c": 10, "gamma": 20.0, "free_bits": 0.25,
    },
    DatasetName.FASHION_MNIST: {
        "mode": ScheduleMode.CAPACITY.value, "c_max": 12.0, "n_c": 10, "gamma": 10.0, "free_bits": 0.5,
    },
}


def deep_merge(base: dict, override: dict) -> dict:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = deep_merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def published_preset(
    model: str = "vae",
    dataset=DatasetName.MNIST,
    all_classes: bool = False,
    decoder=DecoderKind.QINR,
) -> dict[str, Any]:
    """Raw config values for a published experiment; merge user values on top."""
    if model not in _MODEL_PRESETS:
        raise ConfigurationError(f"model must be 'ae' or 'vae', got {model!r}")
    try:
        dataset = DatasetName(dataset)
        decoder = DecoderKind(decoder)
    except ValueError as e:
        raise ConfigurationError(str(e))
    preset = deep_merge(_MODEL_PRESETS[model], {"dataset": {"name": dataset.value}})
    if model == "vae":
        preset = deep_merge(preset, {"loss": _VAE_SCHEDULES[dataset]})
    if all_classes:
        preset = deep_merge(preset, {
            "dataset": {"class_filter": None},
            "model": {"global_scale": True, "n_layers": 3, "n_repeats": 2},
            "training": {"epochs": 40},
        })
    if decoder is DecoderKind.CLASSICAL_LINEAR:
        preset = deep_merge(preset, {"model": {"decoder_kind": decoder.value}, "training": {"epochs": 30}})
    return preset


def read_config_file(path) -> dict[str, Any]:
    """TOML (sections per RunConfig part) or JSON, chosen by extension."""
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"Config file not found: {path}")
    try:
        if path.suffix == ".toml":
            with open(path, "rb") as f:
                return tomllib.load(f)
        with open(path) as f:
            return json.load(f)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as e:
        raise ConfigurationError(f"{path}: {e}")


def validate_run_config(values: dict[str, Any]) -> RunConfig:
    """Build a RunConfig, reporting every unknown key at once."""
    try:
        return RunConfig.model_validate(values)
    except ValidationError as e:
        unknown = [".".join(str(p) for p in err["loc"]) for err in e.errors() if err["type"] == "extra_forbidden"]
        if unknown:
            raise ConfigurationError(f"Unknown config keys: {', '.join(unknown)}")
        problems = "; ".join(f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in e.errors())
        raise ConfigurationError(f"Invalid config: {problems}")


def load_run_config(
    path=None,
    overrides: Optional[dict[str, Any]] = None,
    base: Optional[dict[str, Any]] = None,
) -> RunConfig:
    """``base`` (usually a preset), then the file, then ``overrides`` (CLI flags)."""
    values = dict(base or {})
    if path is not None:
        values = deep_merge(values, read_config_file(path))
        logger.debug(f"Read config file {path}")
    if overrides:
        values = deep_merge(values, overrides)
    return validate_run_config(values)


def write_resolved_config(config: RunConfig, run_dir) -> Path:
    path = Path(run_dir) / "config.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(config.model_dump(mode="json"), indent=2, sort_keys=True) + "\n")
    return path
