"""Flags and helpers shared by the subcommands."""
import argparse
import logging
from pathlib import Path
from typing import Any

import numpy as np

from src.core.config import deep_merge, get_settings, load_run_config, published_preset, read_config_file
from src.core.data import SampleSet, load_samples
from src.core.training import TrainingState, load_checkpoint, restore_model
from src.models import HybridAutoencoder
from src.schemas.config import DatasetName, DecoderKind, RunConfig

logger = logging.getLogger(__name__)

# flag dest -> config path
_FLAG_PATHS = {
    "dataset": ("dataset", "name"),
    "samples_per_class": ("dataset", "samples_per_class"),
    "n_qubits": ("model", "n_qubits"),
    "layers": ("model", "n_layers"),
    "repeats": ("model", "n_repeats"),
    "latent_dim": ("model", "latent_dim"),
    "readout": ("model", "readout_mode"),
    "decoder": ("model", "decoder_kind"),
    "reconstruction": ("loss", "reconstruction"),
    "lr_classical": ("optimizer", "lr_classical"),
    "lr_quantum": ("optimizer", "lr_quantum"),
    "grad_clip": ("optimizer", "grad_clip"),
    "epochs": ("training", "epochs"),
    "batch_size": ("training", "batch_size"),
    "checkpoint_every": ("training", "checkpoint_every"),
    "eval_every": ("training", "eval_every"),
    "seed": ("seeds", "init"),
    "data_seed": ("seeds", "data"),
    "noise_seed": ("seeds", "noise"),
    "sample_seed": ("seeds", "sample"),
    "output": ("output_dir",),
}


def add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML or JSON run config; flags override it")
    parser.add_argument("--model", choices=["ae", "vae"], help="model kind (selects the published defaults)")
    parser.add_argument("--dataset", choices=[d.value for d in DatasetName])
    parser.add_argument("--class", dest="class_filter", type=int, help="label to train on")
    parser.add_argument("--all-classes", action="store_true", help="train on every class at once")
    parser.add_argument("--samples-per-class", type=int)
    parser.add_argument("--n-qubits", type=int)
    parser.add_argument("--layers", type=int, help="encoding layers L")
    parser.add_argument("--repeats", type=int, help="Rot+CZ repetitions K per parameter layer")
    parser.add_argument("--latent-dim", type=int)
    parser.add_argument("--readout", choices=["z", "multibasis"])
    parser.add_argument("--global-scale", action="store_true", default=None)
    parser.add_argument("--decoder", choices=[d.value for d in DecoderKind])
    parser.add_argument("--reconstruction", choices=["bce", "mse"])
    parser.add_argument("--lr-classical", type=float)
    parser.add_argument("--lr-quantum", type=float)
    parser.add_argument("--grad-clip", type=float)
    parser.add_argument("--epochs", type=int)
    parser.add_argument("--batch-size", type=int)
    parser.add_argument("--checkpoint-every", type=int)
    parser.add_argument("--eval-every", type=int)
    parser.add_argument("--seed", type=int, help="weight initialisation seed")
    parser.add_argument("--data-seed", type=int)
    parser.add_argument("--noise-seed", type=int)
    parser.add_argument("--sample-seed", type=int)
    parser.add_argument("--no-wall-time", action="store_true", help="write 0 in the seconds column")
    parser.add_argument("--no-shuffle", action="store_true", help="visit samples in file order every epoch")
    parser.add_argument("--png", action="store_true", default=None, help="also export PNG grids")
    parser.add_argument("--output", help="run directory")


def add_data_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--data-root", help="dataset root (default: QINR_DATA_ROOT)")


def _set(values: dict, path: tuple[str, ...], value: Any) -> None:
    node = values
    for key in path[:-1]:
        node = node.setdefault(key, {})
    node[path[-1]] = value


def flag_overrides(args: argparse.Namespace) -> dict[str, Any]:
    overrides: dict[str, Any] = {}
    for dest, path in _FLAG_PATHS.items():
        value = getattr(args, dest, None)
        if value is not None:
            _set(overrides, path, value)
    if getattr(args, "all_classes", False):
        _set(overrides, ("dataset", "class_filter"), None)
    elif getattr(args, "class_filter", None) is not None:
        _set(overrides, ("dataset", "class_filter"), args.class_filter)
    if getattr(args, "global_scale", None):
        _set(overrides, ("model", "global_scale"), True)
    if getattr(args, "no_wall_time", False):
        _set(overrides, ("training", "record_wall_time"), False)
    if getattr(args, "no_shuffle", False):
        _set(overrides, ("training", "shuffle"), False)
    if getattr(args, "png", None):
        _set(overrides, ("export", "png"), True)
    return overrides


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Published preset for the model/dataset, then the config file, then the flags."""
    file_values = read_config_file(args.config) if args.config else {}
    model = args.model
    if model is None:
        model = "ae" if file_values.get("model", {}).get("variational") is False else "vae"
    dataset = args.dataset or file_values.get("dataset", {}).get("name", DatasetName.MNIST.value)
    decoder = args.decoder or file_values.get("model", {}).get("decoder_kind", DecoderKind.QINR.value)
    preset = published_preset(model, dataset, all_classes=args.all_classes, decoder=decoder)
    return load_run_config(overrides=flag_overrides(args), base=deep_merge(preset, file_values))


def data_root(args: argparse.Namespace) -> Path:
    return Path(getattr(args, "data_root", None) or get_settings().DATA_ROOT)


def load_dataset(config: RunConfig, args: argparse.Namespace) -> SampleSet:
    return load_samples(config.dataset, data_root(args))


def open_checkpoint(path) -> tuple[TrainingState, HybridAutoencoder]:
    state = load_checkpoint(path)
    logger.info(f"Loaded checkpoint {path} at epoch {state.epoch}")
    return state, restore_model(state)


def dataset_from_flags(config: RunConfig, args: argparse.Namespace) -> RunConfig:
    """Checkpoint config with ``--dataset`` / ``--class`` / ``--samples-per-class`` applied."""
    dataset = config.dataset.model_dump(mode="json")
    if getattr(args, "dataset", None):
        dataset["name"] = args.dataset
    if getattr(args, "all_classes", False):
        dataset["class_filter"] = None
    elif getattr(args, "class_filter", None) is not None:
        dataset["class_filter"] = args.class_filter
    if getattr(args, "samples_per_class", None):
        dataset["samples_per_class"] = args.samples_per_class
    return load_run_config(base=deep_merge(config.model_dump(mode="json"), {"dataset": dataset}))


def add_dataset_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--dataset", choices=[d.value for d in DatasetName])
    parser.add_argument("--class", dest="class_filter", type=int)
    parser.add_argument("--all-classes", action="store_true")
    parser.add_argument("--samples-per-class", type=int)
    add_data_flag(parser)


def in_chunks(pixels: np.ndarray, size: int = 100):
    for start in range(0, pixels.shape[0], size):
        yield pixels[start : start + size]


def default_run_dir(config: RunConfig) -> Path:
    target = "all" if config.dataset.class_filter is None else str(config.dataset.class_filter)
    kind = "vae" if config.model.variational else "ae"
    name = f"{kind}-{config.dataset.name.value}-{target}-{config.config_hash()[:8]}"
    return Path(get_settings().RUNS_DIR) / name
