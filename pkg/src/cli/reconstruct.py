import argparse
from pathlib import Path

import numpy as np

from src.cli.common import add_dataset_flags, dataset_from_flags, load_dataset, open_checkpoint
from src.core.data import to_unit_range
from src.core.exceptions import ContractError
from src.core.imaging import export_grid, tile_grid
from src.models import reconstruct


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser("reconstruct", help="originals above their reconstructions")
    parser.add_argument("--checkpoint", required=True)
    parser.add_argument("-n", "--count", type=int, default=8)
    parser.add_argument("--png", action="store_true")
    parser.add_argument("--output", help="output path without extension")
    add_dataset_flags(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    state, model = open_checkpoint(args.checkpoint)
    config = dataset_from_flags(state.config, args)
    if args.count < 1:
        raise ContractError(f"reconstruct needs at least one image, got {args.count}")
    samples = load_dataset(config, args).subset(args.count)
    originals = to_unit_range(samples.pixels).reshape(len(samples), -1)
    rebuilt = reconstruct(model, samples.pixels)
    grid = tile_grid(
        np.concatenate([originals, rebuilt]),
        2,
        len(samples),
        config.model.image_size,
        config.export.separator,
    )
    target = "all" if config.dataset.class_filter is None else config.dataset.class_filter
    stem = (
        Path(args.output)
        if args.output
        else Path(args.checkpoint).parent / f"reconstruction-{config.dataset.name.value}-{target}"
    )
    for path in export_grid(stem, grid, png=args.png or config.export.png):
        print(path)
    return 0
