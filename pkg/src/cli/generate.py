import argparse
import logging
from pathlib import Path

import numpy as np

from src.cli.common import open_checkpoint
from src.core.exceptions import ContractError
from src.core.imaging import export_grid, grid_shape, tile_grid
from src.models import generate

logger = logging.getLogger(__name__)


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser("generate", help="decode prior samples of a VAE into an image grid")
    parser.add_argument("--checkpoint", required=True)
    parser.add_argument("-n", "--count", type=int, default=10)
    parser.add_argument("--seed", type=int, help="prior sampling seed (default: seeds.sample)")
    parser.add_argument("--cols", type=int, help="tiles per row (default: all in one row)")
    parser.add_argument("--png", action="store_true")
    parser.add_argument("--output", help="output path without extension")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    state, model = open_checkpoint(args.checkpoint)
    config = state.config
    if not model.variational:
        raise ContractError("generate needs a VAE checkpoint; use reconstruct for an autoencoder")
    if args.count < 1:
        raise ContractError(f"generate needs at least one image, got {args.count}")
    seed = config.seeds.sample if args.seed is None else args.seed
    images = generate(model, args.count, np.random.default_rng(seed))
    logger.info(f"Generated {args.count} prior samples with seed {seed}")
    rows, cols = grid_shape(args.count, args.cols or config.export.grid_cols)
    grid = tile_grid(images, rows, cols, config.model.image_size, config.export.separator)
    stem = Path(args.output) if args.output else Path(args.checkpoint).parent / f"samples-seed{seed}"
    for path in export_grid(stem, grid, png=args.png or config.export.png):
        print(path)
    return 0
