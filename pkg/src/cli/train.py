import argparse
import logging

from src.cli.common import add_config_flags, add_data_flag, default_run_dir, load_dataset, resolve_config
from src.core.config import write_resolved_config
from src.core.training import load_checkpoint, train

logger = logging.getLogger(__name__)


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser("train", help="train an AE or VAE and write a run directory")
    add_config_flags(parser)
    add_data_flag(parser)
    parser.add_argument("--resume", help="checkpoint to continue from")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    run_dir = default_run_dir(config) if config.output_dir is None else config.output_dir
    config = config.model_copy(update={"output_dir": str(run_dir)})
    path = write_resolved_config(config, run_dir)
    logger.info(f"Resolved config written to {path} (hash {config.config_hash()[:12]})")

    samples = load_dataset(config, args)
    resume = load_checkpoint(args.resume) if args.resume else None
    _, records = train(config, samples, run_dir=run_dir, resume=resume)
    if records:
        last = records[-1]
        logger.info(f"Finished epoch {last.epoch}: rec {last.rec_loss:.4f} total {last.total_loss:.4f}")
    print(run_dir)
    return 0
