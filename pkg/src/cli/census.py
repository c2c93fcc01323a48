import argparse
import json

from src.cli.common import add_config_flags, resolve_config
from src.models import parameter_census
from src.schemas.census import ParameterCensus


def add_parser(subparsers) -> None:
    parser = subparsers.add_parser("census", help="trainable parameter counts per submodule")
    add_config_flags(parser)
    parser.add_argument("--json", action="store_true", help="print the full report as JSON")
    parser.set_defaults(handler=run)


def format_census(census: ParameterCensus) -> str:
    width = max(len(entry.name) for entry in census.entries)
    lines = [f"{entry.name:<{width}}  {entry.group:<9}  {entry.size:>8}" for entry in census.entries]
    lines.append("")
    lines += [f"{name:<{width}}  {'':<9}  {count:>8}" for name, count in census.by_module().items()]
    lines.append(f"classical {census.classical}  quantum {census.quantum}  total {census.total}")
    if census.classical_decoder_total is not None:
        lines.append(
            f"decoder {census.decoder_total}  classical-linear decoder {census.classical_decoder_total} "
            f"(ratio {census.classical_decoder_ratio:.3f})"
        )
    return "\n".join(lines)


def run(args: argparse.Namespace) -> int:
    config = resolve_config(args)
    census = parameter_census(config.model)
    print(json.dumps(census.model_dump(), indent=2) if args.json else format_census(census))
    return 0
