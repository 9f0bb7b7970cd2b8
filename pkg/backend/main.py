"""
CfL codec toolkit command line.
Runs quantizer sweeps with Chroma-from-Luma on and off, DC predictor analysis,
per-block decision dumps and fitting comparisons.
"""

import argparse
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import pandas as pd
from pydantic import ValidationError as PydanticValidationError

from config import load_config_file, settings
from exceptions import CflCodecError, InputNotFoundError, ValidationError
from logging_config import get_logger, setup_logging
from models.cfl_model import ANALYSIS_SIZES
from models.schemas import BLOCK_COLUMNS, DC_ERROR_COLUMNS, FIT_COLUMNS, CflMode, RunConfig
from services.analysis_service import analyze_dc, block_summary, compare_fitting, dump_blocks
from services.corpus_service import load_corpus
from services.sweep_service import SweepService, format_bd_table, write_bd_rate, write_rd_points, write_table

logger = get_logger(__name__)

# Settings fields that seed a RunConfig before the config file and flags.
SETTINGS_FIELDS = (
    "quantizers", "lambda_const", "rate_model", "block_size", "chroma_format",
    "step_scale", "deadzone", "jobs", "seed", "out_dir",
)

# argparse dests named after RunConfig fields
FLAG_FIELDS = (
    "inputs", "quantizers", "cfl", "lambda_const", "rate_model", "search_space", "jobs", "seed",
    "out_dir", "synthetic", "affine", "chroma_format", "block_size", "step_scale", "deadzone",
)


def quantizer_list(value: str) -> List[int]:
    try:
        return [int(q) for q in value.replace(" ", "").split(",") if q]
    except ValueError:
        raise argparse.ArgumentTypeError(f"quantizers must be comma-separated integers, got {value!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", dest="inputs", action="append", default=None,
                        help="Y4M/PPM file or directory (repeatable)")
    common.add_argument("--synthetic", type=int, default=None, help="add N generated images")
    common.add_argument("--affine", action="store_true", default=None,
                        help="generated images carry affine chroma")
    common.add_argument("--quantizers", type=quantizer_list, default=None, help="e.g. 20,32,43,55")
    common.add_argument("--cfl", choices=[m.value for m in CflMode], default=None)
    common.add_argument("--lambda-const", dest="lambda_const", type=float, default=None)
    common.add_argument("--rate-model", dest="rate_model", choices=["param-only", "full"], default=None)
    common.add_argument("--search-space", dest="search_space", choices=["full", "pruned"], default=None)
    common.add_argument("--format", dest="chroma_format", choices=["420", "422", "440", "444"], default=None)
    common.add_argument("--block-size", dest="block_size", type=int, default=None)
    common.add_argument("--step-scale", dest="step_scale", type=float, default=None)
    common.add_argument("--deadzone", type=float, default=None)
    common.add_argument("--jobs", type=int, default=None)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--out", dest="out_dir", default=None, help="output directory")
    common.add_argument("--config", default=None, help="TOML or JSON run configuration")
    common.add_argument("--log-level", dest="log_level", default=None)
    common.add_argument("--log-json", dest="log_json", action="store_true", default=None)

    parser = argparse.ArgumentParser(prog="cfl-codec", description=__doc__.strip().splitlines()[0])
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("eval", parents=[common], help="RD sweep and BD-rate table")
    analyze = commands.add_parser("analyze-dc", parents=[common], help="DC predictor error distribution")
    analyze.add_argument("--recon-q", dest="recon_q", type=int, default=None,
                         help="take neighbours from reconstructions at this quantizer")
    commands.add_parser("dump-blocks", parents=[common], help="per-block RD decisions")
    commands.add_parser("compare-fit", parents=[common], help="implicit vs explicit vs signalled fits")
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults < environment < config file < flags."""
    values: Dict[str, Any] = {name: getattr(settings, name) for name in SETTINGS_FIELDS}
    if args.config:
        values.update(load_config_file(args.config))
    for field in FLAG_FIELDS:
        flag = getattr(args, field, None)
        if flag is not None:
            values[field] = flag

    try:
        config = RunConfig(**values)
    except PydanticValidationError as e:
        errors = [
            {"loc": ".".join(str(part) for part in error.get("loc", [])), "msg": str(error.get("msg", ""))}
            for error in e.errors()
        ]
        summary = "; ".join(f"{err['loc']}: {err['msg']}" for err in errors)
        raise ValidationError(f"invalid configuration: {summary}", details={"validation_errors": errors})

    for raw in config.inputs:
        if not Path(raw).exists():
            raise InputNotFoundError(raw)
    return config


def cmd_eval(config: RunConfig, args: argparse.Namespace) -> int:
    corpus = load_corpus(config)
    service = SweepService(config)
    points = service.sweep(corpus)
    out_dir = Path(config.out_dir)
    write_rd_points(points, out_dir)

    if config.cfl != CflMode.BOTH:
        logger.info("BD-rate table needs --cfl both; wrote RD points only")
        return 0
    rows = service.bd_rate_table(points)
    write_bd_rate(rows, out_dir)
    print(format_bd_table(rows))
    return 0


def cmd_analyze_dc(config: RunConfig, args: argparse.Namespace) -> int:
    corpus = load_corpus(config)
    rows = analyze_dc(corpus, config, ANALYSIS_SIZES, recon_q=args.recon_q)
    write_table(rows, DC_ERROR_COLUMNS, Path(config.out_dir), "dc_error")
    print(pd.DataFrame([row.model_dump() for row in rows], columns=DC_ERROR_COLUMNS).to_string(index=False))
    return 0


def cmd_dump_blocks(config: RunConfig, args: argparse.Namespace) -> int:
    corpus = load_corpus(config)
    traces = dump_blocks(corpus, config)
    summary = block_summary(traces)
    write_table(traces, BLOCK_COLUMNS, Path(config.out_dir), "blocks", summary=summary)
    print(f"{summary['blocks']} blocks, CfL share {summary['cfl_fraction']:.3f}")
    return 0


def cmd_compare_fit(config: RunConfig, args: argparse.Namespace) -> int:
    corpus = load_corpus(config)
    rows = compare_fitting(corpus, ANALYSIS_SIZES)
    write_table(rows, FIT_COLUMNS, Path(config.out_dir), "fit_comparison")
    print(pd.DataFrame([row.model_dump() for row in rows], columns=FIT_COLUMNS).to_string(index=False))
    return 0


COMMANDS: Dict[str, Callable[[RunConfig, argparse.Namespace], int]] = {
    "eval": cmd_eval,
    "analyze-dc": cmd_analyze_dc,
    "dump-blocks": cmd_dump_blocks,
    "compare-fit": cmd_compare_fit,
}


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level, args.log_json)

    try:
        config = resolve_config(args)
        logger.info(f"Running {args.command} into {config.out_dir}")
        return COMMANDS[args.command](config, args)
    except CflCodecError as e:
        logger.error(f"{e.__class__.__name__}: {e.message}", extra={"details": e.details})
        return e.exit_code
    except Exception as e:
        logger.error(f"Unhandled exception: {str(e)}", exc_info=True)
        return 1


if __name__ == "__main__":
    sys.exit(main())
