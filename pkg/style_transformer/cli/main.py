# -*- coding: utf-8 -*-
"""
Main: argument parsing and exit-code mapping for the style-transformer command
"""
import argparse
import logging
import sys

from .. import __version__
from ..errors import (
    AttentionIndexError,
    CheckpointError,
    ConfigError,
    DimensionError,
    EmptyDatasetError,
    ImageFormatError,
)
from . import commands

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_MISMATCH = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="style-transformer",
        description="Transformer-based image style transfer: train, stylize, inspect attention",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="Enable debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="Train on content and style image directories")
    p.add_argument("--content-dir", required=True, help="Directory of content images (.ppm/.png)")
    p.add_argument("--style-dir", required=True, help="Directory of style images (.ppm/.png)")
    p.add_argument("--out", required=True, help="Checkpoint file to write")
    p.add_argument("--config", help="JSON run configuration (desk profile when omitted)")
    p.add_argument("--log", help="Training log file (JSON lines); stdout when omitted")
    p.add_argument("--steps", type=int, help="Override train.steps")
    p.add_argument("--lambda", dest="lam", type=float, help="Override loss.lambda")
    p.add_argument("--seed", type=int, help="Override train.seed")
    p.set_defaults(handler=commands.run_train)

    p = sub.add_parser("stylize", help="Stylize one content image")
    p.add_argument("--content", required=True, help="Content image")
    p.add_argument("--style", required=True, help="Style image")
    p.add_argument("--checkpoint", required=True, help="Checkpoint file")
    p.add_argument("--out", required=True, help="Output image (.png or .ppm)")
    p.add_argument("--config", help="JSON run configuration")
    p.set_defaults(handler=commands.run_stylize)

    p = sub.add_parser("video", help="Stylize a directory of frames and report frame differences")
    p.add_argument("--frames", required=True, help="Directory of frames, sorted by name")
    p.add_argument("--style", required=True, help="Style image")
    p.add_argument("--checkpoint", required=True, help="Checkpoint file")
    p.add_argument("--out", required=True, help="Output directory")
    p.add_argument("--report", required=True, help="Frame-difference report (JSON lines)")
    p.add_argument("--workers", type=int, default=1, help="Parallel stylization threads")
    p.add_argument("--config", help="JSON run configuration")
    p.set_defaults(handler=commands.run_video)

    p = sub.add_parser("attention-dump", help="Export one query point's attention map")
    p.add_argument("--content", required=True, help="Content image")
    p.add_argument("--style", required=True, help="Style image")
    p.add_argument("--checkpoint", required=True, help="Checkpoint file")
    p.add_argument(
        "--module",
        choices=["enc", "dec", "dec_self"],
        required=True,
        help="enc: style self-attention; dec: content-to-style cross-attention; dec_self: content self-attention",
    )
    p.add_argument("--layer", type=int, default=0, help="0-based layer index")
    p.add_argument("--point", required=True, help="Query token 'x,y' on the query token grid")
    p.add_argument("--head", type=int, default=-1, help="Head index, -1 averages heads")
    p.add_argument("--out", required=True, help="Grayscale map (.png or .ppm); raw row goes to .txt")
    p.add_argument("--config", help="JSON run configuration")
    p.set_defaults(handler=commands.run_attention_dump)

    p = sub.add_parser("bench", help="Median stylization time")
    p.add_argument("--checkpoint", help="Checkpoint file (seeded initial weights when omitted)")
    p.add_argument("--size", type=int, default=64, help="Square input size, multiple of 32")
    p.add_argument("--repeats", type=int, default=3, help="Timed runs after one warm-up")
    p.add_argument("--config", help="JSON run configuration")
    p.set_defaults(handler=commands.run_bench)
    return parser


def main(argv=None) -> int:
    """
    Run the command line.

    Args:
        argv: Arguments without the program name (sys.argv[1:] when None)

    Returns:
        0 on success, 1 for unreadable or invalid input, 2 for checkpoint or config mismatch
    """
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.handler(args)
    except (CheckpointError, ConfigError) as e:
        logging.error("%s", e)
        return EXIT_MISMATCH
    except (
        OSError,
        ImageFormatError,
        AttentionIndexError,
        DimensionError,
        EmptyDatasetError,
    ) as e:
        logging.error("%s", e)
        return EXIT_INPUT
