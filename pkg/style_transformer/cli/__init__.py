"""Command-line surface for style-transformer."""

from .config import RunConfig, load_run_config, parse_run_config
from .main import build_parser, main

__all__ = ["RunConfig", "load_run_config", "parse_run_config", "build_parser", "main"]
