"""
Command-line surface of the pipeline.
"""

from .export import export_slices, to_gray, write_pgm
from .main import build_parser, exit_code_for, main

__all__ = ["build_parser", "exit_code_for", "main", "export_slices", "to_gray", "write_pgm"]
