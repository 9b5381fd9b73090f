"""
Command-line interface for spcimpute
"""

from .main import cli, main, run_cli

__all__ = ["cli", "main", "run_cli"]
