"""
Command-line subcommands
"""
from .estimate import estimate, scan
from .validate import validate

__all__ = ["validate", "estimate", "scan"]
