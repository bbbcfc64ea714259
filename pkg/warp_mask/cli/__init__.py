"""
warp-mask CLI Module

Command-line interface for mixing, training, enhancement and sweep reports.
"""

from .cli import cli, main, run

__all__ = ['cli', 'main', 'run']
