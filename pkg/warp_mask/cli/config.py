"""
Run configuration for the warp-mask CLI.

A flat key=value file supplies defaults; command-line flags override it.
"""

import logging
from pathlib import Path

import click

from warp_mask.pipeline.views import RunConfig

logger = logging.getLogger(__name__)

# ctx.params keys that map one-to-one onto RunConfig fields
CLICK_TO_CONFIG = (
	'manifest',
	'eval_manifest',
	'model',
	'alpha',
	'seed',
	'epochs',
	'gammas',
	'snrs',
	'alphas',
	'workers',
)


def load_run_config(path: str | Path | None) -> RunConfig:
	"""Load a run configuration file, or the defaults when no file is given."""
	if path is None:
		return RunConfig()
	return RunConfig.from_file(path)


def update_config_with_click_args(config: RunConfig, ctx: click.Context) -> RunConfig:
	"""Update configuration with command-line arguments."""
	overrides = {key: ctx.params.get(key) for key in CLICK_TO_CONFIG if key in ctx.params}
	if ctx.command.name == 'alpha-sweep' and ctx.params.get('gamma') is not None:
		overrides['alpha_sweep_gamma'] = ctx.params['gamma']
	config = config.with_overrides(**overrides)
	config.echo(logger)
	return config
