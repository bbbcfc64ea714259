"""
Common utilities for the warp-mask CLI.

Logging setup, list-valued option parsing and rich tables for reports.
"""

import logging
import os
import sys
from collections.abc import Sequence

import click
from rich.console import Console
from rich.table import Table

from warp_mask.metrics.views import MetricsReport
from warp_mask.neural.views import TrainHistory
from warp_mask.pipeline.views import SweepRow

HANDLER_NAME = 'warp_mask.console'
LEVEL_ENV_VAR = 'WARP_MASK_LOGGING_LEVEL'

console = Console()


def configure_logging(debug: bool = False) -> None:
	"""Configure logging for the CLI application.

	``--debug`` wins; otherwise WARP_MASK_LOGGING_LEVEL (debug|info|warning) picks the level.
	"""
	if debug:
		level = logging.DEBUG
	else:
		level = logging.getLevelName(os.getenv(LEVEL_ENV_VAR, 'info').upper())
		if not isinstance(level, int):
			level = logging.INFO

	root_logger = logging.getLogger()
	root_logger.setLevel(level)
	if any(h.get_name() == HANDLER_NAME for h in root_logger.handlers):
		return

	console_handler = logging.StreamHandler(sys.stdout)
	console_handler.set_name(HANDLER_NAME)
	console_handler.setFormatter(logging.Formatter('%(asctime)s - %(levelname)s - %(message)s', '%H:%M:%S'))
	root_logger.addHandler(console_handler)


def silence_third_party_loggers() -> None:
	"""Silence noisy third-party loggers."""
	for logger_name in ['soundfile', 'urllib3', 'asyncio', 'numba', 'matplotlib']:
		third_party = logging.getLogger(logger_name)
		third_party.setLevel(logging.ERROR)
		third_party.propagate = False
		third_party.handlers = []


class FloatList(click.ParamType):
	"""Comma separated reals, e.g. ``0,0.375,0.75``."""

	name = 'floats'

	def convert(self, value, param, ctx) -> tuple[float, ...]:
		if isinstance(value, tuple):
			return value
		try:
			values = tuple(float(item) for item in value.split(',') if item.strip())
		except ValueError:
			self.fail(f'{value!r} is not a comma separated list of numbers', param, ctx)
		if not values:
			self.fail('expected at least one number', param, ctx)
		return values


FLOAT_LIST = FloatList()


def print_sweep_table(rows: Sequence[SweepRow], title: str = 'Gamma sweep') -> None:
	with_alpha = any(row.alpha is not None for row in rows)
	table = Table(title=title)
	for column in SweepRow.csv_header(with_alpha).split(','):
		table.add_column(column, justify='right')
	for row in rows:
		table.add_row(*row.to_csv(with_alpha).split(','))
	console.print(table)


def print_report(report: MetricsReport, title: str = 'Metrics') -> None:
	table = Table(title=title)
	table.add_column('metric')
	table.add_column('value', justify='right')
	table.add_row('segmental SNR (dB)', f'{report.seg_snr_db:.3f}')
	table.add_row('SI-SDR (dB)', f'{report.si_sdr_db:.3f}')
	table.add_row('log-spectral distance (dB)', f'{report.lsd_db:.3f}')
	table.add_row('frames', str(report.n_frames))
	console.print(table)


def print_history(history: TrainHistory) -> None:
	table = Table(title='Training history')
	for column in ('epoch', 'lr', 'train_loss', 'val_loss'):
		table.add_column(column, justify='right')
	for record in history.records:
		val = f'{record.val_loss:.5f}' if record.val_loss is not None else '-'
		table.add_row(str(record.epoch), f'{record.lr:.6g}', f'{record.train_loss:.5f}', val)
	console.print(table)
