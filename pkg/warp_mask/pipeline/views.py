from __future__ import annotations

import logging
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from warp_mask.mixer.views import TEST_SNRS_DB
from warp_mask.neural.views import NetConfig, TrainConfig
from warp_mask.spectral.views import StftConfig
from warp_mask.utils import WarpMaskError

# Testing warps per downstream consumer
TASK_PRESETS: dict[str, float] = {'asv': 0.75, 'asr': 1.0, 'quality': 1.5}

DEFAULT_GAMMAS: tuple[float, ...] = (0.0, 0.375, 0.5, 0.75, 1.0, 1.5, 3.0)
DEFAULT_ALPHAS: tuple[float, ...] = (0.25, 0.5, 1.0, 1.5, 2.0)

SWEEP_COLUMNS = ('snr_db', 'gamma', 'seg_snr_db', 'si_sdr_db', 'lsd_db', 'mask_mse', 'n_utts')

SweepMetric = Literal['seg_snr_db', 'si_sdr_db', 'lsd_db', 'mask_mse']
HIGHER_IS_BETTER: dict[str, bool] = {'seg_snr_db': True, 'si_sdr_db': True, 'lsd_db': False, 'mask_mse': False}


class ConfigError(WarpMaskError):
	"""A run configuration file is unreadable, has unknown keys or holds invalid values."""


class SweepRow(BaseModel):
	"""Manifest-averaged metrics for one (snr, gamma) cell; ``alpha`` is set by training-warp sweeps."""

	model_config = ConfigDict(frozen=True)

	snr_db: float
	gamma: float = Field(ge=0)
	seg_snr_db: float
	si_sdr_db: float
	lsd_db: float
	mask_mse: float = Field(ge=0)
	n_utts: int = Field(gt=0)
	alpha: float | None = None

	@staticmethod
	def csv_header(with_alpha: bool = False) -> str:
		return ','.join((('alpha',) if with_alpha else ()) + SWEEP_COLUMNS)

	def to_csv(self, with_alpha: bool = False) -> str:
		fields = [
			f'{self.snr_db:g}',
			f'{self.gamma:g}',
			f'{self.seg_snr_db:.6f}',
			f'{self.si_sdr_db:.6f}',
			f'{self.lsd_db:.6f}',
			f'{self.mask_mse:.8f}',
			str(self.n_utts),
		]
		if with_alpha:
			fields.insert(0, f'{self.alpha:g}')
		return ','.join(fields)


class RunConfig(BaseModel):
	"""Flat ``key=value`` run configuration shared by every subcommand.

	Lists are comma separated. Unknown keys are rejected.
	"""

	model_config = ConfigDict(extra='forbid', frozen=True)

	manifest: Path | None = None
	eval_manifest: Path | None = None
	model: Path | None = None
	out_dir: Path = Path('runs')

	fft_size: int = Field(512, gt=1)
	hop: int = Field(256, gt=0)

	context: int = Field(3, ge=0)
	hidden: int = Field(32, gt=0)
	num_blstm_layers: int = Field(3, gt=0)

	lr0: float = Field(1e-3, gt=0)
	lr_decay_per_epoch: float = Field(0.8, gt=0, lt=1)
	adam_beta1: float = Field(0.9, ge=0, lt=1)
	adam_beta2: float = Field(0.999, ge=0, lt=1)
	adam_eps: float = Field(1e-8, gt=0)
	minibatch: int = Field(8, gt=0)
	segment_s: float = Field(2.0, gt=0)
	epochs: int = Field(15, ge=1)
	segments_per_clip: int = Field(4, gt=0)
	validation_fraction: float = Field(0.2, ge=0, lt=1)
	alpha: float = Field(1.5, gt=0)
	seed: int = Field(0, ge=0)

	gammas: tuple[float, ...] = DEFAULT_GAMMAS
	snrs: tuple[float, ...] = TEST_SNRS_DB
	alphas: tuple[float, ...] = DEFAULT_ALPHAS
	alpha_sweep_gamma: float = Field(0.5, ge=0)
	workers: int = Field(4, gt=0)

	@field_validator('gammas', 'snrs', 'alphas', mode='before')
	@classmethod
	def _split_list(cls, value):
		if isinstance(value, str):
			return tuple(float(item) for item in value.split(',') if item.strip())
		return value

	@field_validator('gammas')
	@classmethod
	def _nonnegative_gammas(cls, value: tuple[float, ...]) -> tuple[float, ...]:
		if not value:
			raise ValueError('at least one gamma is required')
		if any(g < 0 for g in value):
			raise ValueError(f'gammas must be nonnegative, got {value}')
		return value

	@field_validator('alphas')
	@classmethod
	def _positive_alphas(cls, value: tuple[float, ...]) -> tuple[float, ...]:
		if any(a <= 0 for a in value):
			raise ValueError(f'alphas must be positive, got {value}')
		return value

	@classmethod
	def parse(cls, text: str, source: str = '<config>') -> RunConfig:
		values: dict[str, str] = {}
		for lineno, raw in enumerate(text.splitlines(), start=1):
			line = raw.split('#', 1)[0].strip()
			if not line:
				continue
			if '=' not in line:
				raise ConfigError(f'{source}:{lineno}: expected key=value, got {raw.strip()!r}')
			key, value = (part.strip() for part in line.split('=', 1))
			values[key] = value
		try:
			return cls(**values)
		except ValidationError as e:
			raise ConfigError(f'{source}: {e}') from e

	@classmethod
	def from_file(cls, path: str | Path) -> RunConfig:
		try:
			text = Path(path).read_text()
		except OSError as e:
			raise ConfigError(f'cannot read config {path}: {e}') from e
		return cls.parse(text, str(path))

	def with_overrides(self, **overrides) -> RunConfig:
		"""Apply command-line values; ``None`` means the flag was not given."""
		given = {k: v for k, v in overrides.items() if v is not None}
		if not given:
			return self
		try:
			return RunConfig(**{**self.model_dump(), **given})
		except ValidationError as e:
			raise ConfigError(str(e)) from e

	def stft_config(self) -> StftConfig:
		try:
			return StftConfig(fft_size=self.fft_size, hop=self.hop)
		except ValidationError as e:
			raise ConfigError(str(e)) from e

	def net_config(self) -> NetConfig:
		return NetConfig(
			feat_dim=self.stft_config().bins,
			context=self.context,
			hidden=self.hidden,
			num_blstm_layers=self.num_blstm_layers,
		)

	def train_config(self) -> TrainConfig:
		return TrainConfig(
			lr0=self.lr0,
			lr_decay_per_epoch=self.lr_decay_per_epoch,
			adam_beta1=self.adam_beta1,
			adam_beta2=self.adam_beta2,
			adam_eps=self.adam_eps,
			minibatch=self.minibatch,
			segment_s=self.segment_s,
			epochs=self.epochs,
			alpha=self.alpha,
			seed=self.seed,
			validation_fraction=self.validation_fraction,
			segments_per_clip=self.segments_per_clip,
			stft=self.stft_config(),
		)

	def lines(self) -> list[str]:
		lines = []
		for key, value in self.model_dump().items():
			if isinstance(value, tuple):
				value = ','.join(f'{v:g}' for v in value)
			lines.append(f'{key}={value}')
		return lines

	def echo(self, log: logging.Logger) -> None:
		for line in self.lines():
			log.info(f'config {line}')
