from __future__ import annotations

import math
from pathlib import Path
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

from warp_mask.audio.views import Waveform
from warp_mask.utils import WarpMaskError

NoiseKind = Literal['white', 'pink', 'babble-surrogate']
NOISE_KINDS: tuple[str, ...] = ('white', 'pink', 'babble-surrogate')

# SNR grids used for toy training and evaluation
TRAIN_SNRS_DB: tuple[float, ...] = (0.0, 5.0, 10.0)
TEST_SNRS_DB: tuple[float, ...] = (0.0, 10.0, 20.0)


class ZeroEnergyInput(WarpMaskError):
	"""Clean speech or noise (after fitting to length) carries no energy."""


class RateMismatch(WarpMaskError):
	"""Clean speech and noise have different sample rates."""


class UnknownKind(WarpMaskError):
	"""Requested noise kind is not one of the synthesizers."""


class InvalidDuration(WarpMaskError):
	"""Requested synthetic clip is too short."""


class ManifestError(WarpMaskError):
	"""A corpus manifest line cannot be parsed."""


class MixSpec(BaseModel):
	model_config = ConfigDict(frozen=True)

	snr_db: float
	seed: int = Field(0, ge=0)
	noise_offset_policy: Literal['random', 'fixed'] = 'random'

	@field_validator('snr_db')
	@classmethod
	def _finite(cls, value: float) -> float:
		if not math.isfinite(value):
			raise ValueError('snr_db must be finite')
		return value


class SpeechLikeParams(BaseModel):
	"""Random draws behind one synthetic speech-like clip."""

	f0_hz: float
	harmonic_gains: list[float]
	harmonic_phases: list[float]
	am_rate_hz: float
	am_phase: float
	am_depth: float
	silences: list[tuple[float, float]] = Field(default_factory=list, description='(start_s, length_s) pairs')

	@property
	def num_harmonics(self) -> int:
		return len(self.harmonic_gains)


class ManifestEntry(BaseModel):
	"""One manifest line: clean_path<TAB>noise_path<TAB>snr_db<TAB>seed."""

	model_config = ConfigDict(frozen=True)

	clean_path: Path
	noise_path: Path
	snr_db: float
	seed: int = Field(ge=0)

	@property
	def utterance_id(self) -> str:
		return f'{self.clean_path.stem}+{self.noise_path.stem}@{self.snr_db:g}dB#{self.seed}'

	def to_line(self) -> str:
		return f'{self.clean_path}\t{self.noise_path}\t{float(self.snr_db)!r}\t{self.seed}'

	def mix_spec(self, snr_db: float | None = None) -> MixSpec:
		return MixSpec(snr_db=self.snr_db if snr_db is None else snr_db, seed=self.seed)


class Mixture(BaseModel):
	"""An additive triple: noisy = clean + noise, with the noise already scaled to the target SNR."""

	model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

	utterance_id: str
	snr_db: float
	clean: Waveform
	noise: Waveform
	noisy: Waveform
