from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from warp_mask.utils import WarpMaskError, readonly

# Every pipeline entry point works at this rate; nothing is resampled
PIPELINE_SAMPLE_RATE = 16000


class UnsupportedFormat(WarpMaskError):
	"""The file is valid RIFF/WAVE but declares something other than mono 16 kHz PCM16/float32."""


class CorruptHeader(WarpMaskError):
	"""The RIFF/WAVE structure could not be parsed."""


class EmptyAudio(WarpMaskError):
	"""The data chunk holds no samples."""


class CorruptData(WarpMaskError):
	"""The samples decoded but hold NaN or infinite values."""


class IoFailure(WarpMaskError):
	"""The file could not be written."""


class Waveform(BaseModel):
	"""Mono time-domain signal. Samples are float64 and frozen after construction."""

	model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

	samples: np.ndarray
	sample_rate_hz: int = Field(PIPELINE_SAMPLE_RATE, gt=0)

	@field_validator('samples', mode='before')
	@classmethod
	def _coerce_samples(cls, value) -> np.ndarray:
		samples = np.asarray(value, dtype=np.float64)
		if samples.ndim != 1:
			raise ValueError(f'samples must be one-dimensional, got shape {samples.shape}')
		if samples.size < 1:
			raise ValueError('samples must hold at least one value')
		if not np.all(np.isfinite(samples)):
			raise ValueError('samples must be finite')
		return readonly(samples)

	def __len__(self) -> int:
		return int(self.samples.size)

	@property
	def duration_s(self) -> float:
		return self.samples.size / self.sample_rate_hz

	@property
	def energy(self) -> float:
		"""Full-clip sum of squares."""
		return float(np.dot(self.samples, self.samples))

	def with_samples(self, samples: np.ndarray) -> Waveform:
		"""New waveform at the same rate."""
		return Waveform(samples=samples, sample_rate_hz=self.sample_rate_hz)
