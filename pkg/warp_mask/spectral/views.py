from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from scipy import signal

from warp_mask.audio.views import PIPELINE_SAMPLE_RATE
from warp_mask.utils import WarpMaskError, readonly

DEFAULT_LPS_EPSILON = 1e-12


class SignalTooShort(WarpMaskError):
	"""The waveform is shorter than one analysis window."""


class InconsistentShape(WarpMaskError):
	"""A spectrogram does not match its STFT configuration."""


class StftConfig(BaseModel):
	"""Framing of the short-time Fourier transform.

	The defaults give 257 bins at 16 kHz with a periodic Hann window at 50% overlap.
	"""

	model_config = ConfigDict(frozen=True)

	fft_size: int = Field(512, gt=1)
	hop: int = Field(256, gt=0)
	window: str = 'hann'

	@model_validator(mode='after')
	def _check_framing(self) -> StftConfig:
		if self.fft_size & (self.fft_size - 1):
			raise ValueError(f'fft_size must be a power of two, got {self.fft_size}')
		if self.hop > self.fft_size:
			raise ValueError(f'hop {self.hop} exceeds fft_size {self.fft_size}')
		noverlap = self.fft_size - self.hop
		if not signal.check_COLA(self.window, self.fft_size, noverlap):
			raise ValueError(f'{self.window} window is not constant-overlap-add at hop {self.hop}')
		if not signal.check_NOLA(self.window, self.fft_size, noverlap):
			raise ValueError(f'{self.window} window fails the nonzero-overlap-add condition at hop {self.hop}')
		return self

	@property
	def bins(self) -> int:
		return self.fft_size // 2 + 1

	@property
	def pad(self) -> int:
		"""Zeros added at each end of the signal before framing."""
		return self.fft_size - self.hop

	def analysis_window(self) -> np.ndarray:
		# periodic (DFT-even) window
		return signal.get_window(self.window, self.fft_size, fftbins=True)

	def num_frames(self, num_samples: int) -> int:
		return (num_samples + 2 * self.pad - self.fft_size) // self.hop + 1


def _frozen_matrix(value, dtype) -> np.ndarray:
	data = np.asarray(value, dtype=dtype)
	if data.ndim != 2:
		raise ValueError(f'expected a frames x bins matrix, got shape {data.shape}')
	if not np.all(np.isfinite(data)):
		raise ValueError('entries must be finite')
	return readonly(data)


class ComplexSpectrogram(BaseModel):
	"""One-sided STFT, frames x bins. ``num_samples`` is the length of the analysed signal."""

	model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

	data: np.ndarray
	config: StftConfig = Field(default_factory=StftConfig)
	sample_rate_hz: int = Field(PIPELINE_SAMPLE_RATE, gt=0)
	num_samples: int | None = Field(None, ge=1)

	@field_validator('data', mode='before')
	@classmethod
	def _coerce(cls, value) -> np.ndarray:
		return _frozen_matrix(value, np.complex128)

	@model_validator(mode='after')
	def _check_bins(self) -> ComplexSpectrogram:
		if self.data.shape[1] != self.config.bins:
			raise ValueError(f'{self.data.shape[1]} bins, config implies {self.config.bins}')
		return self

	@property
	def shape(self) -> tuple[int, int]:
		return self.data.shape

	@property
	def frames(self) -> int:
		return self.data.shape[0]

	def with_data(self, data: np.ndarray) -> ComplexSpectrogram:
		return ComplexSpectrogram(
			data=data, config=self.config, sample_rate_hz=self.sample_rate_hz, num_samples=self.num_samples
		)


class MagnitudeSpectrogram(BaseModel):
	"""Nonnegative magnitudes such as |S|, |N| or |Y|."""

	model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

	data: np.ndarray
	config: StftConfig = Field(default_factory=StftConfig)
	sample_rate_hz: int = Field(PIPELINE_SAMPLE_RATE, gt=0)

	@field_validator('data', mode='before')
	@classmethod
	def _coerce(cls, value) -> np.ndarray:
		data = _frozen_matrix(value, np.float64)
		if np.any(data < 0):
			raise ValueError('magnitudes must be nonnegative')
		return data

	@property
	def shape(self) -> tuple[int, int]:
		return self.data.shape


class LpsFeatures(BaseModel):
	"""Natural-log power spectra floored at ``epsilon``."""

	model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

	data: np.ndarray
	epsilon: float = Field(DEFAULT_LPS_EPSILON, gt=0)

	@field_validator('data', mode='before')
	@classmethod
	def _coerce(cls, value) -> np.ndarray:
		return _frozen_matrix(value, np.float64)

	@model_validator(mode='after')
	def _check_floor(self) -> LpsFeatures:
		if np.any(self.data < np.log(self.epsilon)):
			raise ValueError(f'entries below ln(epsilon) = {np.log(self.epsilon):.3f}')
		return self

	@property
	def shape(self) -> tuple[int, int]:
		return self.data.shape

	@property
	def frames(self) -> int:
		return self.data.shape[0]

	@property
	def bins(self) -> int:
		return self.data.shape[1]
