from __future__ import annotations

import math

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from warp_mask.spectral.views import StftConfig
from warp_mask.utils import WarpMaskError, readonly

LSTM_GATES = 4  # input, forget, candidate, output
DIRECTIONS = ('fwd', 'bwd')


class EmptyManifest(WarpMaskError):
	"""Training was asked to run on a manifest without usable entries."""


class NonFiniteLoss(WarpMaskError):
	"""Training produced a NaN or infinite loss and was aborted."""


class ModelFormatError(WarpMaskError):
	"""A model file is malformed or does not match its header."""


class NetConfig(BaseModel):
	"""Shape of the densely connected BLSTM mask estimator.

	The defaults are desk scale (32 cells per direction); :meth:`full_size` gives the full-size net.
	"""

	model_config = ConfigDict(frozen=True)

	feat_dim: int = Field(257, gt=0)
	context: int = Field(3, ge=0)
	hidden: int = Field(32, gt=0)
	num_blstm_layers: int = Field(3, gt=0)

	@classmethod
	def full_size(cls, **overrides) -> NetConfig:
		return cls(**{'hidden': 512, **overrides})

	@property
	def kernel(self) -> int:
		return 2 * self.context + 1

	@property
	def fc_dim(self) -> int:
		return self.feat_dim

	def block_input_dim(self, block: int) -> int:
		"""Input width of BLSTM block *block* (1-based): conv output plus every earlier block output."""
		return block * self.feat_dim

	def param_shapes(self) -> dict[str, tuple[int, ...]]:
		"""Every tensor of the network, in the order the model file stores them."""
		f, h = self.feat_dim, self.hidden
		shapes: dict[str, tuple[int, ...]] = {'conv.W': (self.kernel, f, f), 'conv.b': (f,)}
		for block in range(1, self.num_blstm_layers + 1):
			d_in = self.block_input_dim(block)
			for direction in DIRECTIONS:
				shapes[f'blstm{block}.{direction}.W_x'] = (d_in, LSTM_GATES * h)
				shapes[f'blstm{block}.{direction}.W_h'] = (h, LSTM_GATES * h)
				shapes[f'blstm{block}.{direction}.b'] = (LSTM_GATES * h,)
			shapes[f'blstm{block}.proj.W'] = (2 * h, f)
			shapes[f'blstm{block}.proj.b'] = (f,)
		shapes['fc1.W'] = (f, self.fc_dim)
		shapes['fc1.b'] = (self.fc_dim,)
		shapes['fc2.W'] = (self.fc_dim, f)
		shapes['fc2.b'] = (f,)
		return shapes


class TrainConfig(BaseModel):
	"""Optimisation recipe. Defaults are desk scale; :meth:`full_size` restores batch 80 and 8 s crops."""

	model_config = ConfigDict(frozen=True)

	lr0: float = Field(1e-3, gt=0)
	lr_decay_per_epoch: float = Field(0.8, gt=0, lt=1)
	minibatch: int = Field(8, gt=0)
	segment_s: float = Field(2.0, gt=0)
	epochs: int = Field(15, ge=1)
	alpha: float = Field(1.5, gt=0)
	seed: int = Field(0, ge=0)
	adam_beta1: float = Field(0.9, ge=0, lt=1)
	adam_beta2: float = Field(0.999, ge=0, lt=1)
	adam_eps: float = Field(1e-8, gt=0)
	validation_fraction: float = Field(0.2, ge=0, lt=1)
	segments_per_clip: int = Field(4, gt=0)
	stft: StftConfig = Field(default_factory=StftConfig)

	@classmethod
	def full_size(cls, **overrides) -> TrainConfig:
		return cls(**{'minibatch': 80, 'segment_s': 8.0, **overrides})

	def lr_at(self, epoch: int) -> float:
		"""Learning rate for 0-based *epoch*."""
		return self.lr0 * self.lr_decay_per_epoch**epoch

	def segment_frames(self, sample_rate_hz: int) -> int:
		return max(1, self.stft.num_frames(int(round(self.segment_s * sample_rate_hz))))


class DBlstmParams(BaseModel):
	"""Trained (or freshly initialised) network tensors plus the alpha their targets were warped with."""

	model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

	config: NetConfig
	alpha_trained: float = Field(gt=0)
	tensors: dict[str, np.ndarray]

	@field_validator('tensors', mode='before')
	@classmethod
	def _freeze(cls, value) -> dict[str, np.ndarray]:
		return {name: readonly(np.asarray(t, dtype=np.float64)) for name, t in dict(value).items()}

	@model_validator(mode='after')
	def _check_shapes(self) -> DBlstmParams:
		expected = self.config.param_shapes()
		if list(self.tensors) != list(expected):
			missing = set(expected) ^ set(self.tensors)
			raise ValueError(f'tensor names do not match the config (differing: {sorted(missing)})')
		for name, shape in expected.items():
			tensor = self.tensors[name]
			if tensor.shape != shape:
				raise ValueError(f'{name} has shape {tensor.shape}, config implies {shape}')
			if not np.all(np.isfinite(tensor)):
				raise ValueError(f'{name} has non-finite entries')
		return self

	def __getitem__(self, name: str) -> np.ndarray:
		return self.tensors[name]

	@property
	def num_weights(self) -> int:
		return sum(t.size for t in self.tensors.values())

	def with_tensors(self, tensors: dict[str, np.ndarray]) -> DBlstmParams:
		return DBlstmParams(config=self.config, alpha_trained=self.alpha_trained, tensors=tensors)


class AdamState(BaseModel):
	"""First and second moment accumulators per tensor, and the number of updates taken."""

	model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

	m: dict[str, np.ndarray]
	v: dict[str, np.ndarray]
	step: int = Field(0, ge=0)

	@classmethod
	def zeros_like(cls, tensors: dict[str, np.ndarray]) -> AdamState:
		return cls(
			m={name: np.zeros_like(t, dtype=np.float64) for name, t in tensors.items()},
			v={name: np.zeros_like(t, dtype=np.float64) for name, t in tensors.items()},
		)


class EpochRecord(BaseModel):
	model_config = ConfigDict(frozen=True)

	epoch: int = Field(ge=0)
	lr: float = Field(gt=0)
	train_loss: float
	val_loss: float | None = None

	@model_validator(mode='after')
	def _finite(self) -> EpochRecord:
		for value in (self.train_loss, self.val_loss):
			if value is not None and not math.isfinite(value):
				raise ValueError('epoch losses must be finite')
		return self


class TrainHistory(BaseModel):
	records: list[EpochRecord] = Field(default_factory=list)

	def append(self, record: EpochRecord) -> None:
		self.records.append(record)

	@property
	def train_losses(self) -> list[float]:
		return [r.train_loss for r in self.records]

	@property
	def val_losses(self) -> list[float | None]:
		return [r.val_loss for r in self.records]

	def __len__(self) -> int:
		return len(self.records)
