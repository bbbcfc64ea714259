from __future__ import annotations

from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from warp_mask.utils import WarpMaskError, readonly

# Lowest mask value ever produced (-160 dB); keeps log|M| finite
MASK_FLOOR = 1e-8

MaskKind = Literal['irm', 'train_target', 'test', 'predicted']


class ShapeMismatch(WarpMaskError):
	"""Two T-F matrices that must align do not."""


class InvalidWarp(WarpMaskError):
	"""A warping factor outside its domain (alpha <= 0 or gamma < 0)."""


class MaskFormatError(WarpMaskError):
	"""A mask dump file is malformed."""


class WarpSpec(BaseModel):
	"""The three exponents of the mask family.

	beta shapes the standalone IRM, alpha the training target and gamma the mask applied at test time.
	gamma = 0 means no enhancement.
	"""

	model_config = ConfigDict(frozen=True)

	beta: float = Field(0.5, gt=0)
	alpha: float = Field(1.5, gt=0)
	gamma: float = Field(0.75, ge=0)

	@property
	def test_exponent(self) -> float:
		"""Exponent applied to a predicted training mask."""
		return self.gamma / self.alpha


class Mask(BaseModel):
	"""Real T-F gains in [MASK_FLOOR, 1], frames x bins."""

	model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

	data: np.ndarray
	kind: MaskKind

	@field_validator('data', mode='before')
	@classmethod
	def _coerce(cls, value) -> np.ndarray:
		data = np.asarray(value, dtype=np.float64)
		if data.ndim != 2:
			raise ValueError(f'mask must be a frames x bins matrix, got shape {data.shape}')
		if not np.all((data >= MASK_FLOOR) & (data <= 1.0)):
			raise ValueError(f'mask entries must lie in [{MASK_FLOOR}, 1]')
		return readonly(data)

	@classmethod
	def clamped(cls, data: np.ndarray, kind: MaskKind) -> Mask:
		"""Build a mask after clamping *data* into the valid range."""
		return cls(data=np.clip(data, MASK_FLOOR, 1.0), kind=kind)

	@property
	def shape(self) -> tuple[int, int]:
		return self.data.shape
