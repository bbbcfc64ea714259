import math

from pydantic import BaseModel, ConfigDict, Field, model_validator

from warp_mask.utils import WarpMaskError

SEG_SNR_FLOOR_DB = -10.0
SEG_SNR_CEIL_DB = 35.0
SI_SDR_CAP_DB = 60.0


class LengthMismatch(WarpMaskError):
	"""Reference and estimate differ in length, or are shorter than one analysis frame."""


class AllFramesSilent(WarpMaskError):
	"""Every segmental-SNR frame of the reference is below the silence threshold."""


class ZeroEnergy(WarpMaskError):
	"""A signal that must carry energy is all zeros."""


class MetricsReport(BaseModel):
	"""Desk-scale quality proxies for one (reference, estimate) pair."""

	model_config = ConfigDict(frozen=True)

	seg_snr_db: float
	si_sdr_db: float
	lsd_db: float
	mask_mse: float = Field(0.0, ge=0)
	n_frames: int = Field(ge=0)

	@model_validator(mode='after')
	def _finite(self):
		for name in ('seg_snr_db', 'si_sdr_db', 'lsd_db', 'mask_mse'):
			if not math.isfinite(getattr(self, name)):
				raise ValueError(f'{name} must be finite')
		return self
