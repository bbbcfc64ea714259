from warp_mask.spectral.service import DEFAULT_STFT, istft, lps, magnitude, stft
from warp_mask.spectral.views import (
	DEFAULT_LPS_EPSILON,
	ComplexSpectrogram,
	InconsistentShape,
	LpsFeatures,
	MagnitudeSpectrogram,
	SignalTooShort,
	StftConfig,
)

__all__ = [
	'DEFAULT_LPS_EPSILON',
	'DEFAULT_STFT',
	'ComplexSpectrogram',
	'InconsistentShape',
	'LpsFeatures',
	'MagnitudeSpectrogram',
	'SignalTooShort',
	'StftConfig',
	'istft',
	'lps',
	'magnitude',
	'stft',
]
