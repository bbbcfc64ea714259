from warp_mask.audio.service import read_wav, require_pipeline_rate, write_wav
from warp_mask.audio.views import (
	PIPELINE_SAMPLE_RATE,
	CorruptData,
	CorruptHeader,
	EmptyAudio,
	IoFailure,
	UnsupportedFormat,
	Waveform,
)

__all__ = [
	'PIPELINE_SAMPLE_RATE',
	'CorruptData',
	'CorruptHeader',
	'EmptyAudio',
	'IoFailure',
	'UnsupportedFormat',
	'Waveform',
	'read_wav',
	'require_pipeline_rate',
	'write_wav',
]
