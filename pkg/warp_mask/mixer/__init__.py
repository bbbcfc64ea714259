from warp_mask.mixer.service import (
	build_toy_corpus,
	measured_snr,
	mix_at_snr,
	mix_entry,
	read_manifest,
	speech_like_params,
	synth_noise,
	synth_speech_like,
	write_manifest,
)
from warp_mask.mixer.views import (
	NOISE_KINDS,
	TEST_SNRS_DB,
	TRAIN_SNRS_DB,
	InvalidDuration,
	ManifestEntry,
	ManifestError,
	MixSpec,
	Mixture,
	RateMismatch,
	UnknownKind,
	ZeroEnergyInput,
)

__all__ = [
	'NOISE_KINDS',
	'TEST_SNRS_DB',
	'TRAIN_SNRS_DB',
	'InvalidDuration',
	'ManifestEntry',
	'ManifestError',
	'MixSpec',
	'Mixture',
	'RateMismatch',
	'UnknownKind',
	'ZeroEnergyInput',
	'build_toy_corpus',
	'measured_snr',
	'mix_at_snr',
	'mix_entry',
	'read_manifest',
	'speech_like_params',
	'synth_noise',
	'synth_speech_like',
	'write_manifest',
]
