from warp_mask.metrics.service import evaluate, log_spectral_distance, segmental_snr, si_sdr
from warp_mask.metrics.views import AllFramesSilent, LengthMismatch, MetricsReport, ZeroEnergy

__all__ = [
	'AllFramesSilent',
	'LengthMismatch',
	'MetricsReport',
	'ZeroEnergy',
	'evaluate',
	'log_spectral_distance',
	'segmental_snr',
	'si_sdr',
]
