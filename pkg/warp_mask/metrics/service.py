import logging

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from warp_mask.audio.views import Waveform
from warp_mask.mask.views import Mask
from warp_mask.metrics.views import (
	SEG_SNR_CEIL_DB,
	SEG_SNR_FLOOR_DB,
	SI_SDR_CAP_DB,
	AllFramesSilent,
	LengthMismatch,
	MetricsReport,
	ZeroEnergy,
)
from warp_mask.neural.network import loss_mse
from warp_mask.spectral.service import DEFAULT_STFT, stft
from warp_mask.spectral.views import StftConfig

logger = logging.getLogger(__name__)

SILENT_FRAME_ENERGY = 1e-10
LSD_MAGNITUDE_FLOOR = 1e-10
DB_PER_NEPER = 20.0 / np.log(10.0)


def _require_equal_lengths(ref: Waveform, est: Waveform) -> None:
	if len(ref) != len(est):
		raise LengthMismatch(f'reference has {len(ref)} samples, estimate has {len(est)}')


def segmental_snr(ref: Waveform, est: Waveform, frame_ms: float = 30.0) -> float:
	"""Mean per-frame SNR over 30 ms frames at 50% overlap, each clamped to [-10, 35] dB.

	Frames whose reference energy is below 1e-10 are skipped.
	"""
	_require_equal_lengths(ref, est)
	frame_len = int(round(ref.sample_rate_hz * frame_ms / 1000.0))
	if len(ref) < frame_len:
		raise LengthMismatch(f'{len(ref)} samples is shorter than one {frame_ms} ms frame')
	hop = frame_len // 2

	ref_frames = sliding_window_view(ref.samples, frame_len)[::hop]
	err_frames = sliding_window_view(ref.samples - est.samples, frame_len)[::hop]
	ref_energy = np.sum(ref_frames**2, axis=1)
	err_energy = np.sum(err_frames**2, axis=1)

	active = ref_energy >= SILENT_FRAME_ENERGY
	if not np.any(active):
		raise AllFramesSilent(f'all {active.size} reference frames are silent')

	with np.errstate(divide='ignore'):
		frame_snr = 10.0 * np.log10(ref_energy[active] / err_energy[active])
	return float(np.mean(np.clip(frame_snr, SEG_SNR_FLOOR_DB, SEG_SNR_CEIL_DB)))


def si_sdr(ref: Waveform, est: Waveform) -> float:
	"""Scale-invariant SDR, capped at +60 dB."""
	_require_equal_lengths(ref, est)
	ref_energy = ref.energy
	if ref_energy == 0 or est.energy == 0:
		raise ZeroEnergy('SI-SDR needs nonzero reference and estimate')

	scale = np.dot(est.samples, ref.samples) / ref_energy
	target = scale * ref.samples
	residual = est.samples - target
	target_energy = float(np.dot(target, target))
	residual_energy = float(np.dot(residual, residual))
	if residual_energy == 0:
		return SI_SDR_CAP_DB
	value = 10.0 * np.log10(max(target_energy, np.finfo(np.float64).tiny) / residual_energy)
	return float(min(value, SI_SDR_CAP_DB))


def log_spectral_distance(ref: Waveform, est: Waveform, config: StftConfig = DEFAULT_STFT) -> float:
	"""RMS over frames of the per-frame RMS (over bins) log-magnitude difference, in dB."""
	_require_equal_lengths(ref, est)
	ref_mag = np.maximum(np.abs(stft(ref, config).data), LSD_MAGNITUDE_FLOOR)
	est_mag = np.maximum(np.abs(stft(est, config).data), LSD_MAGNITUDE_FLOOR)
	diff_db = DB_PER_NEPER * (np.log(ref_mag) - np.log(est_mag))
	per_frame = np.sqrt(np.mean(diff_db**2, axis=1))
	return float(np.sqrt(np.mean(per_frame**2)))


def evaluate(
	ref: Waveform,
	est: Waveform,
	predicted_mask: Mask | None = None,
	oracle_mask: Mask | None = None,
	config: StftConfig = DEFAULT_STFT,
) -> MetricsReport:
	"""All proxies for one pair. ``mask_mse`` compares the applied mask with its oracle when both are given."""
	mask_mse = loss_mse(predicted_mask, oracle_mask) if predicted_mask is not None and oracle_mask is not None else 0.0
	return MetricsReport(
		seg_snr_db=segmental_snr(ref, est),
		si_sdr_db=si_sdr(ref, est),
		lsd_db=log_spectral_distance(ref, est, config),
		mask_mse=mask_mse,
		n_frames=config.num_frames(len(ref)),
	)
