import logging

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from warp_mask.audio.views import Waveform
from warp_mask.spectral.views import (
	DEFAULT_LPS_EPSILON,
	ComplexSpectrogram,
	InconsistentShape,
	LpsFeatures,
	MagnitudeSpectrogram,
	SignalTooShort,
	StftConfig,
)

logger = logging.getLogger(__name__)

DEFAULT_STFT = StftConfig()


def stft(waveform: Waveform, config: StftConfig = DEFAULT_STFT) -> ComplexSpectrogram:
	"""Periodic-Hann STFT of a zero-padded signal, one-sided, frames x bins.

	``fft_size - hop`` zeros are added at both ends so every input sample is covered by full windows.
	"""
	x = waveform.samples
	if x.size < config.fft_size:
		raise SignalTooShort(f'{x.size} samples is shorter than one {config.fft_size}-sample window')

	padded = np.pad(x, config.pad)
	frames = sliding_window_view(padded, config.fft_size)[:: config.hop]
	data = np.fft.rfft(frames * config.analysis_window(), axis=1)
	return ComplexSpectrogram(data=data, config=config, sample_rate_hz=waveform.sample_rate_hz, num_samples=x.size)


def istft(spec: ComplexSpectrogram) -> Waveform:
	"""Weighted overlap-add inverse of :func:`stft`.

	Each frame is windowed again and the sum is divided by the overlapped squared window, so the
	analysis/synthesis product sums to one at every retained sample.
	"""
	config = spec.config
	n_frames, n_bins = spec.data.shape
	if n_bins != config.bins or n_frames < 1:
		raise InconsistentShape(f'spectrogram shape {spec.data.shape} does not fit fft_size {config.fft_size}')

	out_len = (n_frames - 1) * config.hop + config.fft_size
	num_samples = spec.num_samples if spec.num_samples is not None else out_len - 2 * config.pad
	if num_samples < 1 or config.num_frames(num_samples) != n_frames:
		raise InconsistentShape(f'{n_frames} frames cannot come from a {num_samples}-sample signal')

	window = config.analysis_window()
	segments = np.fft.irfft(spec.data, n=config.fft_size, axis=1) * window
	positions = config.hop * np.arange(n_frames)[:, None] + np.arange(config.fft_size)[None, :]

	signal_sum = np.zeros(out_len)
	window_sum = np.zeros(out_len)
	np.add.at(signal_sum, positions, segments)
	np.add.at(window_sum, positions, np.broadcast_to(window**2, segments.shape))

	covered = window_sum > np.finfo(np.float64).tiny
	signal_sum[covered] /= window_sum[covered]
	samples = signal_sum[config.pad : config.pad + num_samples]
	return Waveform(samples=samples, sample_rate_hz=spec.sample_rate_hz)


def magnitude(spec: ComplexSpectrogram) -> MagnitudeSpectrogram:
	return MagnitudeSpectrogram(data=np.abs(spec.data), config=spec.config, sample_rate_hz=spec.sample_rate_hz)


def lps(mag: MagnitudeSpectrogram, epsilon: float = DEFAULT_LPS_EPSILON) -> LpsFeatures:
	"""ln(max(|X|^2, epsilon)) elementwise."""
	if epsilon <= 0:
		raise ValueError(f'epsilon must be positive, got {epsilon}')
	return LpsFeatures(data=np.log(np.maximum(mag.data**2, epsilon)), epsilon=epsilon)
