"""Mask mathematics: oracle masks, warped targets, test-time re-warping and mask application.

For speech magnitude S and noise magnitude N the family is (S^2 / (S^2 + N^2)) ** exponent:
beta gives the IRM, alpha the training target and gamma the test mask. A network trained on the
alpha target yields the gamma mask by raising its prediction to gamma / alpha.
"""

import logging
import struct
from pathlib import Path

import numpy as np

from warp_mask.audio.views import IoFailure
from warp_mask.mask.views import (
	InvalidWarp,
	Mask,
	MaskFormatError,
	MaskKind,
	ShapeMismatch,
)
from warp_mask.spectral.views import ComplexSpectrogram, LpsFeatures, MagnitudeSpectrogram

logger = logging.getLogger(__name__)

MASK_MAGIC = b'WMMASK01'
MASK_HEADER = struct.Struct('<8sII')


def _require_same_shape(a: tuple[int, ...], b: tuple[int, ...], what: str) -> None:
	if a != b:
		raise ShapeMismatch(f'{what}: shapes {a} and {b} differ')


def energy_ratio(s: MagnitudeSpectrogram, n: MagnitudeSpectrogram) -> np.ndarray:
	"""S^2 / (S^2 + N^2) with 0/0 taken as 0."""
	_require_same_shape(s.shape, n.shape, 'speech/noise spectrograms')
	speech_energy = s.data**2
	total = speech_energy + n.data**2
	return np.divide(speech_energy, total, out=np.zeros_like(total), where=total > 0)


def _ratio_mask(ratio: np.ndarray, exponent: float, kind: MaskKind) -> Mask:
	if exponent == 0:
		return Mask(data=np.ones_like(ratio), kind=kind)
	return Mask.clamped(ratio**exponent, kind)


def oracle_irm(s: MagnitudeSpectrogram, n: MagnitudeSpectrogram, beta: float = 0.5) -> Mask:
	if beta <= 0:
		raise InvalidWarp(f'beta must be positive, got {beta}')
	return _ratio_mask(energy_ratio(s, n), beta, 'irm')


def oracle_training_mask(s: MagnitudeSpectrogram, n: MagnitudeSpectrogram, alpha: float) -> Mask:
	"""Learning target warped by alpha; equals oracle_irm(s, n, beta) ** (alpha / beta)."""
	if alpha <= 0:
		raise InvalidWarp(f'alpha must be positive, got {alpha}')
	return _ratio_mask(energy_ratio(s, n), alpha, 'train_target')


def oracle_test_mask(s: MagnitudeSpectrogram, n: MagnitudeSpectrogram, gamma: float) -> Mask:
	"""Test mask computed directly from ground truth. gamma = 0 gives all ones."""
	if gamma < 0:
		raise InvalidWarp(f'gamma must be nonnegative, got {gamma}')
	return _ratio_mask(energy_ratio(s, n), gamma, 'test')


def warp_mask(m_tr: Mask, alpha: float, gamma: float) -> Mask:
	"""Re-warp a (predicted) training mask to test strength gamma: m_tr ** (gamma / alpha)."""
	if alpha <= 0:
		raise InvalidWarp(f'alpha must be positive, got {alpha}')
	if gamma < 0:
		raise InvalidWarp(f'gamma must be nonnegative, got {gamma}')

	exponent = gamma / alpha
	if exponent == 0:
		return Mask(data=np.ones_like(m_tr.data), kind='test')
	if exponent == 1:
		return Mask(data=m_tr.data, kind='test')
	return Mask.clamped(m_tr.data**exponent, 'test')


def apply_mask(noisy: ComplexSpectrogram, m: Mask) -> ComplexSpectrogram:
	"""Scale the noisy magnitudes by the mask and keep the noisy phase.

	Equivalent to exp(log|Y| + log m) on the magnitude; done as a product so m = 1 is bit exact.
	"""
	_require_same_shape(noisy.shape, m.shape, 'spectrogram/mask')
	return noisy.with_data(noisy.data * m.data)


def apply_mask_lps(features: LpsFeatures, m: Mask) -> LpsFeatures:
	"""Mask application in the feature domain: log power + 2 ln m, re-floored at ln(epsilon)."""
	_require_same_shape(features.shape, m.shape, 'features/mask')
	enhanced = np.maximum(features.data + 2.0 * np.log(m.data), np.log(features.epsilon))
	return LpsFeatures(data=enhanced, epsilon=features.epsilon)


def write_mask(path: str | Path, m: Mask) -> None:
	"""Dump a mask as 'WMMASK01', u32 frames, u32 bins, then row-major little-endian float32."""
	frames, bins = m.shape
	payload = MASK_HEADER.pack(MASK_MAGIC, frames, bins) + m.data.astype('<f4').tobytes(order='C')
	try:
		Path(path).write_bytes(payload)
	except OSError as e:
		raise IoFailure(f'{path}: cannot write mask ({e})') from e
	logger.debug(f'Wrote {frames}x{bins} {m.kind} mask to {path}')


def read_mask(path: str | Path, kind: MaskKind = 'predicted') -> Mask:
	try:
		raw = Path(path).read_bytes()
	except OSError as e:
		raise MaskFormatError(f'{path}: cannot read mask ({e})') from e
	if len(raw) < MASK_HEADER.size:
		raise MaskFormatError(f'{path}: {len(raw)} bytes is shorter than the mask header')
	magic, frames, bins = MASK_HEADER.unpack_from(raw)
	if magic != MASK_MAGIC:
		raise MaskFormatError(f'{path}: bad magic {magic!r}')
	expected = MASK_HEADER.size + 4 * frames * bins
	if len(raw) != expected:
		raise MaskFormatError(f'{path}: expected {expected} bytes for {frames}x{bins}, found {len(raw)}')
	data = np.frombuffer(raw, dtype='<f4', offset=MASK_HEADER.size).reshape(frames, bins).astype(np.float64)
	# float32 rounding can dip just under the floor
	return Mask.clamped(data, kind)
