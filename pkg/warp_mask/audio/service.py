"""RIFF/WAVE reading and writing for the fixed 16 kHz mono contract.

Headers are inspected here so every unsupported declaration maps to a precise error;
sample payloads are decoded and encoded by libsndfile through ``soundfile``.
"""

import io
import logging
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import soundfile as sf

from warp_mask.audio.views import (
	PIPELINE_SAMPLE_RATE,
	CorruptData,
	CorruptHeader,
	EmptyAudio,
	IoFailure,
	UnsupportedFormat,
	Waveform,
)

logger = logging.getLogger(__name__)

WAVE_FORMAT_PCM = 1
WAVE_FORMAT_IEEE_FLOAT = 3
SUPPORTED_FORMATS = {WAVE_FORMAT_PCM: 16, WAVE_FORMAT_IEEE_FLOAT: 32}

PCM16_SCALE = 32768.0
PCM16_MAX = 1.0 - 2.0**-15


@dataclass(frozen=True)
class WavHeader:
	format_code: int
	channels: int
	sample_rate_hz: int
	bits_per_sample: int
	block_align: int
	data_bytes: int


def inspect_header(raw: bytes) -> WavHeader:
	"""Walk the RIFF chunks of *raw* and return the ``fmt `` description plus data size."""
	if len(raw) < 12 or raw[0:4] != b'RIFF' or raw[8:12] != b'WAVE':
		raise CorruptHeader('missing RIFF/WAVE signature')

	fmt: tuple[int, int, int, int, int] | None = None
	offset = 12
	while offset + 8 <= len(raw):
		chunk_id = raw[offset : offset + 4]
		(chunk_size,) = struct.unpack_from('<I', raw, offset + 4)
		body = offset + 8
		if chunk_id == b'fmt ':
			if chunk_size < 16 or body + 16 > len(raw):
				raise CorruptHeader(f'fmt chunk too short ({chunk_size} bytes)')
			format_code, channels, rate, _byte_rate, block_align, bits = struct.unpack_from('<HHIIHH', raw, body)
			fmt = (format_code, channels, rate, block_align, bits)
		elif chunk_id == b'data':
			if fmt is None:
				raise CorruptHeader('data chunk precedes fmt chunk')
			if body + chunk_size > len(raw):
				raise CorruptHeader(f'data chunk declares {chunk_size} bytes but only {len(raw) - body} remain')
			format_code, channels, rate, block_align, bits = fmt
			return WavHeader(format_code, channels, rate, bits, block_align, chunk_size)
		# chunks are word aligned
		offset = body + chunk_size + (chunk_size & 1)

	raise CorruptHeader('no data chunk found' if fmt is not None else 'no fmt chunk found')


def _check_supported(header: WavHeader, source: str) -> None:
	expected_bits = SUPPORTED_FORMATS.get(header.format_code)
	if expected_bits is None:
		raise UnsupportedFormat(f'{source}: format code {header.format_code:#06x} is not PCM (1) or IEEE float (3)')
	if header.bits_per_sample != expected_bits:
		raise UnsupportedFormat(
			f'{source}: format code {header.format_code} requires {expected_bits}-bit samples, got {header.bits_per_sample}'
		)
	if header.channels != 1:
		raise UnsupportedFormat(f'{source}: {header.channels} channels, only mono is supported')
	if header.sample_rate_hz != PIPELINE_SAMPLE_RATE:
		raise UnsupportedFormat(f'{source}: sample rate {header.sample_rate_hz} Hz, expected {PIPELINE_SAMPLE_RATE} Hz')
	if header.block_align != expected_bits // 8:
		raise CorruptHeader(f'{source}: block align {header.block_align} inconsistent with mono {expected_bits}-bit')


def require_pipeline_rate(waveform: Waveform, what: str = 'signal') -> None:
	if waveform.sample_rate_hz != PIPELINE_SAMPLE_RATE:
		raise UnsupportedFormat(f'{what} is at {waveform.sample_rate_hz} Hz, expected {PIPELINE_SAMPLE_RATE} Hz')


def read_wav(path: str | Path) -> Waveform:
	"""Read a mono 16 kHz PCM16 or float32 WAV file. PCM16 values are divided by 32768."""
	path = Path(path)
	try:
		raw = path.read_bytes()
	except OSError as e:
		raise CorruptHeader(f'{path}: cannot read file ({e})') from e

	header = inspect_header(raw)
	_check_supported(header, str(path))
	if header.data_bytes == 0:
		raise EmptyAudio(f'{path}: data chunk is empty')
	if header.data_bytes % header.block_align:
		raise CorruptHeader(f'{path}: data size {header.data_bytes} is not a whole number of frames')

	try:
		samples, rate = sf.read(io.BytesIO(raw), dtype='float64', always_2d=False)
	except sf.SoundFileError as e:
		raise CorruptHeader(f'{path}: {e}') from e
	if samples.size == 0:
		raise EmptyAudio(f'{path}: no samples decoded')
	if not np.all(np.isfinite(samples)):
		raise CorruptData(f'{path}: samples contain NaN or infinite values')

	logger.debug(f'Read {path} ({samples.size} samples, format code {header.format_code})')
	return Waveform(samples=samples, sample_rate_hz=rate)


def quantize_pcm16(samples: np.ndarray) -> np.ndarray:
	"""Clip to [-1, 1 - 2^-15] and round to 16-bit integers."""
	clipped = np.clip(samples, -1.0, PCM16_MAX)
	return np.round(clipped * PCM16_SCALE).astype(np.int16)


def write_wav(path: str | Path, waveform: Waveform) -> None:
	"""Write *waveform* as a 16-bit PCM mono WAV file."""
	path = Path(path)
	pcm = quantize_pcm16(waveform.samples)
	try:
		path.parent.mkdir(parents=True, exist_ok=True)
		sf.write(str(path), pcm, waveform.sample_rate_hz, subtype='PCM_16', format='WAV')
	except (OSError, sf.SoundFileError) as e:
		raise IoFailure(f'{path}: cannot write audio ({e})') from e
	logger.debug(f'Wrote {path} ({pcm.size} samples)')
