import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from pydantic import ValidationError

from warp_mask.audio.service import read_wav, require_pipeline_rate, write_wav
from warp_mask.audio.views import CorruptData, CorruptHeader, EmptyAudio, IoFailure, UnsupportedFormat, Waveform


def wav_bytes(payload: bytes, format_code=1, channels=1, rate=16000, bits=16, block_align=None) -> bytes:
	block_align = block_align if block_align is not None else channels * bits // 8
	fmt = struct.pack('<HHIIHH', format_code, channels, rate, rate * block_align, block_align, bits)
	body = b'WAVE' + b'fmt ' + struct.pack('<I', len(fmt)) + fmt + b'data' + struct.pack('<I', len(payload)) + payload
	return b'RIFF' + struct.pack('<I', len(body)) + body


def test_pcm16_max_sample_normalized(tmp_path):
	path = tmp_path / 'one.wav'
	path.write_bytes(wav_bytes(struct.pack('<h', 32767)))
	w = read_wav(path)
	assert w.sample_rate_hz == 16000
	assert w.samples.tolist() == [32767 / 32768]


def test_float32_file_is_read_unscaled(tmp_path):
	values = np.array([0.25, -0.5, 0.125], dtype='<f4')
	path = tmp_path / 'float.wav'
	path.write_bytes(wav_bytes(values.tobytes(), format_code=3, bits=32))
	np.testing.assert_array_equal(read_wav(path).samples, values.astype(np.float64))


def test_zero_file_duration(tmp_path):
	path = tmp_path / 'zeros.wav'
	path.write_bytes(wav_bytes(bytes(2 * 16000)))
	w = read_wav(path)
	assert len(w) == 16000
	assert w.duration_s == 1.0
	assert not np.any(w.samples)


@pytest.mark.parametrize(
	'header',
	[
		{'rate': 44100},
		{'rate': 8000},
		{'channels': 2},
		{'format_code': 2},
		{'format_code': 6},
		{'format_code': 7},
		{'format_code': 0xFFFE},
		{'bits': 8},
		{'bits': 24},
		{'format_code': 3, 'bits': 64},
		{'format_code': 3, 'bits': 16},
	],
)
def test_unsupported_declarations_rejected(tmp_path, header):
	path = tmp_path / 'bad.wav'
	path.write_bytes(wav_bytes(bytes(64), **header))
	with pytest.raises(UnsupportedFormat):
		read_wav(path)


@pytest.mark.parametrize(
	'raw',
	[
		b'',
		b'RIFX' + bytes(40),
		b'RIFF\x00\x00\x00\x00WAVE',
		wav_bytes(bytes(8))[:-4],
		wav_bytes(bytes(8), block_align=4),
	],
)
def test_corrupt_headers(tmp_path, raw):
	path = tmp_path / 'corrupt.wav'
	path.write_bytes(raw)
	with pytest.raises(CorruptHeader):
		read_wav(path)


def test_empty_data_chunk(tmp_path):
	path = tmp_path / 'empty.wav'
	path.write_bytes(wav_bytes(b''))
	with pytest.raises(EmptyAudio):
		read_wav(path)


@pytest.mark.parametrize('bad', [float('nan'), float('inf'), float('-inf')])
def test_non_finite_float_samples_rejected(tmp_path, bad):
	path = tmp_path / 'bad.wav'
	path.write_bytes(wav_bytes(struct.pack('<3f', 0.1, bad, 0.2), format_code=3, bits=32))
	with pytest.raises(CorruptData, match='NaN or infinite') as exc:
		read_wav(path)
	assert exc.value.code == 2


def test_pipeline_rate_guard():
	require_pipeline_rate(Waveform(samples=[0.0]))
	with pytest.raises(UnsupportedFormat, match='8000 Hz'):
		require_pipeline_rate(Waveform(samples=[0.0], sample_rate_hz=8000), 'noisy signal')


def test_zeros_write_all_zero_data(tmp_path):
	path = tmp_path / 'z.wav'
	write_wav(path, Waveform(samples=np.zeros(100)))
	raw = path.read_bytes()
	data_at = raw.index(b'data')
	(size,) = struct.unpack_from('<I', raw, data_at + 4)
	assert size == 200
	assert raw[data_at + 8 : data_at + 8 + size] == bytes(200)


def test_out_of_range_samples_are_clipped(tmp_path):
	path = tmp_path / 'clip.wav'
	write_wav(path, Waveform(samples=[2.0, -2.0, 0.0]))
	np.testing.assert_array_equal(read_wav(path).samples, [32767 / 32768, -1.0, 0.0])


def test_write_failure_is_io_failure(tmp_path):
	blocker = tmp_path / 'file'
	blocker.write_text('x')
	with pytest.raises(IoFailure):
		write_wav(blocker / 'nested.wav', Waveform(samples=[0.0]))


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, st.integers(1, 2000), elements=st.floats(-1.0, 1.0, exclude_max=True)))
def test_round_trip_within_one_step(tmp_path_factory, samples):
	path = tmp_path_factory.mktemp('rt') / 'x.wav'
	w = Waveform(samples=samples)
	write_wav(path, w)
	assert np.max(np.abs(read_wav(path).samples - w.samples)) <= 2.0**-15


@pytest.mark.parametrize('samples', [[], [np.nan], [0.0, np.inf], [[0.0, 1.0]]])
def test_waveform_invariants(samples):
	with pytest.raises(ValidationError):
		Waveform(samples=samples)


def test_waveform_is_immutable():
	w = Waveform(samples=[0.1, 0.2])
	with pytest.raises(ValueError):
		w.samples[0] = 1.0
