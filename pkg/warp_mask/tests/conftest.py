import numpy as np
import pytest

from warp_mask.audio.views import Waveform
from warp_mask.mixer.service import build_toy_corpus, read_manifest, synth_noise, synth_speech_like
from warp_mask.neural.network import init_params
from warp_mask.neural.views import NetConfig
from warp_mask.spectral.views import StftConfig

# 9 bins; keeps network-in-the-loop tests fast
SMALL_STFT = StftConfig(fft_size=16, hop=8)


@pytest.fixture
def rng() -> np.random.Generator:
	return np.random.default_rng(1234)


@pytest.fixture
def speech() -> Waveform:
	return synth_speech_like(1.0, seed=7)


@pytest.fixture
def white_noise() -> Waveform:
	return synth_noise('white', 1.0, seed=11)


@pytest.fixture
def random_waveform(rng) -> Waveform:
	return Waveform(samples=rng.uniform(-0.9, 0.9, size=16000))


@pytest.fixture
def small_stft() -> StftConfig:
	return SMALL_STFT


@pytest.fixture
def small_params():
	"""Untrained network sized for SMALL_STFT, trained-warp 1.5."""
	cfg = NetConfig(feat_dim=SMALL_STFT.bins, context=1, hidden=3)
	return init_params(cfg, seed=0, alpha_trained=1.5)


@pytest.fixture
def toy_manifest(tmp_path):
	path = build_toy_corpus(tmp_path / 'corpus', num_clips=3, duration_s=0.5, kinds=('white',), snrs_db=(0.0,), seed=3)
	return read_manifest(path)
