import math

import numpy as np
import pytest
from pydantic import ValidationError

from warp_mask.audio.views import IoFailure
from warp_mask.mask.views import ShapeMismatch
from warp_mask.neural import service as training
from warp_mask.neural.network import init_params
from warp_mask.neural.optimizer import adam_step
from warp_mask.neural.serialization import MODEL_MAGIC, load_model, save_model
from warp_mask.neural.service import Trainer, split_indices, train
from warp_mask.neural.views import AdamState, EmptyManifest, ModelFormatError, NetConfig, NonFiniteLoss, TrainConfig
from warp_mask.tests.conftest import SMALL_STFT

TINY_NET = NetConfig(feat_dim=SMALL_STFT.bins, context=1, hidden=3)


def tiny_train_config(**overrides) -> TrainConfig:
	values = {'epochs': 2, 'minibatch': 2, 'segment_s': 0.1, 'segments_per_clip': 2, 'stft': SMALL_STFT, 'alpha': 1.5}
	return TrainConfig(**{**values, **overrides})


def test_zero_gradients_leave_params_unchanged(rng):
	params = {'w': rng.standard_normal((3, 2)), 'b': rng.standard_normal(2)}
	grads = {name: np.zeros_like(p) for name, p in params.items()}
	new, state = adam_step(params, grads, AdamState.zeros_like(params), lr=0.01)
	for name in params:
		np.testing.assert_array_equal(new[name], params[name])
	assert state.step == 1


def test_first_step_closed_form():
	params = {'p': np.array([1.0])}
	new, _ = adam_step(params, {'p': np.array([1.0])}, AdamState.zeros_like(params), lr=0.001)
	assert new['p'][0] == pytest.approx(1.0 - 0.001 / (1.0 + 1e-8), abs=1e-15)


def test_two_steps_match_scalar_oracle():
	lr, b1, b2, eps = 0.01, 0.9, 0.999, 1e-8
	params = {'p': np.array([0.5])}
	state = AdamState.zeros_like(params)
	p, m, v = 0.5, 0.0, 0.0
	for step, g in enumerate((0.3, -1.2), start=1):
		params, state = adam_step(params, {'p': np.array([g])}, state, lr, b1, b2, eps)
		m = b1 * m + (1.0 - b1) * g
		v = b2 * v + (1.0 - b2) * (g * g)
		p = p - lr * (m / (1.0 - b1**step)) / (math.sqrt(v / (1.0 - b2**step)) + eps)
	assert params['p'][0] == p
	assert state.step == 2


def test_adam_shape_errors():
	params = {'p': np.zeros(3)}
	state = AdamState.zeros_like(params)
	with pytest.raises(ShapeMismatch):
		adam_step(params, {'p': np.zeros(4)}, state, 0.1)
	with pytest.raises(ShapeMismatch):
		adam_step(params, {'q': np.zeros(3)}, state, 0.1)


def test_model_round_trip_is_bit_exact(tmp_path):
	params = init_params(NetConfig(feat_dim=5, context=2, hidden=3), seed=9, alpha_trained=0.75)
	path = tmp_path / 'model.bin'
	save_model(path, params)
	raw = path.read_bytes()
	assert raw.startswith(MODEL_MAGIC)

	back = load_model(path)
	assert back.config == params.config
	assert back.alpha_trained == 0.75
	for name, tensor in params.tensors.items():
		assert back[name].tobytes() == tensor.tobytes()
	save_model(tmp_path / 'again.bin', back)
	assert (tmp_path / 'again.bin').read_bytes() == raw


def test_model_file_errors(tmp_path):
	path = tmp_path / 'model.bin'
	save_model(path, init_params(NetConfig(feat_dim=3, hidden=2), seed=0))
	raw = path.read_bytes()

	for bad in (b'NOTAMODEL' + raw[9:], raw[:-8], raw[:12]):
		path.write_bytes(bad)
		with pytest.raises(ModelFormatError):
			load_model(path)

	with pytest.raises(ModelFormatError, match='cannot read model'):
		load_model(tmp_path / 'missing.bin')
	with pytest.raises(IoFailure):
		save_model(path / 'nested.bin', init_params(NetConfig(feat_dim=3, hidden=2), seed=0))


def test_learning_rate_schedule():
	cfg = TrainConfig()
	assert cfg.lr_at(0) == 0.001
	assert cfg.lr_at(1) == pytest.approx(0.0008, rel=1e-12)
	assert cfg.lr_at(2) == pytest.approx(0.00064, rel=1e-12)


def test_full_size_preset():
	cfg = TrainConfig.full_size()
	assert (cfg.minibatch, cfg.segment_s, cfg.epochs) == (80, 8.0, 15)
	assert TrainConfig().minibatch == 8


@pytest.mark.parametrize('kwargs', [{'lr0': 0.0}, {'lr_decay_per_epoch': 1.0}, {'lr_decay_per_epoch': 0.0}, {'epochs': 0}])
def test_train_config_invariants(kwargs):
	with pytest.raises(ValidationError):
		TrainConfig(**kwargs)


def test_validation_split():
	cfg = TrainConfig(seed=4)
	train_idx, val_idx = split_indices(10, cfg)
	assert len(val_idx) == 2
	assert sorted(np.concatenate([train_idx, val_idx]).tolist()) == list(range(10))
	assert split_indices(1, cfg)[1].size == 0
	assert split_indices(2, cfg)[1].size == 1


def test_empty_manifest():
	with pytest.raises(EmptyManifest):
		train([], tiny_train_config(), TINY_NET)


def test_mismatched_stft_and_network():
	with pytest.raises(ShapeMismatch):
		Trainer(tiny_train_config(), NetConfig(feat_dim=257, hidden=2))


def test_training_is_deterministic(toy_manifest):
	params_a, history_a = train(toy_manifest, tiny_train_config(), TINY_NET)
	params_b, history_b = train(toy_manifest, tiny_train_config(), TINY_NET)
	assert history_a == history_b
	assert len(history_a) == 2
	assert [r.lr for r in history_a.records] == [0.001, 0.001 * 0.8]
	assert all(r.val_loss is not None for r in history_a.records)
	assert params_a.alpha_trained == 1.5
	for name in params_a.tensors:
		np.testing.assert_array_equal(params_a[name], params_b[name])


def test_training_loss_decreases(toy_manifest):
	_, history = train(toy_manifest, tiny_train_config(epochs=10, lr0=0.05, lr_decay_per_epoch=0.95), TINY_NET)
	assert len(history.train_losses) == 10
	assert history.train_losses[-1] < history.train_losses[0]


def test_batches_use_equal_crop_lengths(toy_manifest):
	trainer = Trainer(tiny_train_config(minibatch=3), TINY_NET)
	utterances = trainer.prepare(toy_manifest)
	crop = tiny_train_config().segment_frames(16000)
	for ids, x, target in trainer.batches(0, utterances):
		assert x.shape == target.shape
		assert x.shape[1] == min(crop, min(u.frames for u in utterances))
		assert len(ids) == x.shape[0]


def test_non_finite_loss_aborts(toy_manifest, monkeypatch):
	def exploding(tensors, cfg, x, target):
		return float('nan'), {name: np.zeros_like(t) for name, t in tensors.items()}

	monkeypatch.setattr(training, 'loss_and_grads', exploding)
	with pytest.raises(NonFiniteLoss, match='epoch 0, batch 0'):
		train(toy_manifest, tiny_train_config(), TINY_NET)


@pytest.mark.slow
def test_toy_training_beats_baselines(tmp_path):
	from warp_mask.metrics.service import segmental_snr
	from warp_mask.mixer.service import build_toy_corpus, mix_entry, read_manifest
	from warp_mask.pipeline.service import Enhancer, oracle_enhance

	cfg = TrainConfig()
	entries = read_manifest(build_toy_corpus(tmp_path / 'train', num_clips=20, duration_s=3.0, seed=0))
	params, history = train(entries, cfg, NetConfig())
	assert len(history) == cfg.epochs
	assert history.train_losses[-1] < history.train_losses[0]

	trainer = Trainer(cfg, NetConfig())
	utterances = trainer.prepare(entries)
	_, val_idx = split_indices(len(utterances), cfg)
	constant = float(np.mean([np.mean((0.5 - utterances[i].target) ** 2) for i in val_idx]))
	assert history.val_losses[-1] <= 0.7 * constant

	held_out = read_manifest(build_toy_corpus(tmp_path / 'eval', num_clips=4, duration_s=3.0, snrs_db=(0.0,), seed=1))
	enhancer = Enhancer(params, cfg.stft)
	trained_gain, oracle_gain = [], []
	for entry in held_out:
		mixture = mix_entry(entry)
		before = segmental_snr(mixture.clean, mixture.noisy)
		trained_gain.append(segmental_snr(mixture.clean, enhancer.enhance(mixture.noisy, params.alpha_trained)) - before)
		oracle_gain.append(segmental_snr(mixture.clean, oracle_enhance(mixture.clean, mixture.noise, 0.5, cfg.stft)) - before)
	assert np.mean(trained_gain) >= 3.0
	assert np.mean(oracle_gain) > np.mean(trained_gain)
