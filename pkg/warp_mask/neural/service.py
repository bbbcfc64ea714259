import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from warp_mask.mask.service import oracle_training_mask
from warp_mask.mask.views import ShapeMismatch
from warp_mask.mixer.service import mix_entry, read_manifest
from warp_mask.mixer.views import ManifestEntry
from warp_mask.neural.network import forward_batch, init_params, loss_and_grads, normalize_features
from warp_mask.neural.optimizer import adam_step
from warp_mask.neural.views import (
	AdamState,
	DBlstmParams,
	EmptyManifest,
	EpochRecord,
	NetConfig,
	NonFiniteLoss,
	TrainConfig,
	TrainHistory,
)
from warp_mask.spectral.service import lps, magnitude, stft
from warp_mask.utils import time_execution_sync

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrainingUtterance:
	"""Normalised noisy LPS and the alpha-warped oracle target for one manifest entry."""

	utterance_id: str
	features: np.ndarray
	target: np.ndarray
	sample_rate_hz: int

	@property
	def frames(self) -> int:
		return self.features.shape[0]


def prepare_utterance(entry: ManifestEntry, cfg: TrainConfig) -> TrainingUtterance:
	mixture = mix_entry(entry)
	noisy_lps = lps(magnitude(stft(mixture.noisy, cfg.stft)))
	target = oracle_training_mask(
		magnitude(stft(mixture.clean, cfg.stft)), magnitude(stft(mixture.noise, cfg.stft)), cfg.alpha
	)
	return TrainingUtterance(
		utterance_id=mixture.utterance_id,
		features=normalize_features(noisy_lps.data),
		target=target.data,
		sample_rate_hz=mixture.clean.sample_rate_hz,
	)


def split_indices(n: int, cfg: TrainConfig) -> tuple[np.ndarray, np.ndarray]:
	"""Seeded permutation; the last ``validation_fraction`` share (at least one entry when n >= 2) validates."""
	order = np.random.default_rng(cfg.seed).permutation(n)
	n_val = 0
	if n >= 2 and cfg.validation_fraction > 0:
		n_val = min(n - 1, max(1, int(round(n * cfg.validation_fraction))))
	return order[: n - n_val], order[n - n_val :]


class Trainer:
	"""Minibatch Adam training of the mask estimator on alpha-warped oracle targets.

	Every random choice (split, crop order, crop offsets, initial weights) derives from ``cfg.seed``,
	so two runs with the same inputs produce identical histories.
	"""

	def __init__(self, cfg: TrainConfig, net_cfg: NetConfig, max_workers: int = 4):
		if net_cfg.feat_dim != cfg.stft.bins:
			raise ShapeMismatch(f'network expects {net_cfg.feat_dim} bins, STFT gives {cfg.stft.bins}')
		self.cfg = cfg
		self.net_cfg = net_cfg
		self.max_workers = max_workers

	def prepare(self, entries: Sequence[ManifestEntry]) -> list[TrainingUtterance]:
		# map keeps manifest order, so the result does not depend on thread scheduling
		with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
			return list(executor.map(lambda entry: prepare_utterance(entry, self.cfg), entries))

	def fit(self, entries: Sequence[ManifestEntry]) -> tuple[DBlstmParams, TrainHistory]:
		if not entries:
			raise EmptyManifest('training manifest has no entries')
		utterances = self.prepare(entries)
		train_idx, val_idx = split_indices(len(utterances), self.cfg)
		train_set = [utterances[i] for i in train_idx]
		val_set = [utterances[i] for i in val_idx]
		logger.info(
			f'🧠 Training on {len(train_set)} utterances ({len(val_set)} held out), '
			f'alpha={self.cfg.alpha}, {self.cfg.epochs} epochs'
		)

		params = init_params(self.net_cfg, self.cfg.seed, alpha_trained=self.cfg.alpha)
		tensors = dict(params.tensors)
		state = AdamState.zeros_like(tensors)
		history = TrainHistory()

		for epoch in range(self.cfg.epochs):
			lr = self.cfg.lr_at(epoch)
			tensors, state, train_loss = self._run_epoch(epoch, lr, tensors, state, train_set)
			val_loss = self.validation_loss(tensors, val_set) if val_set else None
			history.append(EpochRecord(epoch=epoch, lr=lr, train_loss=train_loss, val_loss=val_loss))
			val_text = f'{val_loss:.5f}' if val_loss is not None else 'n/a'
			logger.info(f'Epoch {epoch + 1}/{self.cfg.epochs}: lr={lr:.6g} train={train_loss:.5f} val={val_text}')

		return params.with_tensors(tensors), history

	def batches(self, epoch: int, train_set: Sequence[TrainingUtterance]) -> list[tuple[list[str], np.ndarray, np.ndarray]]:
		"""Seeded random crops for *epoch*, grouped into minibatches of equal crop length."""
		rng = np.random.default_rng([self.cfg.seed, epoch])
		picks = np.repeat(np.arange(len(train_set)), self.cfg.segments_per_clip)
		rng.shuffle(picks)

		batches = []
		for start in range(0, picks.size, self.cfg.minibatch):
			members = [train_set[i] for i in picks[start : start + self.cfg.minibatch]]
			crop = min(self.cfg.segment_frames(members[0].sample_rate_hz), min(u.frames for u in members))
			offsets = [int(rng.integers(0, u.frames - crop + 1)) for u in members]
			x = np.stack([u.features[o : o + crop] for u, o in zip(members, offsets)])
			t = np.stack([u.target[o : o + crop] for u, o in zip(members, offsets)])
			batches.append(([u.utterance_id for u in members], x, t))
		return batches

	@time_execution_sync('--train_epoch')
	def _run_epoch(
		self,
		epoch: int,
		lr: float,
		tensors: dict[str, np.ndarray],
		state: AdamState,
		train_set: Sequence[TrainingUtterance],
	) -> tuple[dict[str, np.ndarray], AdamState, float]:
		losses = []
		for batch_no, (ids, x, target) in enumerate(self.batches(epoch, train_set)):
			loss, grads = loss_and_grads(tensors, self.net_cfg, x, target)
			if not np.isfinite(loss) or not all(np.all(np.isfinite(g)) for g in grads.values()):
				raise NonFiniteLoss(
					f'non-finite loss {loss} at epoch {epoch}, batch {batch_no} (lr={lr:.6g}, '
					f'crop={x.shape[1]} frames, utterances={", ".join(ids)})'
				)
			tensors, state = adam_step(
				tensors, grads, state, lr, self.cfg.adam_beta1, self.cfg.adam_beta2, self.cfg.adam_eps
			)
			losses.append(loss)
			logger.debug(f'epoch {epoch} batch {batch_no}: loss={loss:.5f}')
		return tensors, state, float(np.mean(losses))

	def validation_loss(self, tensors: dict[str, np.ndarray], val_set: Sequence[TrainingUtterance]) -> float:
		"""Mean over held-out utterances of the full-length mask MSE."""
		losses = []
		for utt in val_set:
			y, _ = forward_batch(tensors, self.net_cfg, utt.features[None])
			losses.append(float(np.mean((y[0] - utt.target) ** 2)))
		return float(np.mean(losses))


def train(
	manifest: str | Path | Sequence[ManifestEntry],
	cfg: TrainConfig,
	net_cfg: NetConfig,
) -> tuple[DBlstmParams, TrainHistory]:
	"""Train a mask estimator on a manifest file or an already parsed list of entries."""
	entries = read_manifest(manifest) if isinstance(manifest, (str, Path)) else list(manifest)
	return Trainer(cfg, net_cfg).fit(entries)
