"""End-to-end enhancement with a trained mask estimator, oracle baselines and sweep reports."""

import logging
import threading
from collections import defaultdict
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from warp_mask.audio.service import require_pipeline_rate
from warp_mask.audio.views import IoFailure, Waveform
from warp_mask.mask.service import apply_mask, apply_mask_lps, oracle_test_mask, warp_mask
from warp_mask.mask.views import InvalidWarp, Mask, ShapeMismatch
from warp_mask.metrics.service import evaluate
from warp_mask.metrics.views import MetricsReport
from warp_mask.mixer.service import mix_entry
from warp_mask.mixer.views import TEST_SNRS_DB, ManifestEntry
from warp_mask.neural.network import forward
from warp_mask.neural.service import train
from warp_mask.neural.views import DBlstmParams, EmptyManifest, NetConfig, TrainConfig
from warp_mask.pipeline.views import DEFAULT_GAMMAS, HIGHER_IS_BETTER, SweepMetric, SweepRow
from warp_mask.spectral.service import DEFAULT_STFT, istft, lps, magnitude, stft
from warp_mask.spectral.views import ComplexSpectrogram, LpsFeatures, StftConfig
from warp_mask.utils import time_execution_sync

logger = logging.getLogger(__name__)


def _check_gamma(gamma: float) -> None:
	if gamma < 0:
		raise InvalidWarp(f'gamma must be nonnegative, got {gamma}')


class Enhancer:
	"""Applies a trained estimator at any testing warp.

	``forward_calls`` counts network evaluations; it is safe to share one instance across threads.
	"""

	def __init__(self, params: DBlstmParams, stft_config: StftConfig = DEFAULT_STFT):
		if params.config.feat_dim != stft_config.bins:
			raise ShapeMismatch(f'model expects {params.config.feat_dim} bins, STFT gives {stft_config.bins}')
		self.params = params
		self.stft_config = stft_config
		self.forward_calls = 0
		self._lock = threading.Lock()

	def predict(self, noisy_spec: ComplexSpectrogram) -> Mask:
		"""Predicted training mask for a noisy spectrogram."""
		with self._lock:
			self.forward_calls += 1
		return forward(self.params, lps(magnitude(noisy_spec)))

	def _resynthesize(self, noisy_spec: ComplexSpectrogram, predicted: Mask, gamma: float) -> tuple[Waveform, Mask]:
		m_test = warp_mask(predicted, self.params.alpha_trained, gamma)
		return istft(apply_mask(noisy_spec, m_test)), m_test

	def enhance_with_masks(self, noisy: Waveform, gammas: Sequence[float]) -> list[tuple[Waveform, Mask | None]]:
		"""One (waveform, applied test mask) pair per gamma from a single forward pass.

		gamma = 0 returns *noisy* itself with no mask, and no forward pass is run when every gamma is 0.
		"""
		if not gammas:
			raise ValueError('at least one gamma is required')
		for gamma in gammas:
			_check_gamma(gamma)
		require_pipeline_rate(noisy, 'noisy signal')

		if all(gamma == 0 for gamma in gammas):
			return [(noisy, None) for _ in gammas]

		noisy_spec = stft(noisy, self.stft_config)
		predicted = self.predict(noisy_spec)
		return [(noisy, None) if gamma == 0 else self._resynthesize(noisy_spec, predicted, gamma) for gamma in gammas]

	def enhance(self, noisy: Waveform, gamma: float) -> Waveform:
		return self.enhance_with_masks(noisy, [gamma])[0][0]

	def multi_gamma_enhance(self, noisy: Waveform, gammas: Sequence[float]) -> list[Waveform]:
		return [waveform for waveform, _ in self.enhance_with_masks(noisy, gammas)]

	def enhanced_features(self, noisy: Waveform, test_mask: Mask | None) -> LpsFeatures:
		"""Log-power features of *noisy* with *test_mask* applied in the feature domain; None leaves them unmasked."""
		features = lps(magnitude(stft(noisy, self.stft_config)))
		return features if test_mask is None else apply_mask_lps(features, test_mask)


def enhance(noisy: Waveform, params: DBlstmParams, gamma: float, stft_config: StftConfig = DEFAULT_STFT) -> Waveform:
	"""Mask-based enhancement at testing warp *gamma*; gamma = 0 is a pass-through."""
	return Enhancer(params, stft_config).enhance(noisy, gamma)


def multi_gamma_enhance(
	noisy: Waveform, params: DBlstmParams, gammas: Sequence[float], stft_config: StftConfig = DEFAULT_STFT
) -> list[Waveform]:
	return Enhancer(params, stft_config).multi_gamma_enhance(noisy, gammas)


def oracle_enhance(clean: Waveform, noise: Waveform, gamma: float, stft_config: StftConfig = DEFAULT_STFT) -> Waveform:
	"""Enhance clean + noise with the ground-truth test mask (S^2 / (S^2 + N^2)) ** gamma."""
	_check_gamma(gamma)
	require_pipeline_rate(clean, 'clean signal')
	require_pipeline_rate(noise, 'noise signal')
	if len(clean) != len(noise):
		raise ShapeMismatch(f'clean has {len(clean)} samples, noise has {len(noise)}')
	noisy = clean.with_samples(clean.samples + noise.samples)
	if gamma == 0:
		return noisy
	m_test = oracle_test_mask(magnitude(stft(clean, stft_config)), magnitude(stft(noise, stft_config)), gamma)
	return istft(apply_mask(stft(noisy, stft_config), m_test))


def _score_mixture(
	enhancer: Enhancer, entry: ManifestEntry, snr_db: float, gammas: Sequence[float]
) -> list[tuple[float, float, str, MetricsReport]]:
	mixture = mix_entry(entry, snr_db)
	config = enhancer.stft_config
	clean_mag = magnitude(stft(mixture.clean, config))
	noise_mag = magnitude(stft(mixture.noise, config))

	scored = []
	for gamma, (estimate, applied) in zip(gammas, enhancer.enhance_with_masks(mixture.noisy, gammas)):
		oracle = oracle_test_mask(clean_mag, noise_mag, gamma) if applied is not None else None
		report = evaluate(mixture.clean, estimate, applied, oracle, config)
		scored.append((mixture.snr_db, gamma, mixture.utterance_id, report))
	return scored


def aggregate(scored: Sequence[tuple[float, float, str, MetricsReport]]) -> list[SweepRow]:
	"""Average per-utterance reports into one row per (snr, gamma), in (snr, gamma, utterance) order."""
	cells: dict[tuple[float, float], list[MetricsReport]] = defaultdict(list)
	for snr_db, gamma, _, report in sorted(scored, key=lambda item: item[:3]):
		cells[(snr_db, gamma)].append(report)

	rows = []
	for (snr_db, gamma), reports in cells.items():
		rows.append(
			SweepRow(
				snr_db=snr_db,
				gamma=gamma,
				seg_snr_db=float(np.mean([r.seg_snr_db for r in reports])),
				si_sdr_db=float(np.mean([r.si_sdr_db for r in reports])),
				lsd_db=float(np.mean([r.lsd_db for r in reports])),
				mask_mse=float(np.mean([r.mask_mse for r in reports])),
				n_utts=len(reports),
			)
		)
	return rows


@time_execution_sync('--sweep')
def sweep(
	entries: Sequence[ManifestEntry],
	params: DBlstmParams,
	gammas: Sequence[float] = DEFAULT_GAMMAS,
	snrs: Sequence[float] = TEST_SNRS_DB,
	stft_config: StftConfig = DEFAULT_STFT,
	max_workers: int = 4,
) -> list[SweepRow]:
	"""Mix every entry at every SNR, enhance at every gamma and average metrics per (snr, gamma)."""
	if not entries:
		raise EmptyManifest('sweep manifest has no entries')
	gammas = sorted(set(float(g) for g in gammas))
	snrs = sorted(set(float(s) for s in snrs))
	enhancer = Enhancer(params, stft_config)

	jobs = [(entry, snr_db) for snr_db in snrs for entry in entries]
	with ThreadPoolExecutor(max_workers=max_workers) as executor:
		results = list(executor.map(lambda job: _score_mixture(enhancer, job[0], job[1], gammas), jobs))

	rows = aggregate([item for scored in results for item in scored])
	logger.info(
		f'📊 Swept {len(entries)} utterances x {len(snrs)} SNRs x {len(gammas)} gammas '
		f'({enhancer.forward_calls} forward passes)'
	)
	return rows


def sweep_csv(rows: Sequence[SweepRow], with_alpha: bool = False) -> str:
	return '\n'.join([SweepRow.csv_header(with_alpha)] + [row.to_csv(with_alpha) for row in rows]) + '\n'


def write_sweep_csv(path: str | Path, rows: Sequence[SweepRow], with_alpha: bool = False) -> None:
	try:
		Path(path).write_text(sweep_csv(rows, with_alpha))
	except OSError as e:
		raise IoFailure(f'{path}: cannot write sweep table ({e})') from e
	logger.info(f'Wrote {len(rows)} rows to {path}')


def write_features(path: str | Path, features: LpsFeatures) -> None:
	"""Save the frames x bins log-power matrix in numpy's .npy format."""
	try:
		with Path(path).open('wb') as f:
			np.save(f, features.data)
	except OSError as e:
		raise IoFailure(f'{path}: cannot write features ({e})') from e


@time_execution_sync('--alpha_sweep')
def alpha_sweep(
	train_entries: Sequence[ManifestEntry],
	eval_entries: Sequence[ManifestEntry],
	alphas: Sequence[float],
	train_cfg: TrainConfig,
	net_cfg: NetConfig,
	gamma: float = 0.5,
	snrs: Sequence[float] = TEST_SNRS_DB,
	max_workers: int = 4,
) -> list[SweepRow]:
	"""Train one model per training warp and score each at the same testing warp."""
	rows = []
	for alpha in alphas:
		cfg = TrainConfig(**{**train_cfg.model_dump(), 'alpha': alpha})
		logger.info(f'🔁 alpha={alpha:g}')
		params, _ = train(train_entries, cfg, net_cfg)
		for row in sweep(eval_entries, params, [gamma], snrs, train_cfg.stft, max_workers):
			rows.append(row.model_copy(update={'alpha': float(alpha)}))
	return rows


def select_best_gamma(rows: Sequence[SweepRow], metric: SweepMetric = 'seg_snr_db') -> dict[float, float]:
	"""Per SNR, the gamma with the best *metric*; ties go to the smaller gamma."""
	if metric not in HIGHER_IS_BETTER:
		raise ValueError(f'unknown sweep metric {metric!r}')
	sign = 1.0 if HIGHER_IS_BETTER[metric] else -1.0
	best: dict[float, SweepRow] = {}
	for row in sorted(rows, key=lambda r: (r.snr_db, r.gamma)):
		current = best.get(row.snr_db)
		if current is None or sign * getattr(row, metric) > sign * getattr(current, metric):
			best[row.snr_db] = row
	return {snr_db: row.gamma for snr_db, row in best.items()}
