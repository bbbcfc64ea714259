"""Noisy-mixture synthesis at exact SNRs and the toy clean/noise corpus.

SNR is measured over the full clip: 10 log10(sum(clean^2) / sum(noise^2)).
"""

import logging
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np

from warp_mask.audio.service import read_wav, require_pipeline_rate, write_wav
from warp_mask.audio.views import PIPELINE_SAMPLE_RATE, IoFailure, Waveform
from warp_mask.mixer.views import (
	NOISE_KINDS,
	TRAIN_SNRS_DB,
	InvalidDuration,
	ManifestEntry,
	ManifestError,
	MixSpec,
	Mixture,
	RateMismatch,
	SpeechLikeParams,
	UnknownKind,
	ZeroEnergyInput,
)
from warp_mask.utils import time_execution_sync

logger = logging.getLogger(__name__)

SYNTH_PEAK = 0.5
MIN_SPEECH_DURATION_S = 0.5
BABBLE_TALKERS = 6


def measured_snr(clean: Waveform, noise: Waveform) -> float:
	return float(10.0 * np.log10(clean.energy / noise.energy))


def _fit_noise(noise: np.ndarray, length: int, spec: MixSpec) -> np.ndarray:
	"""Loop or truncate *noise* to *length* samples starting at a seeded offset."""
	if spec.noise_offset_policy == 'fixed':
		offset = 0
	else:
		rng = np.random.default_rng(spec.seed)
		span = noise.size - length + 1 if noise.size >= length else noise.size
		offset = int(rng.integers(0, span))
	return noise[(offset + np.arange(length)) % noise.size]


def mix_at_snr(clean: Waveform, noise: Waveform, spec: MixSpec) -> tuple[Waveform, Waveform]:
	"""Return (noisy, scaled_noise) with noisy = clean + scaled_noise at exactly ``spec.snr_db``."""
	require_pipeline_rate(clean, 'clean signal')
	if clean.sample_rate_hz != noise.sample_rate_hz:
		raise RateMismatch(f'clean at {clean.sample_rate_hz} Hz, noise at {noise.sample_rate_hz} Hz')
	clean_energy = clean.energy
	if clean_energy == 0:
		raise ZeroEnergyInput('clean signal has zero energy')
	if noise.energy == 0:
		raise ZeroEnergyInput('noise signal has zero energy')

	segment = _fit_noise(noise.samples, len(clean), spec)
	noise_energy = float(np.dot(segment, segment))
	if noise_energy == 0:
		raise ZeroEnergyInput(f'noise segment chosen with seed {spec.seed} is silent')

	gain = np.sqrt(clean_energy / (noise_energy * 10.0 ** (spec.snr_db / 10.0)))
	scaled = gain * segment
	noisy = clean.samples + scaled
	return clean.with_samples(noisy), clean.with_samples(scaled)


def mix_entry(entry: ManifestEntry, snr_db: float | None = None) -> Mixture:
	"""Load a manifest pair and mix it at the entry's SNR (or *snr_db* when given)."""
	clean = read_wav(entry.clean_path)
	noise = read_wav(entry.noise_path)
	spec = entry.mix_spec(snr_db)
	noisy, scaled = mix_at_snr(clean, noise, spec)
	return Mixture(utterance_id=entry.utterance_id, snr_db=spec.snr_db, clean=clean, noise=scaled, noisy=noisy)


def speech_like_params(seed: int, duration_s: float) -> SpeechLikeParams:
	"""The random draws :func:`synth_speech_like` makes for *seed*."""
	return _draw_speech_params(np.random.default_rng(seed), duration_s)


def _draw_speech_params(rng: np.random.Generator, duration_s: float) -> SpeechLikeParams:
	f0 = float(rng.uniform(100.0, 300.0))
	num_harmonics = int(rng.integers(5, 13))
	harmonics = np.arange(1, num_harmonics + 1)
	gains = rng.uniform(0.8, 1.2, size=num_harmonics) / harmonics
	phases = rng.uniform(0.0, 2 * np.pi, size=num_harmonics)
	am_rate = float(rng.uniform(2.0, 8.0))
	am_phase = float(rng.uniform(0.0, 2 * np.pi))
	am_depth = float(rng.uniform(0.3, 0.8))

	silences = []
	for _ in range(int(rng.integers(1, 4))):
		length = float(rng.uniform(0.05, 0.2))
		start = float(rng.uniform(0.0, max(duration_s - length, 0.0)))
		silences.append((start, length))

	return SpeechLikeParams(
		f0_hz=f0,
		harmonic_gains=gains.tolist(),
		harmonic_phases=phases.tolist(),
		am_rate_hz=am_rate,
		am_phase=am_phase,
		am_depth=am_depth,
		silences=silences,
	)


def _peak_normalize(x: np.ndarray, peak: float = SYNTH_PEAK) -> np.ndarray:
	top = np.max(np.abs(x))
	if top == 0:
		raise ZeroEnergyInput('synthesized signal is silent')
	return x * (peak / top)


def synth_speech_like(duration_s: float, seed: int, sample_rate_hz: int = PIPELINE_SAMPLE_RATE) -> Waveform:
	"""Deterministic harmonic complex with amplitude modulation and random silences, peak 0.5."""
	if duration_s < MIN_SPEECH_DURATION_S:
		raise InvalidDuration(f'speech-like clips need at least {MIN_SPEECH_DURATION_S} s, got {duration_s}')
	params = speech_like_params(seed, duration_s)

	n = int(round(duration_s * sample_rate_hz))
	t = np.arange(n) / sample_rate_hz
	voiced = np.zeros(n)
	for k, (gain, phase) in enumerate(zip(params.harmonic_gains, params.harmonic_phases), start=1):
		voiced += gain * np.sin(2 * np.pi * k * params.f0_hz * t + phase)

	envelope = 1.0 - params.am_depth * 0.5 * (1.0 - np.cos(2 * np.pi * params.am_rate_hz * t + params.am_phase))
	for start_s, length_s in params.silences:
		start = int(start_s * sample_rate_hz)
		envelope[start : start + int(length_s * sample_rate_hz)] = 0.0

	return Waveform(samples=_peak_normalize(voiced * envelope), sample_rate_hz=sample_rate_hz)


def synth_noise(kind: str, duration_s: float, seed: int, sample_rate_hz: int = PIPELINE_SAMPLE_RATE) -> Waveform:
	"""White, pink (-3 dB/octave) or babble-like noise, deterministic per seed, peak 0.5."""
	if kind not in NOISE_KINDS:
		raise UnknownKind(f'unknown noise kind {kind!r}; expected one of {", ".join(NOISE_KINDS)}')
	n = int(round(duration_s * sample_rate_hz))
	if n < 1:
		raise InvalidDuration(f'noise duration {duration_s} s yields no samples')
	rng = np.random.default_rng(seed)

	if kind == 'white':
		x = rng.standard_normal(n)
	elif kind == 'pink':
		spectrum = np.fft.rfft(rng.standard_normal(n))
		freqs = np.fft.rfftfreq(n, d=1.0 / sample_rate_hz)
		shaping = np.zeros_like(freqs)
		shaping[1:] = 1.0 / np.sqrt(freqs[1:])
		x = np.fft.irfft(spectrum * shaping, n=n)
	else:
		talker_seeds = rng.integers(0, 2**31 - 1, size=BABBLE_TALKERS)
		x = np.sum([synth_speech_like(duration_s, int(s), sample_rate_hz).samples for s in talker_seeds], axis=0)

	return Waveform(samples=_peak_normalize(x), sample_rate_hz=sample_rate_hz)


def read_manifest(path: str | Path) -> list[ManifestEntry]:
	"""Parse ``clean<TAB>noise<TAB>snr_db<TAB>seed`` lines; relative paths resolve against the manifest."""
	path = Path(path)
	base = path.parent
	try:
		text = path.read_text()
	except (OSError, UnicodeDecodeError) as e:
		raise ManifestError(f'{path}: cannot read manifest ({e})') from e

	entries = []
	for lineno, line in enumerate(text.splitlines(), start=1):
		line = line.strip()
		if not line or line.startswith('#'):
			continue
		fields = line.split('\t')
		if len(fields) != 4:
			raise ManifestError(f'{path}:{lineno}: expected 4 tab-separated fields, got {len(fields)}')
		clean, noise, snr_db, seed = fields
		try:
			entries.append(ManifestEntry(clean_path=base / clean, noise_path=base / noise, snr_db=float(snr_db), seed=int(seed)))
		except ValueError as e:
			raise ManifestError(f'{path}:{lineno}: {e}') from e
	return entries


def write_manifest(path: str | Path, entries: Iterable[ManifestEntry]) -> None:
	"""Write entries with paths made relative to the manifest directory where possible."""
	path = Path(path)
	base = path.parent.resolve()
	lines = []
	for entry in entries:
		rel = entry.model_copy(
			update={'clean_path': _relative_to(entry.clean_path, base), 'noise_path': _relative_to(entry.noise_path, base)}
		)
		lines.append(rel.to_line())
	try:
		path.write_text('\n'.join(lines) + '\n')
	except OSError as e:
		raise IoFailure(f'{path}: cannot write manifest ({e})') from e


def _relative_to(p: Path, base: Path) -> Path:
	try:
		return p.resolve().relative_to(base)
	except ValueError:
		return p


@time_execution_sync('--build_toy_corpus')
def build_toy_corpus(
	out_dir: str | Path,
	num_clips: int = 20,
	duration_s: float = 3.0,
	kinds: Sequence[str] = ('white', 'pink'),
	snrs_db: Sequence[float] = TRAIN_SNRS_DB,
	seed: int = 0,
	manifest_name: str = 'manifest.tsv',
) -> Path:
	"""Write clean clips, one long noise clip per kind, and a manifest crossing clips x kinds x SNRs."""
	out_dir = Path(out_dir)
	try:
		out_dir.mkdir(parents=True, exist_ok=True)
	except OSError as e:
		raise IoFailure(f'{out_dir}: cannot create corpus directory ({e})') from e

	clean_paths = []
	for i in range(num_clips):
		clean_path = out_dir / f'clean_{i:03d}.wav'
		write_wav(clean_path, synth_speech_like(duration_s, seed * 10_000 + i))
		clean_paths.append(clean_path)

	noise_paths = {}
	for j, kind in enumerate(kinds):
		noise_path = out_dir / f'noise_{kind}.wav'
		# longer than the clips so the random offset matters
		write_wav(noise_path, synth_noise(kind, 4 * duration_s, seed * 10_000 + 5_000 + j))
		noise_paths[kind] = noise_path

	entries = []
	for i, clean_path in enumerate(clean_paths):
		for kind in kinds:
			for snr_db in snrs_db:
				entries.append(
					ManifestEntry(clean_path=clean_path, noise_path=noise_paths[kind], snr_db=snr_db, seed=seed * 100_000 + len(entries))
				)

	manifest_path = out_dir / manifest_name
	write_manifest(manifest_path, entries)
	logger.info(f'📦 Toy corpus: {num_clips} clips x {len(kinds)} noises x {len(snrs_db)} SNRs -> {manifest_path}')
	return manifest_path
