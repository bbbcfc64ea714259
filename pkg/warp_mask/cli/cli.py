"""
Main CLI entry point for warp-mask.

Orchestrates all subcommands. Exit codes: 0 on success, 1 on usage errors, 2 on data errors.
"""

import logging
import sys
import traceback
from collections.abc import Sequence
from pathlib import Path

import click
from dotenv import load_dotenv
from pydantic import ValidationError

from warp_mask.audio.service import read_wav, write_wav
from warp_mask.metrics.service import evaluate
from warp_mask.mixer.service import build_toy_corpus, measured_snr, mix_at_snr, read_manifest
from warp_mask.mixer.views import MixSpec
from warp_mask.neural.serialization import load_model, save_model
from warp_mask.neural.service import train
from warp_mask.mask.service import write_mask
from warp_mask.pipeline.service import (
	Enhancer,
	alpha_sweep,
	select_best_gamma,
	sweep,
	sweep_csv,
	write_features,
	write_sweep_csv,
)
from warp_mask.pipeline.views import HIGHER_IS_BETTER, TASK_PRESETS
from warp_mask.utils import DATA_ERROR_CODE, WarpMaskError

from .config import load_run_config, update_config_with_click_args
from .utils import FLOAT_LIST, configure_logging, print_history, print_report, print_sweep_table, silence_third_party_loggers

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

USAGE_ERROR_CODE = 1

EXISTING_FILE = click.Path(exists=True, dir_okay=False)
NEW_FILE = click.Path(dir_okay=False)

config_option = click.option(
	'--config', 'config_path', type=EXISTING_FILE, help='Flat key=value run configuration; flags override it'
)


def _require(value, flag: str):
	if value is None:
		raise click.UsageError(f'{flag} is required (on the command line or in --config)')
	return value


def _one_of(single: float | None, many: tuple[float, ...] | None, names: tuple[str, str]) -> tuple[float, ...] | None:
	if single is not None and many is not None:
		raise click.UsageError(f'{names[0]} and {names[1]} are mutually exclusive')
	if single is not None:
		return (single,)
	return many


def _per_gamma(path: Path, gamma: float, default_suffix: str) -> Path:
	return path.with_name(f'{path.stem}_g{gamma:g}{path.suffix or default_suffix}')


@click.group()
@click.option('--debug', is_flag=True, help='Enable debug logging and tracebacks')
@click.pass_context
def cli(ctx: click.Context, debug: bool = False):
	"""Task-aware warped-mask speech enhancement.

	Examples:
	  warpmask synth-corpus --out corpus/             # toy clean/noise corpus + manifest
	  warpmask train --in corpus/manifest.tsv --model m.bin --alpha 1.5
	  warpmask enhance --in noisy.wav --out clean.wav --model m.bin --task asv
	  warpmask sweep --in corpus/manifest.tsv --model m.bin --out sweep.csv
	"""
	configure_logging(debug)
	silence_third_party_loggers()
	ctx.ensure_object(dict)['debug'] = debug


@cli.command()
@click.option('--in', 'clean_path', required=True, type=EXISTING_FILE, help='Clean speech WAV')
@click.option('--noise', 'noise_path', required=True, type=EXISTING_FILE, help='Noise WAV (looped or cropped to fit)')
@click.option('--snr', type=float, required=True, help='Target SNR in dB')
@click.option('--seed', type=click.IntRange(min=0), default=0, show_default=True, help='Seed for the noise offset')
@click.option('--out', 'out_path', required=True, type=NEW_FILE, help='Noisy output WAV')
@click.option('--noise-out', type=NEW_FILE, help='Also write the scaled noise')
def mix(clean_path: str, noise_path: str, snr: float, seed: int, out_path: str, noise_out: str | None):
	"""Mix clean speech and noise at an exact SNR."""
	clean = read_wav(clean_path)
	noisy, scaled = mix_at_snr(clean, read_wav(noise_path), MixSpec(snr_db=snr, seed=seed))
	write_wav(out_path, noisy)
	if noise_out:
		write_wav(noise_out, scaled)
	logger.info(f'🎚️  Mixed at {measured_snr(clean, scaled):.6f} dB -> {out_path}')


@cli.command('synth-corpus')
@click.option('--out', 'out_dir', required=True, type=click.Path(file_okay=False), help='Output directory')
@click.option('--clips', type=click.IntRange(min=1), default=20, show_default=True)
@click.option('--duration', type=click.FloatRange(min=0.5), default=3.0, show_default=True, help='Clip length in seconds')
@click.option('--kinds', default='white,pink', show_default=True, help='Noise kinds: white, pink, babble-surrogate')
@click.option('--snrs', type=FLOAT_LIST, default='0,5,10', show_default=True, help='Manifest SNRs in dB')
@click.option('--seed', type=click.IntRange(min=0), default=0, show_default=True)
def synth_corpus(out_dir: str, clips: int, duration: float, kinds: str, snrs: tuple[float, ...], seed: int):
	"""Write a synthetic speech-like corpus and its manifest."""
	kind_list = tuple(k.strip() for k in kinds.split(',') if k.strip())
	manifest = build_toy_corpus(out_dir, num_clips=clips, duration_s=duration, kinds=kind_list, snrs_db=snrs, seed=seed)
	click.echo(str(manifest))


@cli.command('train')
@config_option
@click.option('--in', 'manifest', type=EXISTING_FILE, help='Training manifest')
@click.option('--model', type=NEW_FILE, help='Where to save the trained model')
@click.option('--alpha', type=click.FloatRange(min=0, min_open=True), help='Training warping factor')
@click.option('--seed', type=click.IntRange(min=0))
@click.option('--epochs', type=click.IntRange(min=1))
@click.pass_context
def train_command(ctx: click.Context, config_path: str | None, **_):
	"""Train the mask estimator on alpha-warped oracle targets."""
	config = update_config_with_click_args(load_run_config(config_path), ctx)
	manifest = _require(config.manifest, '--in')
	model_path = _require(config.model, '--model')

	params, history = train(manifest, config.train_config(), config.net_config())
	save_model(model_path, params)
	print_history(history)


@cli.command()
@config_option
@click.option('--in', 'in_path', required=True, type=EXISTING_FILE, help='Noisy input WAV')
@click.option('--out', 'out_path', required=True, type=NEW_FILE, help='Enhanced output WAV')
@click.option('--model', type=EXISTING_FILE, help='Trained model file')
@click.option('--gamma', type=click.FloatRange(min=0), help='Testing warping factor (0 disables enhancement)')
@click.option('--gammas', type=FLOAT_LIST, help='Several testing warps; writes <stem>_g<gamma>.wav per value')
@click.option('--task', type=click.Choice(sorted(TASK_PRESETS)), help='Preset gamma: asv=0.75, asr=1.0, quality=1.5')
@click.option('--features-out', type=NEW_FILE, help='Also save the masked log-power features as .npy')
@click.option('--mask-out', type=NEW_FILE, help='Also dump the applied test mask (none for gamma 0)')
@click.pass_context
def enhance(
	ctx: click.Context,
	config_path: str | None,
	in_path: str,
	out_path: str,
	gamma: float | None,
	gammas: tuple[float, ...] | None,
	task: str | None,
	features_out: str | None,
	mask_out: str | None,
	**_,
):
	"""Enhance a noisy WAV at one or more testing warps."""
	given = [flag for flag, value in (('--gamma', gamma), ('--gammas', gammas), ('--task', task)) if value is not None]
	if len(given) > 1:
		raise click.UsageError(f'{" and ".join(given)} are mutually exclusive')
	if not given:
		raise click.UsageError('one of --gamma, --gammas or --task is required')
	if task is not None:
		gamma = TASK_PRESETS[task]

	config = update_config_with_click_args(load_run_config(config_path), ctx)
	params = load_model(_require(config.model, '--model'))
	enhancer = Enhancer(params, config.stft_config())
	noisy = read_wav(in_path)

	out = Path(out_path)
	values = (gamma,) if gammas is None else gammas
	for g, (waveform, applied) in zip(values, enhancer.enhance_with_masks(noisy, values)):
		target = out if gammas is None else _per_gamma(out, g, '.wav')
		write_wav(target, waveform)
		logger.info(f'✨ gamma={g:g} -> {target}')
		if features_out:
			features_path = Path(features_out) if gammas is None else _per_gamma(Path(features_out), g, '.npy')
			write_features(features_path, enhancer.enhanced_features(noisy, applied))
		# gamma = 0 applies no mask
		if mask_out and applied is not None:
			write_mask(Path(mask_out) if gammas is None else _per_gamma(Path(mask_out), g, '.bin'), applied)


@cli.command('sweep')
@config_option
@click.option('--in', 'manifest', type=EXISTING_FILE, help='Evaluation manifest')
@click.option('--model', type=EXISTING_FILE, help='Trained model file')
@click.option('--gamma', type=click.FloatRange(min=0), help='Single testing warp')
@click.option('--gammas', type=FLOAT_LIST, help='Testing warp grid')
@click.option('--snr', type=float, help='Single test SNR in dB')
@click.option('--snrs', type=FLOAT_LIST, help='Test SNR grid in dB')
@click.option('--workers', type=click.IntRange(min=1))
@click.option('--out', 'out_path', type=NEW_FILE, help='CSV report (stdout when omitted)')
@click.option('--best', type=click.Choice(sorted(HIGHER_IS_BETTER)), help='Report the best gamma per SNR by this metric')
@click.pass_context
def sweep_command(ctx: click.Context, config_path: str | None, out_path: str | None, best: str | None, **_):
	"""Average metrics over a manifest for every (SNR, gamma) cell."""
	ctx.params['gammas'] = _one_of(ctx.params.get('gamma'), ctx.params.get('gammas'), ('--gamma', '--gammas'))
	ctx.params['snrs'] = _one_of(ctx.params.get('snr'), ctx.params.get('snrs'), ('--snr', '--snrs'))
	config = update_config_with_click_args(load_run_config(config_path), ctx)
	entries = read_manifest(_require(config.manifest, '--in'))
	params = load_model(_require(config.model, '--model'))

	rows = sweep(entries, params, config.gammas, config.snrs, config.stft_config(), config.workers)
	if out_path:
		write_sweep_csv(out_path, rows)
		print_sweep_table(rows)
	else:
		click.echo(sweep_csv(rows), nl=False)

	if best:
		for snr_db, gamma in select_best_gamma(rows, best).items():
			logger.info(f'🏆 best gamma at {snr_db:g} dB by {best}: {gamma:g}')


@cli.command('eval')
@click.option('--ref', 'ref_path', required=True, type=EXISTING_FILE, help='Clean reference WAV')
@click.option('--in', 'in_path', required=True, type=EXISTING_FILE, help='Estimate WAV')
def eval_command(ref_path: str, in_path: str):
	"""Segmental SNR, SI-SDR and log-spectral distance of an estimate."""
	print_report(evaluate(read_wav(ref_path), read_wav(in_path)), title=Path(in_path).name)


@cli.command('alpha-sweep')
@config_option
@click.option('--in', 'manifest', type=EXISTING_FILE, help='Training manifest')
@click.option('--eval-in', 'eval_manifest', type=EXISTING_FILE, help='Evaluation manifest (defaults to --in)')
@click.option('--alphas', type=FLOAT_LIST, help='Training warps to compare')
@click.option('--gamma', type=click.FloatRange(min=0), help='Fixed testing warp')
@click.option('--snrs', type=FLOAT_LIST, help='Test SNR grid in dB')
@click.option('--seed', type=click.IntRange(min=0))
@click.option('--epochs', type=click.IntRange(min=1))
@click.option('--workers', type=click.IntRange(min=1))
@click.option('--out', 'out_path', type=NEW_FILE, help='CSV report (stdout when omitted)')
@click.pass_context
def alpha_sweep_command(ctx: click.Context, config_path: str | None, out_path: str | None, **_):
	"""Train one model per training warp and compare them at a fixed testing warp."""
	config = update_config_with_click_args(load_run_config(config_path), ctx)
	train_entries = read_manifest(_require(config.manifest, '--in'))
	eval_entries = read_manifest(config.eval_manifest) if config.eval_manifest else train_entries

	rows = alpha_sweep(
		train_entries,
		eval_entries,
		config.alphas,
		config.train_config(),
		config.net_config(),
		gamma=config.alpha_sweep_gamma,
		snrs=config.snrs,
		max_workers=config.workers,
	)
	if out_path:
		write_sweep_csv(out_path, rows, with_alpha=True)
		print_sweep_table(rows, title='Alpha sweep')
	else:
		click.echo(sweep_csv(rows, with_alpha=True), nl=False)


def run(argv: Sequence[str] | None = None) -> int:
	"""Run the CLI and return its exit code instead of exiting."""
	args = list(sys.argv[1:] if argv is None else argv)
	try:
		result = cli.main(args=args, prog_name='warpmask', standalone_mode=False)
	except click.ClickException as e:
		e.show()
		return USAGE_ERROR_CODE
	except click.Abort:
		click.echo('Aborted!', err=True)
		return USAGE_ERROR_CODE
	except (WarpMaskError, ValidationError) as e:
		if '--debug' in args:
			traceback.print_exc()
		message = e.message if isinstance(e, WarpMaskError) else str(e)
		click.echo(f'Error: {message}', err=True)
		return getattr(e, 'code', DATA_ERROR_CODE)
	except OSError as e:
		click.echo(f'Error: {e}', err=True)
		return DATA_ERROR_CODE
	return result if isinstance(result, int) else 0


def main():
	"""Entry point for the CLI."""
	sys.exit(run())
