import logging

import numpy as np
import pytest

from warp_mask.audio.service import read_wav, write_wav
from warp_mask.cli import run
from warp_mask.cli.utils import HANDLER_NAME
from warp_mask.mask.service import read_mask
from warp_mask.mixer.service import build_toy_corpus, measured_snr, read_manifest
from warp_mask.neural.serialization import load_model, save_model
from warp_mask.spectral.service import lps, magnitude, stft
from warp_mask.tests.conftest import SMALL_STFT

DESK_CONFIG = 'fft_size=16\nhop=8\ncontext=1\nhidden=2\nnum_blstm_layers=1\nsegment_s=0.1\nminibatch=2\nsegments_per_clip=1\n'


@pytest.fixture(autouse=True)
def detach_console_handler():
	yield
	root = logging.getLogger()
	for handler in [h for h in root.handlers if h.get_name() == HANDLER_NAME]:
		root.removeHandler(handler)


@pytest.fixture
def workspace(tmp_path, speech, white_noise, small_params):
	(tmp_path / 'run.cfg').write_text(DESK_CONFIG)
	noisy = speech.with_samples(speech.samples + 0.2 * white_noise.samples)
	write_wav(tmp_path / 'noisy.wav', noisy)
	write_wav(tmp_path / 'clean.wav', speech)
	write_wav(tmp_path / 'noise.wav', white_noise)
	save_model(tmp_path / 'model.bin', small_params)
	return tmp_path


def enhance_args(ws, out_name, *extra):
	return ['enhance', '--config', str(ws / 'run.cfg'), '--model', str(ws / 'model.bin'), '--in', str(ws / 'noisy.wav'), '--out', str(ws / out_name), *extra]


def test_unknown_flag_is_a_usage_error():
	assert run(['enhance', '--bogus']) == 1
	assert run(['no-such-command']) == 1


def test_enhance_needs_exactly_one_gamma_flag(workspace):
	assert run(enhance_args(workspace, 'out.wav')) == 1
	assert run(enhance_args(workspace, 'out.wav', '--gamma', '0.5', '--task', 'asr')) == 1


def test_task_preset_matches_explicit_gamma(workspace):
	assert run(enhance_args(workspace, 'task.wav', '--task', 'asv')) == 0
	assert run(enhance_args(workspace, 'gamma.wav', '--gamma', '0.75')) == 0
	assert (workspace / 'task.wav').read_bytes() == (workspace / 'gamma.wav').read_bytes()


def test_gamma_zero_writes_the_input_back(workspace):
	assert run(enhance_args(workspace, 'same.wav', '--gamma', '0')) == 0
	before = read_wav(workspace / 'noisy.wav').samples
	after = read_wav(workspace / 'same.wav').samples
	np.testing.assert_allclose(after, before, rtol=0, atol=1 / 32768)


def test_enhance_several_gammas(workspace):
	assert run(enhance_args(workspace, 'multi.wav', '--gammas', '0.5,1.5')) == 0
	assert (workspace / 'multi_g0.5.wav').exists()
	assert (workspace / 'multi_g1.5.wav').exists()


def test_enhance_writes_features_and_mask(workspace):
	extra = ['--gamma', '0.75', '--features-out', str(workspace / 'feat.npy'), '--mask-out', str(workspace / 'mask.bin')]
	assert run(enhance_args(workspace, 'out.wav', *extra)) == 0

	noisy_lps = lps(magnitude(stft(read_wav(workspace / 'noisy.wav'), SMALL_STFT)))
	features = np.load(workspace / 'feat.npy')
	mask = read_mask(workspace / 'mask.bin', kind='test')
	assert features.shape == mask.shape == noisy_lps.shape
	# the mask file is float32
	expected = np.maximum(noisy_lps.data + 2.0 * np.log(mask.data), np.log(noisy_lps.epsilon))
	np.testing.assert_allclose(features, expected, rtol=0, atol=1e-5)


def test_enhance_several_gammas_with_side_outputs(workspace):
	extra = ['--gammas', '0,1.5', '--features-out', str(workspace / 'feat.npy'), '--mask-out', str(workspace / 'mask.bin')]
	assert run(enhance_args(workspace, 'multi.wav', *extra)) == 0

	noisy_lps = lps(magnitude(stft(read_wav(workspace / 'noisy.wav'), SMALL_STFT)))
	np.testing.assert_array_equal(np.load(workspace / 'feat_g0.npy'), noisy_lps.data)
	assert np.all(np.load(workspace / 'feat_g1.5.npy') <= noisy_lps.data)
	assert (workspace / 'mask_g1.5.bin').exists()
	assert not (workspace / 'mask_g0.bin').exists()


def test_data_errors_exit_with_two(workspace):
	# the 9-bin model does not fit the default 512-point STFT
	args = ['enhance', '--model', str(workspace / 'model.bin'), '--in', str(workspace / 'noisy.wav'), '--out', str(workspace / 'x.wav'), '--gamma', '1']
	assert run(args) == 2

	(workspace / 'broken.wav').write_bytes(b'RIFF' + bytes(40))
	assert run(['eval', '--ref', str(workspace / 'clean.wav'), '--in', str(workspace / 'broken.wav')]) == 2

	(workspace / 'bad.cfg').write_text('colour=blue\n')
	assert run(['train', '--config', str(workspace / 'bad.cfg')]) == 2


def test_missing_files_named_in_config_exit_with_two(workspace):
	cfg = workspace / 'missing.cfg'
	cfg.write_text(DESK_CONFIG + f'model={workspace / "gone.bin"}\nmanifest={workspace / "gone.tsv"}\n')
	args = ['enhance', '--config', str(cfg), '--in', str(workspace / 'noisy.wav'), '--out', str(workspace / 'x.wav'), '--gamma', '1']
	assert run(args) == 2
	assert run(['train', '--config', str(cfg), '--model', str(workspace / 'new.bin')]) == 2
	assert run(['sweep', '--config', str(cfg)]) == 2
	assert not (workspace / 'x.wav').exists()


def test_unwritable_outputs_exit_with_two(workspace):
	# noisy.wav is a regular file, so nothing can be created beneath it
	assert run(enhance_args(workspace, 'noisy.wav/out.wav', '--gamma', '1')) == 2
	assert run(enhance_args(workspace, 'ok.wav', '--gamma', '1', '--features-out', str(workspace / 'noisy.wav' / 'f.npy'))) == 2
	assert run(['synth-corpus', '--out', str(workspace / 'noisy.wav' / 'corpus'), '--clips', '1', '--duration', '0.5']) == 2


def test_mix_command(workspace):
	out = workspace / 'mixed.wav'
	noise_out = workspace / 'scaled.wav'
	args = ['mix', '--in', str(workspace / 'clean.wav'), '--noise', str(workspace / 'noise.wav'), '--snr', '5', '--out', str(out), '--noise-out', str(noise_out)]
	assert run(args) == 0
	# PCM16 output quantizes the scaled noise
	assert measured_snr(read_wav(workspace / 'clean.wav'), read_wav(noise_out)) == pytest.approx(5.0, abs=0.05)
	assert len(read_wav(out)) == len(read_wav(workspace / 'clean.wav'))


def test_eval_command(workspace):
	assert run(['eval', '--ref', str(workspace / 'clean.wav'), '--in', str(workspace / 'noisy.wav')]) == 0


def test_corpus_train_and_sweep(tmp_path):
	corpus = tmp_path / 'corpus'
	assert run(['synth-corpus', '--out', str(corpus), '--clips', '3', '--duration', '0.5', '--kinds', 'white', '--snrs', '0']) == 0
	manifest = corpus / 'manifest.tsv'
	assert len(read_manifest(manifest)) == 3

	cfg = tmp_path / 'run.cfg'
	cfg.write_text(DESK_CONFIG)
	model = tmp_path / 'model.bin'
	assert run(['train', '--config', str(cfg), '--in', str(manifest), '--model', str(model), '--alpha', '1', '--epochs', '1']) == 0
	assert load_model(model).alpha_trained == 1.0

	report = tmp_path / 'sweep.csv'
	args = ['sweep', '--config', str(cfg), '--in', str(manifest), '--model', str(model), '--gammas', '0,1', '--snr', '10', '--out', str(report)]
	assert run([*args[:-1], str(manifest / 'sweep.csv')]) == 2
	assert run([*args, '--best', 'seg_snr_db']) == 0
	lines = report.read_text().splitlines()
	assert lines[0] == 'snr_db,gamma,seg_snr_db,si_sdr_db,lsd_db,mask_mse,n_utts'
	assert [line.split(',')[:2] for line in lines[1:]] == [['10', '0'], ['10', '1']]

	assert run(['sweep', '--config', str(cfg), '--in', str(manifest), '--model', str(model), '--gamma', '1', '--gammas', '0,1']) == 1


def test_alpha_sweep_command(tmp_path):
	manifest = build_toy_corpus(tmp_path / 'corpus', num_clips=3, duration_s=0.5, kinds=('white',), snrs_db=(0.0,), seed=2)
	cfg = tmp_path / 'run.cfg'
	cfg.write_text(DESK_CONFIG + 'epochs=1\n')
	report = tmp_path / 'alphas.csv'
	args = ['alpha-sweep', '--config', str(cfg), '--in', str(manifest), '--alphas', '0.5,1.5', '--gamma', '0.5', '--snrs', '0', '--out', str(report)]
	assert run(args) == 0
	lines = report.read_text().splitlines()
	assert lines[0].startswith('alpha,snr_db,gamma,')
	assert [line.split(',')[:3] for line in lines[1:]] == [['0.5', '0', '0.5'], ['1.5', '0', '0.5']]
