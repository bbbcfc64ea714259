"""Densely connected BLSTM mask estimator with a hand-written reverse pass.

For a batch of normalised LPS frames x (batch x frames x f):

	conv     linear 1-D convolution over frames, kernel 2n+1, zero padded by n frames
	block k  BLSTM over concat(conv, block 1 .. k-1 outputs), both directions -> 2h, projected to f
	fc1      ReLU
	fc2      logistic sigmoid, the predicted training mask

LSTM gates are packed as [input, forget, candidate, output] along the last weight axis.
"""

import logging
from collections.abc import Mapping
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

from warp_mask.mask.views import MASK_FLOOR, Mask, ShapeMismatch
from warp_mask.neural.views import DBlstmParams, NetConfig
from warp_mask.spectral.views import LpsFeatures

logger = logging.getLogger(__name__)

NORM_EPS = 1e-5
# a saturated sigmoid rounds to 1.0; predictions stay strictly inside (0, 1)
PREDICTED_CEILING = 1.0 - MASK_FLOOR

Tensors = Mapping[str, np.ndarray]


def normalize_features(data: np.ndarray) -> np.ndarray:
	"""Per-utterance, per-bin mean and variance normalisation of a frames x bins matrix."""
	mean = data.mean(axis=0, keepdims=True)
	var = data.var(axis=0, keepdims=True)
	return (data - mean) / np.sqrt(var + NORM_EPS)


def init_params(cfg: NetConfig, seed: int, alpha_trained: float = 1.0) -> DBlstmParams:
	"""Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights, zero biases except forget gates at +1."""
	rng = np.random.default_rng(seed)
	tensors = {}
	for name, shape in cfg.param_shapes().items():
		if len(shape) == 1:
			bias = np.zeros(shape)
			if name.endswith(('.fwd.b', '.bwd.b')):
				bias[cfg.hidden : 2 * cfg.hidden] = 1.0
			tensors[name] = bias
		else:
			fan_in = int(np.prod(shape[:-1]))
			bound = 1.0 / np.sqrt(fan_in)
			tensors[name] = rng.uniform(-bound, bound, size=shape)
	return DBlstmParams(config=cfg, alpha_trained=alpha_trained, tensors=tensors)


def _flat(a: np.ndarray) -> np.ndarray:
	return a.reshape(-1, a.shape[-1])


@dataclass
class _LstmCache:
	x: np.ndarray
	gates: np.ndarray
	cells: np.ndarray
	tanh_cells: np.ndarray
	hidden: np.ndarray


@dataclass
class _BlockCache:
	inputs: np.ndarray
	fwd: _LstmCache
	bwd: _LstmCache
	hidden: np.ndarray


@dataclass
class _ForwardCache:
	cols: np.ndarray
	features: list[np.ndarray] = field(default_factory=list)
	blocks: list[_BlockCache] = field(default_factory=list)
	fc1_pre: np.ndarray | None = None
	fc1_out: np.ndarray | None = None
	output: np.ndarray | None = None


def _conv_columns(x: np.ndarray, context: int) -> np.ndarray:
	"""im2col over frames: (batch, frames, f) -> (batch, frames, kernel * f), column k*f+i is x[t+k-n, i]."""
	batch, frames, _ = x.shape
	padded = np.pad(x, ((0, 0), (context, context), (0, 0)))
	windows = sliding_window_view(padded, 2 * context + 1, axis=1)
	return np.ascontiguousarray(windows.transpose(0, 1, 3, 2)).reshape(batch, frames, -1)


def _lstm_forward(x: np.ndarray, W_x: np.ndarray, W_h: np.ndarray, b: np.ndarray) -> _LstmCache:
	batch, frames, _ = x.shape
	h = W_h.shape[0]
	pre_x = x @ W_x + b
	gates = np.empty((batch, frames, 4 * h))
	cells = np.empty((batch, frames, h))
	hidden = np.empty((batch, frames, h))

	h_prev = np.zeros((batch, h))
	c_prev = np.zeros((batch, h))
	for t in range(frames):
		a = pre_x[:, t] + h_prev @ W_h
		i = expit(a[:, :h])
		f = expit(a[:, h : 2 * h])
		g = np.tanh(a[:, 2 * h : 3 * h])
		o = expit(a[:, 3 * h :])
		c_prev = f * c_prev + i * g
		h_prev = o * np.tanh(c_prev)
		gates[:, t] = np.concatenate([i, f, g, o], axis=1)
		cells[:, t] = c_prev
		hidden[:, t] = h_prev
	return _LstmCache(x=x, gates=gates, cells=cells, tanh_cells=np.tanh(cells), hidden=hidden)


def _lstm_backward(
	cache: _LstmCache, W_x: np.ndarray, W_h: np.ndarray, d_hidden: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
	"""Backprop through time. Returns (d_x, d_W_x, d_W_h, d_b)."""
	batch, frames, h = cache.hidden.shape
	d_pre = np.empty_like(cache.gates)
	dh_next = np.zeros((batch, h))
	dc_next = np.zeros((batch, h))
	zeros = np.zeros((batch, h))

	for t in reversed(range(frames)):
		gates = cache.gates[:, t]
		i, f, g, o = gates[:, :h], gates[:, h : 2 * h], gates[:, 2 * h : 3 * h], gates[:, 3 * h :]
		c_prev = cache.cells[:, t - 1] if t > 0 else zeros
		tanh_c = cache.tanh_cells[:, t]

		dh = d_hidden[:, t] + dh_next
		dc = dh * o * (1.0 - tanh_c**2) + dc_next
		d_pre[:, t, :h] = dc * g * i * (1.0 - i)
		d_pre[:, t, h : 2 * h] = dc * c_prev * f * (1.0 - f)
		d_pre[:, t, 2 * h : 3 * h] = dc * i * (1.0 - g**2)
		d_pre[:, t, 3 * h :] = dh * tanh_c * o * (1.0 - o)
		dc_next = dc * f
		dh_next = d_pre[:, t] @ W_h.T

	h_prev = np.concatenate([np.zeros((batch, 1, h)), cache.hidden[:, :-1]], axis=1)
	d_W_x = _flat(cache.x).T @ _flat(d_pre)
	d_W_h = _flat(h_prev).T @ _flat(d_pre)
	d_b = d_pre.sum(axis=(0, 1))
	return d_pre @ W_x.T, d_W_x, d_W_h, d_b


def forward_batch(tensors: Tensors, cfg: NetConfig, x: np.ndarray) -> tuple[np.ndarray, _ForwardCache]:
	"""Run the network on normalised features of shape (batch, frames, f); returns sigmoid outputs and the cache."""
	if x.ndim != 3 or x.shape[2] != cfg.feat_dim:
		raise ShapeMismatch(f'expected (batch, frames, {cfg.feat_dim}) features, got {x.shape}')
	if x.shape[1] < 1:
		raise ShapeMismatch('features need at least one frame')

	cols = _conv_columns(x, cfg.context)
	conv_W = tensors['conv.W'].reshape(-1, cfg.feat_dim)
	cache = _ForwardCache(cols=cols)
	cache.features.append(cols @ conv_W + tensors['conv.b'])

	for block in range(1, cfg.num_blstm_layers + 1):
		prefix = f'blstm{block}'
		inputs = np.concatenate(cache.features, axis=-1)
		fwd = _lstm_forward(inputs, tensors[f'{prefix}.fwd.W_x'], tensors[f'{prefix}.fwd.W_h'], tensors[f'{prefix}.fwd.b'])
		bwd = _lstm_forward(
			inputs[:, ::-1], tensors[f'{prefix}.bwd.W_x'], tensors[f'{prefix}.bwd.W_h'], tensors[f'{prefix}.bwd.b']
		)
		hidden = np.concatenate([fwd.hidden, bwd.hidden[:, ::-1]], axis=-1)
		cache.blocks.append(_BlockCache(inputs=inputs, fwd=fwd, bwd=bwd, hidden=hidden))
		cache.features.append(hidden @ tensors[f'{prefix}.proj.W'] + tensors[f'{prefix}.proj.b'])

	cache.fc1_pre = cache.features[-1] @ tensors['fc1.W'] + tensors['fc1.b']
	cache.fc1_out = np.maximum(cache.fc1_pre, 0.0)
	cache.output = expit(cache.fc1_out @ tensors['fc2.W'] + tensors['fc2.b'])
	return cache.output, cache


def _backward_batch(tensors: Tensors, cfg: NetConfig, cache: _ForwardCache, d_output: np.ndarray) -> dict[str, np.ndarray]:
	f, h = cfg.feat_dim, cfg.hidden
	grads: dict[str, np.ndarray] = {}

	y = cache.output
	d_fc2_pre = d_output * y * (1.0 - y)
	grads['fc2.W'] = _flat(cache.fc1_out).T @ _flat(d_fc2_pre)
	grads['fc2.b'] = d_fc2_pre.sum(axis=(0, 1))
	d_fc1_pre = (d_fc2_pre @ tensors['fc2.W'].T) * (cache.fc1_pre > 0)
	grads['fc1.W'] = _flat(cache.features[-1]).T @ _flat(d_fc1_pre)
	grads['fc1.b'] = d_fc1_pre.sum(axis=(0, 1))

	d_features = [np.zeros_like(feat) for feat in cache.features]
	d_features[-1] += d_fc1_pre @ tensors['fc1.W'].T

	for block in reversed(range(1, cfg.num_blstm_layers + 1)):
		prefix = f'blstm{block}'
		block_cache = cache.blocks[block - 1]
		d_out = d_features[block]
		grads[f'{prefix}.proj.W'] = _flat(block_cache.hidden).T @ _flat(d_out)
		grads[f'{prefix}.proj.b'] = d_out.sum(axis=(0, 1))
		d_hidden = d_out @ tensors[f'{prefix}.proj.W'].T

		d_x_fwd, *fwd_grads = _lstm_backward(
			block_cache.fwd, tensors[f'{prefix}.fwd.W_x'], tensors[f'{prefix}.fwd.W_h'], d_hidden[..., :h]
		)
		d_x_bwd, *bwd_grads = _lstm_backward(
			block_cache.bwd, tensors[f'{prefix}.bwd.W_x'], tensors[f'{prefix}.bwd.W_h'], d_hidden[:, ::-1, h:]
		)
		for direction, direction_grads in (('fwd', fwd_grads), ('bwd', bwd_grads)):
			for suffix, grad in zip(('W_x', 'W_h', 'b'), direction_grads):
				grads[f'{prefix}.{direction}.{suffix}'] = grad

		d_inputs = d_x_fwd + d_x_bwd[:, ::-1]
		for j in range(block):
			d_features[j] += d_inputs[..., j * f : (j + 1) * f]

	d_conv = d_features[0]
	grads['conv.W'] = (_flat(cache.cols).T @ _flat(d_conv)).reshape(cfg.kernel, f, f)
	grads['conv.b'] = d_conv.sum(axis=(0, 1))
	return {name: grads[name] for name in cfg.param_shapes()}


def loss_and_grads(tensors: Tensors, cfg: NetConfig, x: np.ndarray, target: np.ndarray) -> tuple[float, dict[str, np.ndarray]]:
	"""Mean squared error over every (batch, frame, bin) entry and its gradient for each tensor."""
	y, cache = forward_batch(tensors, cfg, x)
	if target.shape != y.shape:
		raise ShapeMismatch(f'target shape {target.shape} does not match output {y.shape}')
	diff = y - target
	loss = float(np.mean(diff**2))
	grads = _backward_batch(tensors, cfg, cache, 2.0 * diff / diff.size)
	return loss, grads


def _single_utterance(params: DBlstmParams, x: LpsFeatures) -> np.ndarray:
	if x.bins != params.config.feat_dim:
		raise ShapeMismatch(f'features have {x.bins} bins, network expects {params.config.feat_dim}')
	if x.frames < 1:
		raise ShapeMismatch('features need at least one frame')
	return normalize_features(x.data)[None]


def forward(params: DBlstmParams, x: LpsFeatures) -> Mask:
	"""Predicted training mask (frames x f) for one utterance of raw LPS features."""
	y, _ = forward_batch(params.tensors, params.config, _single_utterance(params, x))
	return Mask(data=np.clip(y[0], MASK_FLOOR, PREDICTED_CEILING), kind='predicted')


def loss_mse(pred: Mask, target: Mask) -> float:
	if pred.shape != target.shape:
		raise ShapeMismatch(f'prediction {pred.shape} and target {target.shape} differ')
	return float(np.mean((pred.data - target.data) ** 2))


def backward(params: DBlstmParams, x: LpsFeatures, target: Mask) -> dict[str, np.ndarray]:
	"""Exact gradient of ``loss_mse(forward(params, x), target)`` for every tensor, keyed like ``params.tensors``.

	The gradient is taken through the unclamped sigmoid output.
	"""
	features = _single_utterance(params, x)
	_, grads = loss_and_grads(params.tensors, params.config, features, target.data[None])
	return grads
