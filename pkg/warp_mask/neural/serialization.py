"""Model file: b'WARPMASK1', header <u32 f, u32 n, u32 h, u32 layers, f64 alpha_trained>,
then every tensor in declaration order as little-endian float64."""

import logging
import struct
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from warp_mask.audio.views import IoFailure
from warp_mask.neural.views import DBlstmParams, ModelFormatError, NetConfig

logger = logging.getLogger(__name__)

MODEL_MAGIC = b'WARPMASK1'
MODEL_HEADER = struct.Struct('<IIIId')


def save_model(path: str | Path, params: DBlstmParams) -> None:
	cfg = params.config
	chunks = [
		MODEL_MAGIC,
		MODEL_HEADER.pack(cfg.feat_dim, cfg.context, cfg.hidden, cfg.num_blstm_layers, params.alpha_trained),
	]
	chunks.extend(params.tensors[name].astype('<f8').tobytes(order='C') for name in cfg.param_shapes())
	try:
		Path(path).write_bytes(b''.join(chunks))
	except OSError as e:
		raise IoFailure(f'{path}: cannot write model ({e})') from e
	logger.info(f'💾 Saved model ({params.num_weights} weights, alpha={params.alpha_trained}) to {path}')


def load_model(path: str | Path) -> DBlstmParams:
	try:
		raw = Path(path).read_bytes()
	except OSError as e:
		raise ModelFormatError(f'{path}: cannot read model ({e})') from e
	offset = len(MODEL_MAGIC) + MODEL_HEADER.size
	if len(raw) < offset or raw[: len(MODEL_MAGIC)] != MODEL_MAGIC:
		raise ModelFormatError(f'{path}: not a warp-mask model file')

	feat_dim, context, hidden, layers, alpha_trained = MODEL_HEADER.unpack_from(raw, len(MODEL_MAGIC))
	try:
		cfg = NetConfig(feat_dim=feat_dim, context=context, hidden=hidden, num_blstm_layers=layers)
	except ValidationError as e:
		raise ModelFormatError(f'{path}: invalid header: {e}') from e

	shapes = cfg.param_shapes()
	expected = offset + 8 * sum(int(np.prod(s)) for s in shapes.values())
	if len(raw) != expected:
		raise ModelFormatError(f'{path}: expected {expected} bytes for this header, found {len(raw)}')

	tensors = {}
	for name, shape in shapes.items():
		count = int(np.prod(shape))
		tensors[name] = np.frombuffer(raw, dtype='<f8', count=count, offset=offset).reshape(shape).astype(np.float64)
		offset += 8 * count

	try:
		return DBlstmParams(config=cfg, alpha_trained=alpha_trained, tensors=tensors)
	except ValidationError as e:
		raise ModelFormatError(f'{path}: {e}') from e
