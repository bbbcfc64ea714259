from collections.abc import Mapping

import numpy as np

from warp_mask.mask.views import ShapeMismatch
from warp_mask.neural.views import AdamState


def adam_step(
	params: Mapping[str, np.ndarray],
	grads: Mapping[str, np.ndarray],
	state: AdamState,
	lr: float,
	beta1: float = 0.9,
	beta2: float = 0.999,
	eps: float = 1e-8,
) -> tuple[dict[str, np.ndarray], AdamState]:
	"""One bias-corrected Adam update. Inputs are left untouched; new tensors and state are returned."""
	if set(params) != set(grads) or set(params) != set(state.m):
		raise ShapeMismatch('params, grads and optimizer state must hold the same tensors')

	step = state.step + 1
	bc1 = 1.0 - beta1**step
	bc2 = 1.0 - beta2**step

	new_params, new_m, new_v = {}, {}, {}
	for name, p in params.items():
		g = grads[name]
		if g.shape != p.shape or state.m[name].shape != p.shape:
			raise ShapeMismatch(f'{name}: param {p.shape}, grad {g.shape}, moment {state.m[name].shape}')
		m = beta1 * state.m[name] + (1.0 - beta1) * g
		v = beta2 * state.v[name] + (1.0 - beta2) * (g * g)
		new_params[name] = p - lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
		new_m[name] = m
		new_v[name] = v

	return new_params, AdamState(m=new_m, v=new_v, step=step)
