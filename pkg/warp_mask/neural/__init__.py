from warp_mask.neural.network import backward, forward, init_params, loss_mse, normalize_features
from warp_mask.neural.optimizer import adam_step
from warp_mask.neural.serialization import load_model, save_model
from warp_mask.neural.service import Trainer, train
from warp_mask.neural.views import (
	AdamState,
	DBlstmParams,
	EmptyManifest,
	EpochRecord,
	ModelFormatError,
	NetConfig,
	NonFiniteLoss,
	TrainConfig,
	TrainHistory,
)

__all__ = [
	'AdamState',
	'DBlstmParams',
	'EmptyManifest',
	'EpochRecord',
	'ModelFormatError',
	'NetConfig',
	'NonFiniteLoss',
	'TrainConfig',
	'TrainHistory',
	'Trainer',
	'adam_step',
	'backward',
	'forward',
	'init_params',
	'load_model',
	'loss_mse',
	'normalize_features',
	'save_model',
	'train',
]
