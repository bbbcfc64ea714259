from warp_mask.pipeline.service import (
	Enhancer,
	alpha_sweep,
	enhance,
	multi_gamma_enhance,
	oracle_enhance,
	select_best_gamma,
	sweep,
	sweep_csv,
	write_features,
	write_sweep_csv,
)
from warp_mask.pipeline.views import DEFAULT_GAMMAS, TASK_PRESETS, ConfigError, RunConfig, SweepRow

__all__ = [
	'DEFAULT_GAMMAS',
	'TASK_PRESETS',
	'ConfigError',
	'Enhancer',
	'RunConfig',
	'SweepRow',
	'alpha_sweep',
	'enhance',
	'multi_gamma_enhance',
	'oracle_enhance',
	'select_best_gamma',
	'sweep',
	'sweep_csv',
	'write_features',
	'write_sweep_csv',
]
