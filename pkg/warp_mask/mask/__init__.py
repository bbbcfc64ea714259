from warp_mask.mask.service import (
	apply_mask,
	apply_mask_lps,
	energy_ratio,
	oracle_irm,
	oracle_test_mask,
	oracle_training_mask,
	read_mask,
	warp_mask,
	write_mask,
)
from warp_mask.mask.views import MASK_FLOOR, InvalidWarp, Mask, MaskFormatError, MaskKind, ShapeMismatch, WarpSpec

__all__ = [
	'MASK_FLOOR',
	'InvalidWarp',
	'Mask',
	'MaskFormatError',
	'MaskKind',
	'ShapeMismatch',
	'WarpSpec',
	'apply_mask',
	'apply_mask_lps',
	'energy_ratio',
	'oracle_irm',
	'oracle_test_mask',
	'oracle_training_mask',
	'read_mask',
	'warp_mask',
	'write_mask',
]
