"""
warp-mask: Task-Aware Warped Masks for Speech Enhancement

Train a mask estimator once on an alpha-warped target, then pick the enhancement
strength per downstream task at test time with a single gamma.
"""

__version__ = '0.1.0'

# Import main components
from .audio.service import read_wav, write_wav
from .audio.views import Waveform
from .mask.service import oracle_training_mask, warp_mask
from .metrics.service import evaluate
from .neural.serialization import load_model, save_model
from .neural.service import train
from .neural.views import NetConfig, TrainConfig
from .pipeline.service import Enhancer, enhance, multi_gamma_enhance, oracle_enhance, sweep
from .utils import WarpMaskError

# Export main components
__all__ = [
	'Enhancer',
	'NetConfig',
	'TrainConfig',
	'WarpMaskError',
	'Waveform',
	'enhance',
	'evaluate',
	'load_model',
	'multi_gamma_enhance',
	'oracle_enhance',
	'oracle_training_mask',
	'read_wav',
	'save_model',
	'sweep',
	'train',
	'warp_mask',
]
