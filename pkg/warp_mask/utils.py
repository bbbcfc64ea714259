import logging
import time
from collections.abc import Callable
from functools import wraps
from typing import ParamSpec, TypeVar

import numpy as np

logger = logging.getLogger(__name__)
R = TypeVar('R')
P = ParamSpec('P')

# Exit code used by the CLI for data errors (bad files, bad values, failed training)
DATA_ERROR_CODE = 2


def time_execution_sync(additional_text: str = '') -> Callable[[Callable[P, R]], Callable[P, R]]:
	def decorator(func: Callable[P, R]) -> Callable[P, R]:
		@wraps(func)
		def wrapper(*args: P.args, **kwargs: P.kwargs) -> R:
			start_time = time.time()
			result = func(*args, **kwargs)
			execution_time = time.time() - start_time
			# Only log if execution takes more than 0.25 seconds
			if execution_time > 0.25:
				logger.debug(f'⏳ {additional_text.strip("-")}() took {execution_time:.2f}s')
			return result

		return wrapper

	return decorator


class WarpMaskError(Exception):
	"""Base error for everything raised by warp-mask.

	``code`` is the process exit code the CLI reports for this error.
	"""

	def __init__(self, message: str, code: int = DATA_ERROR_CODE):
		self.code = code
		self.message = message
		super().__init__(message)


def readonly(array: np.ndarray) -> np.ndarray:
	"""Return a read-only version of *array*, copying it unless it is already frozen."""
	if not array.flags.writeable:
		return array
	array = array.copy()
	array.flags.writeable = False
	return array
