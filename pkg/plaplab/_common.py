"""
.. codeauthor:: Tsuyoshi Hombashi <tsuyoshi.hombashi@gmail.com>
"""

import math
from typing import Final, Union

import numpy as np
import numpy.typing as npt


FloatArray = npt.NDArray[np.float64]
FloatOrArray = Union[float, FloatArray]

INF: Final = math.inf

# probe ladder of the asymptotic classifiers: s = +-10^k
PROBE_EXPONENTS: Final = (1, 2, 3, 4, 5, 6)


def as_float_array(value: "npt.ArrayLike") -> FloatArray:
    return np.asarray(value, dtype=np.float64)


def to_output(value: FloatArray, is_scalar: bool) -> FloatOrArray:
    if is_scalar:
        return float(value)

    return value


def format_real(value: float) -> str:
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"

    return format(value, ".12g")


def format_index(value: Union[int, float]) -> str:
    if isinstance(value, float) and math.isinf(value):
        return "inf"

    return str(int(value))
