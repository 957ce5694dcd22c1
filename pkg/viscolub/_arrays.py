from __future__ import annotations

from typing import TypeAlias

import numpy as np
from numpy.typing import NDArray


FloatArray: TypeAlias = NDArray[np.float64]
Real: TypeAlias = float | FloatArray


def as_output(values: FloatArray) -> Real:
    """Unwrap 0-d results so scalar inputs give scalar outputs."""
    if values.ndim == 0:
        return float(values)
    return values
