"""Small shared helpers."""

from __future__ import annotations

import math

import numpy as np


def lower_median(values) -> float:
    """Median that returns an element of the input.

    For an even number of values this is the lower of the two middle
    elements, not their mean.  Used for every fitness aggregation so that
    reported medians are always values that actually occurred.
    """
    vals = sorted(float(v) for v in values)
    if not vals:
        raise ValueError("lower_median of empty sequence")
    return vals[(len(vals) - 1) // 2]


def lower_median_ignore_nan(values) -> float:
    """lower_median over the non-NaN entries; NaN if none remain."""
    vals = [float(v) for v in values if not math.isnan(float(v))]
    if not vals:
        return float("nan")
    return lower_median(vals)


def clamp01(v: np.ndarray) -> np.ndarray:
    return np.clip(v, 0.0, 1.0)
