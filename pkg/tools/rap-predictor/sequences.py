"""
Complex sample sequences shared by every predictor.

A sequence is a 1-D ``numpy`` array of ``complex128`` with at least one
element. ``as_sequence`` is the single ingestion point: it copies, widens to
64-bit and rejects NaN/Inf, since every downstream recurrence is
infinite-impulse and a single bad sample would poison the whole stream.
"""

import logging
from enum import Enum
from typing import Tuple

import numpy as np
from exceptions import DegenerateInputError

LOG = logging.getLogger(__name__)


class NormalizationMode(str, Enum):
    MEAN_MAGNITUDE = "mag"
    RMS_POWER = "power"


def as_sequence(values, min_length: int = 1) -> np.ndarray:
    """Convert array-like ``values`` to a validated complex128 sequence."""
    seq = np.array(values, dtype=np.complex128).reshape(-1)
    if seq.size < min_length:
        raise DegenerateInputError(
            f"Sequence needs at least {min_length} sample(s); got {seq.size}"
        )
    if not np.all(np.isfinite(seq)):
        bad = int(np.count_nonzero(~np.isfinite(seq)))
        raise DegenerateInputError(f"Sequence contains {bad} non-finite sample(s)")
    return seq


def mean_abs(seq) -> float:
    """Arithmetic mean of the sample magnitudes."""
    seq = as_sequence(seq)
    return float(np.mean(np.abs(seq)))


def rms(seq) -> float:
    seq = as_sequence(seq)
    return float(np.sqrt(np.mean((seq * np.conj(seq)).real)))


def normalize(seq, mode: NormalizationMode) -> Tuple[np.ndarray, float]:
    """
    Scale ``seq`` to unit mean magnitude or unit RMS power.

    Returns the scaled sequence and the divisor that was applied, so callers
    can multiply spectra back to the original scale.
    """
    seq = as_sequence(seq)
    mode = NormalizationMode(mode)
    if mode is NormalizationMode.MEAN_MAGNITUDE:
        normalization = mean_abs(seq)
    else:
        normalization = rms(seq)
    if normalization == 0.0:
        raise DegenerateInputError("Cannot normalize an all-zero sequence")
    LOG.debug("Normalized %d samples (%s) by %.6g", seq.size, mode.value, normalization)
    return seq / normalization, normalization
