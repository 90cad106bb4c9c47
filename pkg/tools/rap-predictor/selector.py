"""
Residual metrics, compression-factor estimate and method selection.

Two selection policies:

* by bandwidth: fixed bands of occupied bandwidth map to a method
  (time correlation below 8%, 3-pass RAP up to 74%, 1-pass RAP up to 85%,
  bypass above);
* pick best: encode with every candidate and keep the smallest mean residual
  magnitude. With ``bypass_above`` set, predictors whose residual stays above
  that fraction of the original magnitude are not worth their cost and the
  sequence is bypassed.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from codec import ALL_METHODS, BYPASS, TIMECORR, MethodKind, Stream, encode
from constants import (
    BYPASS_RESIDUAL_FRACTION,
    DEFAULT_COMPONENT_BITS,
    OCCUPANCY_PEAK_FRACTION,
    RAP1_BAND_LIMIT,
    RAP3_BAND_LIMIT,
    TIMECORR_BAND_LIMIT,
)
from exceptions import DegenerateInputError, DomainError
from sequences import as_sequence, mean_abs
from spectrum import dft

LOG = logging.getLogger(__name__)


@dataclass(frozen=True)
class SelectionPolicy:
    kind: str
    bw_fraction: Optional[float] = None
    bypass_above: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("pick_best", "by_bandwidth"):
            raise DomainError(f"Unknown selection policy '{self.kind}'")
        if self.bw_fraction is not None and not 0 <= self.bw_fraction <= 1:
            raise DomainError(f"bw_fraction must be in [0, 1]; got {self.bw_fraction}")

    @classmethod
    def pick_best(cls, bypass_above: Optional[float] = BYPASS_RESIDUAL_FRACTION) -> "SelectionPolicy":
        return cls("pick_best", bypass_above=bypass_above)

    @classmethod
    def by_bandwidth(cls, bw_fraction: Optional[float] = None) -> "SelectionPolicy":
        """Band policy; the bandwidth is estimated from the sequence when not given."""
        return cls("by_bandwidth", bw_fraction=bw_fraction)


@dataclass(frozen=True)
class Selection:
    method: MethodKind
    stream: Stream
    mean_abs: float


def estimate_compression_factor(
    amplitude_ratio: float,
    bits_per_component: int = DEFAULT_COMPONENT_BITS,
) -> float:
    """
    Compressed size over original size when residual amplitudes shrink by ``amplitude_ratio``.

    Each halving of the amplitude saves one bit per component:
    ``(bits + log2(ratio)) / bits``, kept within ``[1/bits, 1]``.
    """
    if not amplitude_ratio > 0:
        raise DomainError(f"amplitude_ratio must be positive; got {amplitude_ratio}")
    if bits_per_component < 2:
        raise DomainError(f"bits_per_component must be >= 2; got {bits_per_component}")
    factor = (bits_per_component + math.log2(amplitude_ratio)) / bits_per_component
    return min(1.0, max(1.0 / bits_per_component, factor))


def estimate_bandwidth(seq) -> float:
    """Fraction of DFT bins whose magnitude exceeds 10% of the peak bin."""
    mags = np.abs(dft(seq))
    peak = mags.max()
    if peak == 0.0:
        raise DegenerateInputError("Cannot estimate the bandwidth of an all-zero sequence")
    return float(np.count_nonzero(mags > OCCUPANCY_PEAK_FRACTION * peak) / mags.size)


def select_by_bandwidth(bw_fraction: float) -> MethodKind:
    if not 0 <= bw_fraction <= 1:
        raise DomainError(f"bw_fraction must be in [0, 1]; got {bw_fraction}")
    if bw_fraction < TIMECORR_BAND_LIMIT:
        return TIMECORR
    if bw_fraction <= RAP3_BAND_LIMIT:
        return MethodKind.rap(3)
    if bw_fraction <= RAP1_BAND_LIMIT:
        return MethodKind.rap(1)
    return BYPASS


def pick_best(
    seq,
    candidates: Sequence[MethodKind] = ALL_METHODS,
    bypass_above: Optional[float] = None,
) -> Selection:
    """
    Encode ``seq`` with every candidate and return the one with the smallest mean residual.

    Ties go to the earlier candidate. When ``bypass_above`` is set, predictive
    candidates whose mean residual exceeds ``bypass_above`` times the input's
    mean magnitude are discarded; if none remains, Bypass is returned.
    """
    if not candidates:
        raise DomainError("pick_best needs at least one candidate")
    seq = as_sequence(seq)
    limit = None if bypass_above is None else bypass_above * mean_abs(seq)

    best = None
    for method in candidates:
        stream = encode(seq, method)
        score = mean_abs(stream.residuals)
        LOG.debug("Candidate %s: mean |residual| = %.6f", method, score)
        if limit is not None and method != BYPASS and score > limit:
            continue
        if best is None or score < best.mean_abs:
            best = Selection(method, stream, score)

    if best is None:
        stream = encode(seq, BYPASS)
        best = Selection(BYPASS, stream, mean_abs(stream.residuals))
    LOG.info("Picked %s (mean |residual| = %.6f)", best.method, best.mean_abs)
    return best


def select_method(seq, policy: SelectionPolicy) -> Selection:
    if policy.kind == "pick_best":
        return pick_best(seq, bypass_above=policy.bypass_above)
    bw = policy.bw_fraction if policy.bw_fraction is not None else estimate_bandwidth(seq)
    method = select_by_bandwidth(bw)
    stream = encode(seq, method)
    LOG.info("Bandwidth %.4f selects %s", bw, method)
    return Selection(method, stream, mean_abs(stream.residuals))
