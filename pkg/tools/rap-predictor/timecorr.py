"""
Time-correlation prediction.

The unit-delay autocorrelation normalized by power serves as a one-tap
predictor coefficient: ``prediction[t] = timecorr * samp[t-1]``. Two modes:

* full sequence: one coefficient for the whole sequence, sent as side
  information (non-causal, two passes over the data);
* adaptive: a one-pole IIR estimate updated after every sample. Encoder and
  decoder both run the recurrence on reconstructed samples, so the decoder
  replays the encoder state exactly and only epsilon is side information.
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np
from constants import ADAPTIVE_DENOMINATOR_GUARD
from exceptions import DegenerateInputError, DomainError, MalformedStreamError
from numba import njit
from sequences import as_sequence

LOG = logging.getLogger(__name__)


@dataclass(frozen=True)
class TimeCorrMode:
    """Full-sequence mode when ``epsilon`` is None, adaptive otherwise."""

    epsilon: Optional[float] = None

    def __post_init__(self):
        if self.epsilon is not None and not 0 < self.epsilon < 1:
            raise DomainError(f"Adaptive epsilon must be in (0, 1); got {self.epsilon}")

    @classmethod
    def full(cls) -> "TimeCorrMode":
        return cls(None)

    @classmethod
    def adaptive(cls, epsilon: float) -> "TimeCorrMode":
        return cls(float(epsilon))

    @property
    def is_adaptive(self) -> bool:
        return self.epsilon is not None

    @property
    def label(self) -> str:
        return "adaptive" if self.is_adaptive else "full"


@dataclass(frozen=True)
class TimeCorrStream:
    residuals: np.ndarray
    mode: TimeCorrMode
    timecorr: Optional[complex] = None

    def __len__(self):
        return len(self.residuals)


@njit(cache=True)
def _adaptive_update(pred, cur, prev, epsilon, guard):
    return (1.0 - epsilon) * pred + epsilon * (cur * prev.conjugate()) / (
        (prev * prev.conjugate()).real + guard
    )


@njit(cache=True)
def _adaptive_encode(seq, epsilon, guard):
    # closed loop: the estimate tracks reconstructed samples, as the decoder sees them
    n = seq.shape[0]
    residuals = np.empty(n, dtype=np.complex128)
    residuals[0] = seq[0]
    pred = 0j
    prev = seq[0]
    for i in range(1, n):
        predicted = pred * prev
        residuals[i] = seq[i] - predicted
        cur = residuals[i] + predicted
        pred = _adaptive_update(pred, cur, prev, epsilon, guard)
        prev = cur
    return residuals


@njit(cache=True)
def _adaptive_decode(residuals, epsilon, guard):
    n = residuals.shape[0]
    seq = np.empty(n, dtype=np.complex128)
    seq[0] = residuals[0]
    pred = 0j
    prev = seq[0]
    for i in range(1, n):
        predicted = pred * prev
        cur = residuals[i] + predicted
        seq[i] = cur
        pred = _adaptive_update(pred, cur, prev, epsilon, guard)
        prev = cur
    return seq


@njit(cache=True)
def _full_decode(residuals, timecorr):
    n = residuals.shape[0]
    seq = np.empty(n, dtype=np.complex128)
    seq[0] = residuals[0]
    for i in range(1, n):
        seq[i] = residuals[i] + timecorr * seq[i - 1]
    return seq


def full_time_correlation(seq) -> complex:
    """Σ samp[t]·conj(samp[t-1]) / Σ |samp[t-1]|² over t = 1..len-1."""
    seq = as_sequence(seq, min_length=2)
    prev, cur = seq[:-1], seq[1:]
    denominator = np.vdot(prev, prev).real
    if denominator == 0.0:
        raise DegenerateInputError(
            "Time correlation undefined: all samples before the last are zero"
        )
    return complex(np.vdot(prev, cur) / denominator)


def timecorr_rotation(timecorr: complex) -> complex:
    """Unit phasor timecorr / |timecorr|, the per-sample rotation of the signal energy."""
    magnitude = abs(timecorr)
    if magnitude == 0.0:
        raise DegenerateInputError("Cannot derive a rotation from a zero time correlation")
    return complex(timecorr / magnitude)


def tc_encode(seq, mode: TimeCorrMode = TimeCorrMode.full()) -> TimeCorrStream:
    seq = as_sequence(seq)
    if mode.is_adaptive:
        residuals = _adaptive_encode(seq, mode.epsilon, ADAPTIVE_DENOMINATOR_GUARD)
        LOG.debug("Adaptive time correlation (eps=%g) on %d samples", mode.epsilon, seq.size)
        return TimeCorrStream(residuals, mode)

    residuals = seq.copy()
    if seq.size < 2:
        # Nothing to predict; keep the stream decodable.
        return TimeCorrStream(residuals, mode, 0j)
    timecorr = full_time_correlation(seq)
    residuals[1:] = seq[1:] - timecorr * seq[:-1]
    LOG.debug("Full time correlation %.6f%+.6fj on %d samples", timecorr.real, timecorr.imag, seq.size)
    return TimeCorrStream(residuals, mode, timecorr)


def tc_decode(stream: TimeCorrStream) -> np.ndarray:
    residuals = as_sequence(stream.residuals)
    if stream.mode.is_adaptive:
        return _adaptive_decode(residuals, stream.mode.epsilon, ADAPTIVE_DENOMINATOR_GUARD)
    if stream.timecorr is None:
        raise MalformedStreamError("Full-sequence stream is missing its time correlation")
    return _full_decode(residuals, complex(stream.timecorr))
