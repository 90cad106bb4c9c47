"""
Band-limited test sequences with unit-magnitude, random-phase frequency
components centered on DC.

Randomness comes from ``numpy.random.default_rng(seed)`` (PCG64), so the same
``GeneratorSpec`` always yields a bit-identical sequence on a given numpy
version.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from exceptions import DomainError, TooManySlotsError, UnsupportedLengthError
from sequences import NormalizationMode, normalize
from spectrum import idft, is_power_of_two

LOG = logging.getLogger(__name__)


@dataclass(frozen=True)
class GeneratorSpec:
    frac_pos_buckets: float
    seq_len: int
    norm_mode: NormalizationMode = NormalizationMode.MEAN_MAGNITUDE
    seed: int = 0

    def __post_init__(self):
        if not is_power_of_two(self.seq_len):
            raise UnsupportedLengthError(
                f"seq_len must be a power of two; got {self.seq_len}"
            )
        if self.frac_pos_buckets < 0:
            raise DomainError(
                f"frac_pos_buckets must be >= 0; got {self.frac_pos_buckets}"
            )
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError(f"seed must be a 64-bit unsigned integer; got {self.seed}")
        object.__setattr__(self, "norm_mode", NormalizationMode(self.norm_mode))

    @classmethod
    def for_ratio(cls, ratio: float, seq_len: int, norm_mode=NormalizationMode.MEAN_MAGNITUDE, seed: int = 0):
        """Spec for a signal occupying ``ratio`` of the sampling bandwidth."""
        return cls(ratio / 2, seq_len, norm_mode, seed)


def occupied_bins(frac_pos_buckets: float, seq_len: int) -> Tuple[int, int]:
    """Number of positive and negative frequency slots filled by the generator."""
    if frac_pos_buckets == 0:
        return 1, 0
    num_pos = int(np.floor(frac_pos_buckets * seq_len))
    return num_pos, num_pos


def generate_spectrum(spec: GeneratorSpec) -> np.ndarray:
    """Frequency-domain array: unit phasors in occupied bins, zeros elsewhere."""
    num_pos, num_neg = occupied_bins(spec.frac_pos_buckets, spec.seq_len)
    if num_pos > spec.seq_len / 2:
        raise TooManySlotsError(
            f"Too many positive frequency slots specified: {num_pos} > {spec.seq_len // 2}"
        )
    rng = np.random.default_rng(spec.seed)
    samp_fd = np.zeros(spec.seq_len, dtype=np.complex128)
    samp_fd[1:num_pos + 1] = np.exp(1j * 2 * np.pi * rng.random(num_pos))
    if num_neg:
        samp_fd[spec.seq_len - num_neg:] = np.exp(1j * 2 * np.pi * rng.random(num_neg))
    return samp_fd


def generate(spec: GeneratorSpec) -> Tuple[np.ndarray, float]:
    """
    Generate a normalized time-domain sequence.

    Returns ``(sequence, normalization)``; multiplying the sequence's DFT by
    ``normalization`` gives back unit-magnitude occupied bins.
    """
    samp_td = idft(generate_spectrum(spec))
    seq, normalization = normalize(samp_td, spec.norm_mode)
    LOG.debug(
        "Generated %d samples, frac_pos_buckets=%.4f, seed=%d",
        spec.seq_len,
        spec.frac_pos_buckets,
        spec.seed,
    )
    return seq, normalization


def generate_for_ratio(
    ratio: float,
    seq_len: int,
    norm_mode=NormalizationMode.MEAN_MAGNITUDE,
    seed: int = 0,
) -> Tuple[np.ndarray, float]:
    return generate(GeneratorSpec.for_ratio(ratio, seq_len, norm_mode, seed))
