"""
DFT-based magnitude spectra of sequences and residuals.

Convention: forward transform uses e^(-i2πkn/N) with no scaling, the inverse
applies 1/N (``numpy.fft``). Spectra are DC-centered (fftshift) with
``freqs[k] = k/N - 0.5``.
"""

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from exceptions import DomainError, UnsupportedLengthError
from sequences import as_sequence

LOG = logging.getLogger(__name__)


@dataclass(frozen=True)
class Spectrum:
    freqs: np.ndarray
    mags: np.ndarray

    def __post_init__(self):
        if len(self.freqs) != len(self.mags):
            raise ValueError(
                f"freqs and mags differ in length: {len(self.freqs)} != {len(self.mags)}"
            )

    def __len__(self):
        return len(self.mags)


def is_power_of_two(n) -> bool:
    n = int(n)
    return n > 0 and (n & (n - 1)) == 0


def _check_length(n: int) -> None:
    if not is_power_of_two(n):
        raise UnsupportedLengthError(f"Transform length must be a power of two; got {n}")


def dft(seq) -> np.ndarray:
    """Forward DFT (radix-2 FFT), unnormalized."""
    seq = as_sequence(seq)
    _check_length(seq.size)
    return np.fft.fft(seq)


def idft(spectrum) -> np.ndarray:
    """Inverse DFT with the 1/N factor."""
    spectrum = as_sequence(spectrum)
    _check_length(spectrum.size)
    return np.fft.ifft(spectrum)


def relative_frequencies(n: int) -> np.ndarray:
    return np.arange(n) / n - 0.5


def magnitude_spectrum(seq, normalization: float = 1.0) -> Spectrum:
    """
    DC-centered magnitude spectrum scaled by ``normalization``.

    With a generated sequence and its own normalization, occupied bins read 1.0.
    """
    if normalization <= 0:
        raise DomainError(f"normalization must be positive; got {normalization}")
    mags = np.abs(np.fft.fftshift(dft(seq))) * normalization
    return Spectrum(relative_frequencies(mags.size), mags)


def moving_mean(values: Sequence[float], window: int) -> np.ndarray:
    """
    Centered moving average with shrinking windows at the edges.

    Index k averages ``values[max(0, k - (w-1)//2) : min(n-1, k + w//2) + 1]``.
    """
    if window < 1:
        raise DomainError(f"window must be >= 1; got {window}")
    values = np.asarray(values, dtype=np.float64)
    n = values.size
    if n == 0:
        return values.copy()
    idx = np.arange(n)
    lo = np.maximum(0, idx - (window - 1) // 2)
    hi = np.minimum(n - 1, idx + window // 2)
    csum = np.concatenate(([0.0], np.cumsum(values)))
    return (csum[hi + 1] - csum[lo]) / (hi - lo + 1)


def rap_transfer_magnitude(f, epsilon: float):
    """Single-pass residual transfer magnitude 1 / |1 + (1-ε)·e^(-i2πf)|."""
    if not 0 < epsilon <= 1:
        raise DomainError(f"epsilon must be in (0, 1]; got {epsilon}")
    f = np.asarray(f, dtype=np.float64)
    if np.any(np.abs(f) > 0.5):
        raise DomainError("relative frequency must lie in [-0.5, 0.5]")
    mag = 1.0 / np.abs(1.0 + (1.0 - epsilon) * np.exp(-2j * np.pi * f))
    return float(mag) if mag.ndim == 0 else mag


def rap_cascade_transfer_magnitude(f, epsilons: Sequence[float]):
    """Unclamped N-pass transfer magnitude: product of the per-pass magnitudes."""
    mag = np.ones_like(np.asarray(f, dtype=np.float64))
    for epsilon in epsilons:
        mag = mag * rap_transfer_magnitude(f, epsilon)
    return float(mag) if np.ndim(mag) == 0 else mag


def timecorr_transfer_magnitude(f, timecorr: complex):
    """Time-correlation residual transfer magnitude |1 - timecorr·e^(-i2πf)|."""
    f = np.asarray(f, dtype=np.float64)
    mag = np.abs(1.0 - timecorr * np.exp(-2j * np.pi * f))
    return float(mag) if mag.ndim == 0 else mag
