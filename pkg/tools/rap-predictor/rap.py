"""
Residual-as-prediction (RAP) encoder and its exact inverse.

Each pass predicts the next value of its input with its own previous
residual, damped by (1 - epsilon) and clamped to a magnitude threshold:

    residual[t]   = input[t] - prediction[t]
    prediction[t+1] = clamp((1 - epsilon) * residual[t], threshold)

An N-pass stream feeds pass p's residual into pass p+1 as its input. Sample 0
of every pass is the original first sample (the starter value). Pass 1's
prediction starts at that starter value, deeper passes start at zero.

Post-processing of a prediction is always damp -> clamp -> rotate -> quantize,
identically in encoder and decoder.

Thresholds are absolute amplitudes. The published sets assume input
normalized to mean magnitude 1.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from constants import PUBLISHED_RAP_CONFIGS, SATURATION_WARNING_RATE
from exceptions import DomainError, MalformedStreamError
from numba import njit
from sequences import as_sequence

LOG = logging.getLogger(__name__)

ROTATION_TOLERANCE = 1e-12


@dataclass(frozen=True)
class RapConfig:
    epsilons: Tuple[float, ...]
    thresholds: Tuple[float, ...]
    rotation: Optional[complex] = None
    quant_step: Optional[float] = None
    init_prediction_override: Optional[complex] = None

    def __post_init__(self):
        epsilons = tuple(float(e) for e in self.epsilons)
        thresholds = tuple(float(s) for s in self.thresholds)
        object.__setattr__(self, "epsilons", epsilons)
        object.__setattr__(self, "thresholds", thresholds)
        if len(epsilons) != len(thresholds):
            raise MalformedStreamError(
                f"Need one threshold per epsilon; got {len(epsilons)} epsilons "
                f"and {len(thresholds)} thresholds"
            )
        if not epsilons:
            raise MalformedStreamError("At least one pass is required")
        for eps in epsilons:
            if not 0 <= eps < 1:
                raise DomainError(f"epsilon must be in [0, 1); got {eps}")
        for sat in thresholds:
            if not sat > 0:
                raise DomainError(f"threshold must be positive; got {sat}")
        if self.rotation is not None:
            rotation = complex(self.rotation)
            if abs(abs(rotation) - 1.0) > ROTATION_TOLERANCE:
                raise DomainError(f"rotation must have unit magnitude; got |{rotation}| = {abs(rotation)}")
            object.__setattr__(self, "rotation", rotation)
        if self.quant_step is not None:
            if not self.quant_step > 0:
                raise DomainError(f"quant_step must be positive; got {self.quant_step}")
            object.__setattr__(self, "quant_step", float(self.quant_step))
        if self.init_prediction_override is not None:
            object.__setattr__(self, "init_prediction_override", complex(self.init_prediction_override))

    @property
    def passes(self) -> int:
        return len(self.epsilons)

    @classmethod
    def published(cls, passes: int, **kwargs) -> "RapConfig":
        """One of the published 1-, 2- or 3-pass parameter sets."""
        if passes not in PUBLISHED_RAP_CONFIGS:
            raise DomainError(
                f"No published configuration for {passes} passes; "
                f"choose from {sorted(PUBLISHED_RAP_CONFIGS)}"
            )
        epsilons, thresholds = PUBLISHED_RAP_CONFIGS[passes]
        return cls(tuple(epsilons), tuple(thresholds), **kwargs)

    def _kernel_args(self, starter: complex):
        init = starter if self.init_prediction_override is None else self.init_prediction_override
        return (
            1.0 - np.asarray(self.epsilons, dtype=np.float64),
            np.asarray(self.thresholds, dtype=np.float64),
            complex(init),
            complex(self.rotation) if self.rotation is not None else 1 + 0j,
            self.rotation is not None,
            self.quant_step if self.quant_step is not None else 0.0,
        )


@dataclass(frozen=True)
class RapStream:
    residuals: np.ndarray
    config: RapConfig

    def __len__(self):
        return len(self.residuals)


@njit(cache=True)
def _quantize_component(x, step):
    q = math.floor(abs(x) / step + 0.5) * step
    return math.copysign(q, x)


@njit(cache=True)
def _clamp(z, threshold):
    mag = abs(z)
    if mag > threshold:
        return z * threshold / mag, 1
    return z, 0


@njit(cache=True)
def _next_prediction(value, damping, threshold, rotation, rotate, quant_step):
    pred, hit = _clamp(value * damping, threshold)
    if rotate:
        pred = pred * rotation
    if quant_step > 0.0:
        pred = complex(
            _quantize_component(pred.real, quant_step),
            _quantize_component(pred.imag, quant_step),
        )
    return pred, hit


@njit(cache=True)
def _rap_encode(seq, dampings, thresholds, init_pred, rotation, rotate, quant_step):
    n = seq.shape[0]
    num_pass = dampings.shape[0]
    residual_pass = np.empty((num_pass + 1, n), dtype=np.complex128)
    residual_pass[0, :] = seq
    residual_pass[:, 0] = seq[0]
    predictions = np.zeros(num_pass, dtype=np.complex128)
    predictions[0] = init_pred
    clamped = np.zeros(num_pass, dtype=np.int64)
    for i in range(1, n):
        for p in range(num_pass):
            tmp = residual_pass[p, i] - predictions[p]
            residual_pass[p + 1, i] = tmp
            pred, hit = _next_prediction(
                tmp, dampings[p], thresholds[p], rotation, rotate, quant_step
            )
            predictions[p] = pred
            clamped[p] += hit
    return residual_pass, clamped


@njit(cache=True)
def _rap_decode(residuals, dampings, thresholds, init_pred, rotation, rotate, quant_step):
    n = residuals.shape[0]
    num_pass = dampings.shape[0]
    seq = np.empty(n, dtype=np.complex128)
    seq[0] = residuals[0]
    predictions = np.zeros(num_pass, dtype=np.complex128)
    predictions[0] = init_pred
    for i in range(1, n):
        v = residuals[i]
        for p in range(num_pass - 1, -1, -1):
            u = v + predictions[p]
            pred, hit = _next_prediction(
                v, dampings[p], thresholds[p], rotation, rotate, quant_step
            )
            predictions[p] = pred
            v = u
        seq[i] = v
    return seq


def clamp_magnitude(z: complex, threshold: float) -> complex:
    """Scale ``z`` down to magnitude ``threshold`` if it exceeds it; phase is kept."""
    if not threshold > 0:
        raise DomainError(f"threshold must be positive; got {threshold}")
    clamped, _ = _clamp(complex(z), float(threshold))
    return complex(clamped)


def quantize(z: complex, step: float) -> complex:
    """Round real and imaginary parts to the nearest multiple of ``step``, ties away from zero."""
    if not step > 0:
        raise DomainError(f"step must be positive; got {step}")
    z = complex(z)
    return complex(_quantize_component(z.real, step), _quantize_component(z.imag, step))


def _encode(seq: np.ndarray, config: RapConfig):
    residual_pass, clamped = _rap_encode(seq, *config._kernel_args(seq[0]))
    if seq.size > 1:
        rates = [c / (seq.size - 1) for c in clamped]
        LOG.debug(
            "RAP %d-pass on %d samples, clamp rate per pass: %s",
            config.passes, seq.size, ", ".join(f"{r:.2%}" for r in rates),
        )
        if max(rates) > SATURATION_WARNING_RATE:
            LOG.warning(
                "%.0f%% of predictions clamped; thresholds %s may be too low for this input",
                100 * max(rates), config.thresholds,
            )
    return residual_pass, clamped


def rap_encode(seq, config: RapConfig) -> RapStream:
    return RapStream(rap_encode_passes(seq, config)[-1].copy(), config)


def rap_encode_passes(seq, config: RapConfig) -> np.ndarray:
    """Every pass's residual sequence; row 0 is the input, row N the transmitted residual."""
    seq = as_sequence(seq)
    residual_pass, _ = _encode(seq, config)
    return residual_pass


def saturation_rate(seq, config: RapConfig) -> np.ndarray:
    """Fraction of predictions clamped by each pass's threshold."""
    seq = as_sequence(seq)
    _, clamped = _encode(seq, config)
    return clamped / max(1, seq.size - 1)


def rap_decode(stream: RapStream) -> np.ndarray:
    config = stream.config
    residuals = as_sequence(stream.residuals)
    return _rap_decode(residuals, *config._kernel_args(residuals[0]))