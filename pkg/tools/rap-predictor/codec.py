import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from exceptions import DomainError, MalformedStreamError
from rap import RapConfig, RapStream, rap_decode, rap_encode
from sequences import as_sequence
from spectrum import rap_cascade_transfer_magnitude, timecorr_transfer_magnitude
from timecorr import TimeCorrMode, TimeCorrStream, tc_decode, tc_encode

LOG = logging.getLogger(__name__)

_KINDS = ("bypass", "timecorr", "rap")


@dataclass(frozen=True)
class MethodKind:
    kind: str
    passes: int = 0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise DomainError(f"Unknown method kind '{self.kind}'. Valid choices: {', '.join(_KINDS)}")
        if self.kind == "rap" and self.passes < 1:
            raise DomainError(f"RAP needs at least one pass; got {self.passes}")
        if self.kind != "rap" and self.passes:
            raise DomainError(f"'{self.kind}' takes no pass count")

    @classmethod
    def rap(cls, passes: int) -> "MethodKind":
        return cls("rap", passes)

    @classmethod
    def from_label(cls, label: str) -> "MethodKind":
        label = label.strip().lower()
        if label.startswith("rap") and label[3:].isdigit():
            return cls.rap(int(label[3:]))
        return cls(label)

    @property
    def label(self) -> str:
        return f"rap{self.passes}" if self.kind == "rap" else self.kind

    def __str__(self):
        return self.label


BYPASS = MethodKind("bypass")
TIMECORR = MethodKind("timecorr")
ALL_METHODS = (BYPASS, TIMECORR, MethodKind.rap(1), MethodKind.rap(2), MethodKind.rap(3))


@dataclass(frozen=True)
class BypassStream:
    """No prediction: the residual sequence is the input itself."""

    residuals: np.ndarray

    def __len__(self):
        return len(self.residuals)


Stream = Union[BypassStream, TimeCorrStream, RapStream]


def encode(
    seq,
    method: MethodKind,
    rap_config: Optional[RapConfig] = None,
    tc_mode: Optional[TimeCorrMode] = None,
) -> Stream:
    """Encode ``seq`` with ``method``; RAP uses the published set unless ``rap_config`` is given."""
    seq = as_sequence(seq)
    if method.kind == "bypass":
        return BypassStream(seq.copy())
    if method.kind == "timecorr":
        return tc_encode(seq, tc_mode or TimeCorrMode.full())
    config = rap_config or RapConfig.published(method.passes)
    if config.passes != method.passes:
        raise MalformedStreamError(
            f"Method {method} does not match a {config.passes}-pass configuration"
        )
    return rap_encode(seq, config)


def decode(stream: Stream) -> np.ndarray:
    if isinstance(stream, BypassStream):
        return as_sequence(stream.residuals)
    if isinstance(stream, TimeCorrStream):
        return tc_decode(stream)
    if isinstance(stream, RapStream):
        return rap_decode(stream)
    raise MalformedStreamError(f"Unsupported stream type: {type(stream).__name__}")


def stream_method(stream: Stream) -> MethodKind:
    if isinstance(stream, BypassStream):
        return BYPASS
    if isinstance(stream, TimeCorrStream):
        return TIMECORR
    if isinstance(stream, RapStream):
        return MethodKind.rap(stream.config.passes)
    raise MalformedStreamError(f"Unsupported stream type: {type(stream).__name__}")


def transfer_magnitude(stream: Stream, freqs) -> np.ndarray:
    """
    Linear-model residual/input magnitude ratio of ``stream``'s predictor at ``freqs``.

    Clamping and quantization are ignored. A RAP rotation by phase θ shifts the
    response by θ/2π. Adaptive time correlation has no fixed response.
    """
    freqs = np.asarray(freqs, dtype=np.float64)
    if isinstance(stream, BypassStream):
        return np.ones_like(freqs)
    if isinstance(stream, TimeCorrStream):
        if stream.mode.is_adaptive:
            raise DomainError("Adaptive time correlation has no fixed transfer function")
        return np.asarray(timecorr_transfer_magnitude(freqs, complex(stream.timecorr)))
    if isinstance(stream, RapStream):
        config = stream.config
        if config.rotation is not None:
            shift = np.angle(config.rotation) / (2 * np.pi)
            freqs = np.mod(freqs - shift + 0.5, 1.0) - 0.5
        return np.asarray(rap_cascade_transfer_magnitude(freqs, config.epsilons))
    raise MalformedStreamError(f"Unsupported stream type: {type(stream).__name__}")
