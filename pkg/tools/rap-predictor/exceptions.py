class RapError(ValueError):
    """Base class for every error raised by the rap-predictor tool."""


class DegenerateInputError(RapError):
    """Input carries no usable energy (all zero) or is too short."""


class TooManySlotsError(RapError):
    """Requested more positive frequency slots than half the sequence length."""


class UnsupportedLengthError(RapError):
    """Transform length is not a power of two."""


class MalformedStreamError(RapError):
    """Residual stream side information is missing or inconsistent."""


class DomainError(RapError):
    """Argument outside the mathematical domain of an estimator."""


class MalformedFileError(RapError):
    """IQ or meta file cannot be parsed."""


class ConfigError(RapError):
    """Experiment configuration is invalid."""
