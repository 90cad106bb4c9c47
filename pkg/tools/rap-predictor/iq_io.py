"""
IQ sample files and the residual meta sidecar.

Sample formats:

* ``cf32``: interleaved little-endian float32 pairs, I then Q, no header;
* ``csv``: two numeric columns with the header ``re,im``.

The meta sidecar is UTF-8 text, one ``key=value`` per line, carrying all the
side information a decoder needs (method, per-pass epsilons and thresholds,
rotation phase, quantization step, time correlation). Blank lines and lines
starting with ``#`` are ignored; unknown keys are rejected.
"""

import logging
import math
import re
from pathlib import Path
from typing import Dict, Optional

import numpy as np
import pandas as pd
from codec import BypassStream, MethodKind, Stream, stream_method
from constants import (
    CF32_FORMAT,
    CSV_FORMAT,
    CSV_IQ_COLUMNS,
    IQ_FORMATS,
    META_INDEXED_PREFIXES,
    META_KEYS,
)
from exceptions import DegenerateInputError, MalformedFileError, MalformedStreamError
from rap import RapConfig, RapStream
from sequences import as_sequence
from timecorr import TimeCorrMode, TimeCorrStream

LOG = logging.getLogger(__name__)

_CF32_DTYPE = np.dtype("<f4")
_INDEXED_KEY = re.compile(r"^(eps|sat)\.([1-9][0-9]*)$")
_EXTENSIONS = {
    ".cf32": CF32_FORMAT,
    ".cfile": CF32_FORMAT,
    ".iq": CF32_FORMAT,
    ".csv": CSV_FORMAT,
}

_RAP_KEYS = {"passes", "rotate", "quant", "init_re", "init_im"}
_TIMECORR_KEYS = {"tc_mode", "tc_eps", "timecorr_re", "timecorr_im"}
_COMMON_KEYS = {"method", "samples", "seed"}


def infer_format(path, fmt: Optional[str] = None) -> str:
    """Explicit ``fmt`` wins; otherwise the file extension decides."""
    if fmt is not None:
        if fmt not in IQ_FORMATS:
            raise MalformedFileError(
                f"Unknown IQ format '{fmt}'. Valid choices: {', '.join(IQ_FORMATS)}"
            )
        return fmt
    suffix = Path(path).suffix.lower()
    if suffix not in _EXTENSIONS:
        raise MalformedFileError(
            f"Cannot infer the IQ format of '{path}' from its extension; "
            f"use one of {', '.join(sorted(_EXTENSIONS))} or pass --format"
        )
    return _EXTENSIONS[suffix]


def read_cf32(path) -> np.ndarray:
    raw = np.fromfile(path, dtype=_CF32_DTYPE)
    if raw.size == 0:
        raise MalformedFileError(f"{path}: no samples")
    if raw.size % 2:
        raise MalformedFileError(
            f"{path}: {raw.size} float32 values, expected interleaved I/Q pairs"
        )
    pairs = raw.astype(np.float64).reshape(-1, 2)
    return pairs[:, 0] + 1j * pairs[:, 1]


def write_cf32(path, seq) -> None:
    seq = as_sequence(seq)
    interleaved = np.empty(2 * seq.size, dtype=_CF32_DTYPE)
    interleaved[0::2] = seq.real
    interleaved[1::2] = seq.imag
    interleaved.tofile(path)


def read_csv_iq(path) -> np.ndarray:
    try:
        df = pd.read_csv(path, float_precision="round_trip")
    except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise MalformedFileError(f"{path}: {e}") from e
    if list(df.columns) != CSV_IQ_COLUMNS:
        raise MalformedFileError(
            f"{path}: expected header '{','.join(CSV_IQ_COLUMNS)}', "
            f"got '{','.join(map(str, df.columns))}'"
        )
    if df.empty:
        raise MalformedFileError(f"{path}: no samples")
    try:
        values = df[CSV_IQ_COLUMNS].to_numpy(dtype=np.float64)
    except ValueError as e:
        raise MalformedFileError(f"{path}: non-numeric sample ({e})") from e
    return values[:, 0] + 1j * values[:, 1]


def write_csv_iq(path, seq) -> None:
    seq = as_sequence(seq)
    pd.DataFrame({"re": seq.real, "im": seq.imag}).to_csv(
        path, index=False, float_format="%.17g"
    )


def read_iq(path, fmt: Optional[str] = None) -> np.ndarray:
    fmt = infer_format(path, fmt)
    seq = read_cf32(path) if fmt == CF32_FORMAT else read_csv_iq(path)
    try:
        seq = as_sequence(seq)
    except DegenerateInputError as e:
        raise MalformedFileError(f"{path}: {e}") from e
    LOG.debug("Read %d samples from %s (%s)", seq.size, path, fmt)
    return seq


def write_iq(path, seq, fmt: Optional[str] = None) -> None:
    fmt = infer_format(path, fmt)
    if fmt == CF32_FORMAT:
        write_cf32(path, seq)
    else:
        write_csv_iq(path, seq)
    LOG.debug("Wrote %d samples to %s (%s)", len(seq), path, fmt)


def _is_known_key(key: str) -> bool:
    return key in META_KEYS or bool(_INDEXED_KEY.match(key))


def read_meta(path) -> Dict[str, str]:
    meta: Dict[str, str] = {}
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except UnicodeDecodeError as e:
        raise MalformedFileError(f"{path}: not UTF-8 text") from e
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise MalformedFileError(f"{path}:{lineno}: expected key=value, got '{line}'")
        key, value = (part.strip() for part in line.split("=", 1))
        if not _is_known_key(key):
            raise MalformedFileError(f"{path}:{lineno}: unknown meta key '{key}'")
        if key in meta:
            raise MalformedFileError(f"{path}:{lineno}: duplicate meta key '{key}'")
        meta[key] = value
    if "method" not in meta:
        raise MalformedFileError(f"{path}: missing 'method'")
    return meta


def write_meta(path, meta: Dict[str, str]) -> None:
    for key in meta:
        if not _is_known_key(key):
            raise MalformedStreamError(f"Unknown meta key '{key}'")
    text = "".join(f"{key}={value}\n" for key, value in meta.items())
    Path(path).write_text(text, encoding="utf-8")


def _float(meta: Dict[str, str], key: str) -> float:
    if key not in meta:
        raise MalformedStreamError(f"Meta is missing '{key}'")
    try:
        value = float(meta[key])
    except ValueError as e:
        raise MalformedStreamError(f"Meta '{key}' is not a number: '{meta[key]}'") from e
    if not math.isfinite(value):
        raise MalformedStreamError(f"Meta '{key}' is not finite: '{meta[key]}'")
    return value


def _int(meta: Dict[str, str], key: str) -> int:
    try:
        return int(meta[key])
    except KeyError as e:
        raise MalformedStreamError(f"Meta is missing '{key}'") from e
    except ValueError as e:
        raise MalformedStreamError(f"Meta '{key}' is not an integer: '{meta[key]}'") from e


def rotation_from_phase(phase: float) -> complex:
    """Unit phasor for a rotation phase in radians; encoder and decoder both build it this way."""
    return complex(np.exp(1j * float(phase)))


def stream_to_meta(stream: Stream, seed: Optional[int] = None) -> Dict[str, str]:
    """Side information of ``stream`` as ordered meta key/value strings."""
    method = stream_method(stream)
    meta = {"method": method.label, "samples": str(len(stream))}
    if isinstance(stream, RapStream):
        config = stream.config
        meta["passes"] = str(config.passes)
        for i, (eps, sat) in enumerate(zip(config.epsilons, config.thresholds), start=1):
            meta[f"eps.{i}"] = repr(eps)
            meta[f"sat.{i}"] = repr(sat)
        if config.rotation is not None:
            meta["rotate"] = repr(float(np.angle(config.rotation)))
        if config.quant_step is not None:
            meta["quant"] = repr(config.quant_step)
        if config.init_prediction_override is not None:
            meta["init_re"] = repr(config.init_prediction_override.real)
            meta["init_im"] = repr(config.init_prediction_override.imag)
    elif isinstance(stream, TimeCorrStream):
        meta["tc_mode"] = stream.mode.label
        if stream.mode.is_adaptive:
            meta["tc_eps"] = repr(stream.mode.epsilon)
        else:
            meta["timecorr_re"] = repr(stream.timecorr.real)
            meta["timecorr_im"] = repr(stream.timecorr.imag)
    if seed is not None:
        meta["seed"] = str(seed)
    return meta


def _check_keys(meta: Dict[str, str], allowed, method: MethodKind) -> None:
    extra = sorted(
        key for key in meta
        if key not in _COMMON_KEYS and key not in allowed and not key.startswith(META_INDEXED_PREFIXES)
    )
    if method.kind != "rap":
        extra += sorted(key for key in meta if key.startswith(META_INDEXED_PREFIXES))
    if extra:
        raise MalformedStreamError(f"Meta keys {extra} do not apply to method {method}")


def _rap_config_from_meta(meta: Dict[str, str], method: MethodKind) -> RapConfig:
    passes = _int(meta, "passes")
    if passes != method.passes:
        raise MalformedStreamError(f"Method {method} does not match passes={passes}")
    indices = sorted(int(_INDEXED_KEY.match(key).group(2)) for key in meta if key.startswith("eps."))
    sat_indices = sorted(int(_INDEXED_KEY.match(key).group(2)) for key in meta if key.startswith("sat."))
    expected = list(range(1, passes + 1))
    if indices != expected or sat_indices != expected:
        raise MalformedStreamError(
            f"Meta needs eps.1..eps.{passes} and sat.1..sat.{passes} for {passes} passes"
        )
    epsilons = tuple(_float(meta, f"eps.{i}") for i in expected)
    thresholds = tuple(_float(meta, f"sat.{i}") for i in expected)
    rotation = rotation_from_phase(_float(meta, "rotate")) if "rotate" in meta else None
    quant_step = _float(meta, "quant") if "quant" in meta else None
    init = None
    if "init_re" in meta or "init_im" in meta:
        init = complex(_float(meta, "init_re"), _float(meta, "init_im"))
    return RapConfig(epsilons, thresholds, rotation, quant_step, init)


def meta_to_stream(residuals, meta: Dict[str, str]) -> Stream:
    """Rebuild a decodable stream from residual samples and their meta sidecar."""
    residuals = as_sequence(residuals)
    try:
        method = MethodKind.from_label(meta["method"])
    except KeyError as e:
        raise MalformedStreamError("Meta is missing 'method'") from e
    if "samples" in meta and _int(meta, "samples") != residuals.size:
        raise MalformedStreamError(
            f"Meta records {meta['samples']} samples but the residual file holds {residuals.size}"
        )

    if method.kind == "bypass":
        _check_keys(meta, set(), method)
        return BypassStream(residuals)
    if method.kind == "timecorr":
        _check_keys(meta, _TIMECORR_KEYS, method)
        mode_label = meta.get("tc_mode", "full")
        if mode_label == "adaptive":
            if "tc_eps" not in meta:
                raise MalformedStreamError("Adaptive time correlation needs 'tc_eps'")
            return TimeCorrStream(residuals, TimeCorrMode.adaptive(_float(meta, "tc_eps")))
        if mode_label != "full":
            raise MalformedStreamError(f"Unknown tc_mode '{mode_label}'")
        timecorr = complex(_float(meta, "timecorr_re"), _float(meta, "timecorr_im"))
        return TimeCorrStream(residuals, TimeCorrMode.full(), timecorr)
    _check_keys(meta, _RAP_KEYS, method)
    return RapStream(residuals, _rap_config_from_meta(meta, method))
