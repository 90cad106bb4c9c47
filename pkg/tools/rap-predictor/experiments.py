"""
Experiment harness: mean residual magnitude versus occupied bandwidth, and the
magnitude spectra of original and residual sequences.

Each (ratio, trial) pair of the sweep draws its own generator seed from
``numpy.random.SeedSequence([seed, ratio_index, trial])``, so trials are
independent, reproducible, and can be evaluated in any order or process.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import yaml
from codec import TIMECORR, MethodKind, encode
from constants import (
    DEFAULT_ADAPTIVE_CUTOFF,
    DEFAULT_ADAPTIVE_EPSILON,
    DEFAULT_SEED,
    DEFAULT_SEQ_LEN,
    DEFAULT_SPECTRUM_SEQ_LEN,
    DEFAULT_SWEEP_RATIOS,
    DEFAULT_SWEEP_TRIALS,
    MAX_SWEEP_RATIO,
    RAP_SPECTRUM_RATIO,
    SPECTRUM_FREQ_COLUMN,
    SPECTRUM_SMOOTHING_WINDOW,
    SWEEP_CSV_COLUMNS,
    TIMECORR_SPECTRUM_RATIOS,
)
from exceptions import ConfigError
from rap import RapConfig
from seqgen import generate_for_ratio
from sequences import NormalizationMode, mean_abs
from spectrum import is_power_of_two, magnitude_spectrum, moving_mean, relative_frequencies
from timecorr import TimeCorrMode

LOG = logging.getLogger(__name__)

SWEEP_METHODS = SWEEP_CSV_COLUMNS[1:]


@dataclass(frozen=True)
class SweepConfig:
    ratios: Tuple[float, ...] = tuple(DEFAULT_SWEEP_RATIOS)
    trials: int = DEFAULT_SWEEP_TRIALS
    seq_len: int = DEFAULT_SEQ_LEN
    seed: int = DEFAULT_SEED
    adaptive_eps: float = DEFAULT_ADAPTIVE_EPSILON
    adaptive_cutoff: float = DEFAULT_ADAPTIVE_CUTOFF

    def __post_init__(self):
        try:
            ratios = tuple(float(r) for r in self.ratios)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"ratios must be a list of numbers; got {self.ratios!r}") from e
        object.__setattr__(self, "ratios", ratios)
        if not ratios:
            raise ConfigError("ratios must not be empty")
        for ratio in ratios:
            if not 0 <= ratio <= MAX_SWEEP_RATIO:
                raise ConfigError(f"ratio must be in [0, {MAX_SWEEP_RATIO}]; got {ratio}")
        if not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError(f"trials must be a positive integer; got {self.trials!r}")
        if not isinstance(self.seq_len, int) or not is_power_of_two(self.seq_len):
            raise ConfigError(f"seq_len must be a power of two; got {self.seq_len!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"seed must be a 64-bit unsigned integer; got {self.seed!r}")
        if not 0 < self.adaptive_eps < 1:
            raise ConfigError(f"adaptive_eps must be in (0, 1); got {self.adaptive_eps}")
        if not 0 <= self.adaptive_cutoff <= 1:
            raise ConfigError(f"adaptive_cutoff must be in [0, 1]; got {self.adaptive_cutoff}")

    @classmethod
    def from_mapping(cls, values: Dict, **overrides) -> "SweepConfig":
        """Build from a mapping (e.g. parsed YAML); ``overrides`` that are not None win."""
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise ConfigError(f"Unknown sweep config keys: {', '.join(unknown)}")
        merged = dict(values)
        merged.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**merged)

    @classmethod
    def from_yaml(cls, path, **overrides) -> "SweepConfig":
        try:
            with open(path, "r") as f:
                values = yaml.safe_load(f) or {}
        except yaml.YAMLError as e:
            raise ConfigError(f"{path}: invalid YAML ({e})") from e
        if not isinstance(values, dict):
            raise ConfigError(f"{path}: expected a mapping at the top level")
        return cls.from_mapping(values, **overrides)

    def to_dict(self) -> Dict:
        values = asdict(self)
        values["ratios"] = list(self.ratios)
        return values


@dataclass(frozen=True)
class SweepResult:
    ratios: Tuple[float, ...]
    means: Dict[str, Tuple[float, ...]] = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        data = {"ratio": list(self.ratios)}
        data.update({method: list(self.means[method]) for method in SWEEP_METHODS})
        return pd.DataFrame(data, columns=SWEEP_CSV_COLUMNS)

    def row(self, ratio: float) -> Dict[str, float]:
        index = self.ratios.index(ratio)
        return {method: self.means[method][index] for method in SWEEP_METHODS}


def trial_seed(seed: int, ratio_index: int, trial: int) -> int:
    """Generator seed of one sweep trial: first 64-bit word of SeedSequence([seed, ratio_index, trial])."""
    state = np.random.SeedSequence([seed, ratio_index, trial]).generate_state(1, dtype=np.uint64)
    return int(state[0])


def timecorr_mode_for_ratio(ratio: float, cfg: SweepConfig) -> TimeCorrMode:
    """Adaptive estimate for narrow signals, whole-sequence correlation from the cutoff up."""
    if ratio < cfg.adaptive_cutoff:
        return TimeCorrMode.adaptive(cfg.adaptive_eps)
    return TimeCorrMode.full()


def _run_trial(task) -> Tuple[int, int, Dict[str, float]]:
    ratio_index, trial, ratio, cfg = task
    seq, _ = generate_for_ratio(
        ratio, cfg.seq_len, NormalizationMode.MEAN_MAGNITUDE, trial_seed(cfg.seed, ratio_index, trial)
    )
    means = {
        "timecorr": mean_abs(encode(seq, TIMECORR, tc_mode=timecorr_mode_for_ratio(ratio, cfg)).residuals)
    }
    for passes in (1, 2, 3):
        method = MethodKind.rap(passes)
        means[method.label] = mean_abs(encode(seq, method, rap_config=RapConfig.published(passes)).residuals)
    return ratio_index, trial, means


def run_magnitude_sweep(cfg: SweepConfig, workers: int = 1) -> SweepResult:
    """
    Mean residual magnitude per ratio and method, averaged over ``cfg.trials``.

    Results do not depend on ``workers``: per-trial means are summed in
    (ratio, trial) order after all trials finish.
    """
    tasks = [
        (ratio_index, trial, ratio, cfg)
        for ratio_index, ratio in enumerate(cfg.ratios)
        for trial in range(cfg.trials)
    ]
    LOG.info(
        "Sweep: %d ratios x %d trials, seq_len=%d, seed=%d, workers=%d",
        len(cfg.ratios), cfg.trials, cfg.seq_len, cfg.seed, workers,
    )
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            outcomes = list(executor.map(_run_trial, tasks))
    else:
        outcomes = [_run_trial(task) for task in tasks]

    per_trial = {(ratio_index, trial): means for ratio_index, trial, means in outcomes}
    means: Dict[str, List[float]] = {method: [] for method in SWEEP_METHODS}
    for ratio_index, ratio in enumerate(cfg.ratios):
        for method in SWEEP_METHODS:
            total = 0.0
            for trial in range(cfg.trials):
                total += per_trial[(ratio_index, trial)][method]
            means[method].append(total / cfg.trials)
        LOG.info(
            "ratio %.2f: %s",
            ratio,
            ", ".join(f"{m}={means[m][-1]:.4f}" for m in SWEEP_METHODS),
        )
    return SweepResult(cfg.ratios, {m: tuple(v) for m, v in means.items()})


def _scaled_spectrum(seq, normalization: float, smooth: Optional[int] = None) -> np.ndarray:
    mags = magnitude_spectrum(seq, normalization).mags
    return moving_mean(mags, smooth) if smooth else mags


def run_spectrum_experiment(
    seed: int = DEFAULT_SEED,
    seq_len: int = DEFAULT_SPECTRUM_SEQ_LEN,
    timecorr_ratios: Sequence[float] = TIMECORR_SPECTRUM_RATIOS,
    rap_ratio: float = RAP_SPECTRUM_RATIO,
) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """
    Magnitude spectra of generated sequences and their residuals, power-normalized.

    Table A: the widest-ratio original plus whole-sequence time-correlation
    residuals at every ``timecorr_ratios`` entry. Table B: the ``rap_ratio``
    original plus the 1-, 2- and 3-pass residuals, the deeper two smoothed.
    Every spectrum is multiplied back by its sequence's normalization, so
    occupied bins of an original read 1.0.
    """
    power = NormalizationMode.RMS_POWER
    freqs = relative_frequencies(seq_len)

    widest = max(timecorr_ratios)
    original: Dict[str, np.ndarray] = {}
    residuals: Dict[str, np.ndarray] = {}
    for index, ratio in enumerate(timecorr_ratios):
        seq, norm = generate_for_ratio(ratio, seq_len, power, trial_seed(seed, index, 0))
        if ratio == widest:
            original[f"original_{ratio}"] = _scaled_spectrum(seq, norm)
        stream = encode(seq, TIMECORR, tc_mode=TimeCorrMode.full())
        LOG.info("Ratio %.2f: time correlation %.4f%+.4fj", ratio, stream.timecorr.real, stream.timecorr.imag)
        residuals[f"timecorr_{ratio}"] = _scaled_spectrum(stream.residuals, norm)
    table_a = {**original, **residuals}
    seq, norm = generate_for_ratio(rap_ratio, seq_len, power, trial_seed(seed, len(timecorr_ratios), 0))
    table_b: Dict[str, np.ndarray] = {"original": _scaled_spectrum(seq, norm)}
    for passes in (1, 2, 3):
        stream = encode(seq, MethodKind.rap(passes))
        smooth = SPECTRUM_SMOOTHING_WINDOW if passes > 1 else None
        table_b[f"rap{passes}"] = _scaled_spectrum(stream.residuals, norm, smooth)

    frame_a = pd.DataFrame({SPECTRUM_FREQ_COLUMN: freqs, **table_a})
    frame_b = pd.DataFrame({SPECTRUM_FREQ_COLUMN: freqs, **table_b})
    return frame_a, frame_b


def write_spectrum_tables(out_dir, seed: int = DEFAULT_SEED, seq_len: int = DEFAULT_SPECTRUM_SEQ_LEN) -> List[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    frame_a, frame_b = run_spectrum_experiment(seed, seq_len)
    paths = [out_dir / "timecorr_spectra.csv", out_dir / "rap_spectra.csv"]
    for frame, path in zip((frame_a, frame_b), paths):
        frame.to_csv(path, index=False)
        LOG.info("Wrote %d spectrum rows to %s", len(frame), path)
    return paths
