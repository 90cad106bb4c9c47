from typing import Dict, List, Tuple

# --- Published residual-as-prediction parameter sets ---
# Thresholds are absolute amplitudes and assume input normalized to mean magnitude 1.
PUBLISHED_RAP_CONFIGS: Dict[int, Tuple[List[float], List[float]]] = {
    1: ([0.007], [2.75]),
    2: ([0.012, 0.01], [2.5, 2.2]),
    3: ([0.015, 0.03, 0.01], [2.4, 1.4, 0.8]),
}

# --- Time correlation ---
ADAPTIVE_DENOMINATOR_GUARD = 1e-40
DEFAULT_ADAPTIVE_EPSILON = 0.01
DEFAULT_ADAPTIVE_CUTOFF = 0.2

# --- Sweep defaults ---
DEFAULT_SWEEP_RATIOS = [round(0.05 * i, 2) for i in range(19)]
DEFAULT_SWEEP_TRIALS = 10
DEFAULT_SEQ_LEN = 65536
DEFAULT_SPECTRUM_SEQ_LEN = 262144
DEFAULT_SEED = 2019
MAX_SWEEP_RATIO = 0.9

# --- Spectrum experiment ---
TIMECORR_SPECTRUM_RATIOS = [0.2, 0.5, 0.8]
RAP_SPECTRUM_RATIO = 0.5
SPECTRUM_SMOOTHING_WINDOW = 10

# clamp rate above which an encode logs a warning
SATURATION_WARNING_RATE = 0.25

# --- Selection policy bands (fraction of sampling bandwidth) ---
TIMECORR_BAND_LIMIT = 0.08
RAP3_BAND_LIMIT = 0.74
RAP1_BAND_LIMIT = 0.85
OCCUPANCY_PEAK_FRACTION = 0.1
BYPASS_RESIDUAL_FRACTION = 0.9
DEFAULT_COMPONENT_BITS = 10

# --- File formats ---
CF32_FORMAT = "cf32"
CSV_FORMAT = "csv"
IQ_FORMATS = (CF32_FORMAT, CSV_FORMAT)
CSV_IQ_COLUMNS = ["re", "im"]
SWEEP_CSV_COLUMNS = ["ratio", "timecorr", "rap1", "rap2", "rap3"]
SPECTRUM_FREQ_COLUMN = "freq"

# --- Meta sidecar ---
META_KEYS = {
    "method",
    "samples",
    "passes",
    "rotate",
    "quant",
    "init_re",
    "init_im",
    "timecorr_re",
    "timecorr_im",
    "tc_mode",
    "tc_eps",
    "seed",
}
META_INDEXED_PREFIXES = ("eps.", "sat.")

METHOD_DISPLAY_NAMES = {
    "bypass": "Bypass",
    "timecorr": "Time Correlation",
    "rap1": "Residual-as-Prediction (1 pass)",
    "rap2": "Residual-as-Prediction (2 pass)",
    "rap3": "Residual-as-Prediction (3 pass)",
}
