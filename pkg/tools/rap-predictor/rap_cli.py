import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd
from codec import MethodKind, decode, encode, transfer_magnitude
from constants import (
    DEFAULT_ADAPTIVE_EPSILON,
    DEFAULT_SEED,
    DEFAULT_SEQ_LEN,
    DEFAULT_SPECTRUM_SEQ_LEN,
    IQ_FORMATS,
    SPECTRUM_FREQ_COLUMN,
)
from exceptions import MalformedStreamError, RapError
from experiments import SweepConfig, run_magnitude_sweep, write_spectrum_tables
from iq_io import (
    meta_to_stream,
    read_iq,
    read_meta,
    rotation_from_phase,
    stream_to_meta,
    write_iq,
    write_meta,
)
from rap import RapConfig
from report import write_sweep_report
from selector import SelectionPolicy, estimate_bandwidth, select_method
from seqgen import generate_for_ratio
from sequences import NormalizationMode
from spectrum import magnitude_spectrum, moving_mean
from timecorr import TimeCorrMode, full_time_correlation, timecorr_rotation

logger = logging.getLogger("RapPredictor")

ENCODE_METHODS = ["bypass", "timecorr", "rap1", "rap2", "rap3", "auto-best", "auto-bw"]


class PositiveFloatAction(argparse.Action):
    def __call__(self, parser, namespace, values, option_string=None):
        items = values if isinstance(values, list) else [values]
        for value in items:
            if not value > 0:
                parser.error(f"{option_string} must be positive; got {value}")
        setattr(namespace, self.dest, values)


def parse_rotate(value: str):
    """``auto`` or a phase in radians."""
    if value == "auto":
        return value
    try:
        return float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--rotate expects 'auto' or a phase in radians; got '{value}'") from None


def _add_format(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--format",
        choices=IQ_FORMATS,
        default=None,
        help="IQ file format (default: from the file extension)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Residual-as-prediction and time-correlation predictors for complex IQ sequences",
    )
    parser.add_argument("--verbose", action="store_true", help="Log at DEBUG level")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="Write a band-limited random-phase test sequence")
    p.add_argument("--ratio", type=float, required=True, help="Occupied fraction of the sampling bandwidth")
    p.add_argument("--len", dest="seq_len", type=int, default=DEFAULT_SEQ_LEN, help="Power-of-two length")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--norm", choices=[m.value for m in NormalizationMode], default=NormalizationMode.MEAN_MAGNITUDE.value)
    p.add_argument("--out", type=Path, required=True)
    _add_format(p)

    p = sub.add_parser("encode", help="Replace a sequence by its prediction residual")
    p.add_argument("--method", choices=ENCODE_METHODS, required=True)
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--meta", type=Path, required=True)
    p.add_argument("--eps", type=float, nargs="+", help="Per-pass epsilons (rap methods)")
    p.add_argument("--sat", type=float, nargs="+", action=PositiveFloatAction, help="Per-pass saturation thresholds")
    p.add_argument("--rotate", type=parse_rotate, help="Prediction rotation phase in radians, or 'auto'")
    p.add_argument("--quant", type=float, action=PositiveFloatAction, help="Prediction quantization step")
    p.add_argument("--init-prediction", type=float, nargs=2, metavar=("RE", "IM"),
                   help="Initial first-pass prediction (default: the first sample)")
    p.add_argument("--tc-mode", choices=["full", "adaptive"], help="Time correlation mode (default: full)")
    p.add_argument("--tc-eps", type=float,
                   help=f"Adaptive time correlation epsilon (default: {DEFAULT_ADAPTIVE_EPSILON})")
    p.add_argument("--seed", type=int, help="Provenance seed recorded in the meta file")
    _add_format(p)

    p = sub.add_parser("decode", help="Reconstruct a sequence from residuals and their meta file")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--meta", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    _add_format(p)

    p = sub.add_parser("analyze", help="Write the DC-centered magnitude spectrum as CSV")
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--smooth", type=int, help="Moving-mean window")
    p.add_argument("--normalization", type=float, default=1.0, action=PositiveFloatAction,
                   help="Scale factor applied to the magnitudes")
    p.add_argument("--meta", type=Path,
                   help="Meta file of a residual input; adds the predictor's transfer magnitude column")
    _add_format(p)

    p = sub.add_parser("sweep", help="Mean residual magnitude versus occupied bandwidth")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--config", type=Path, help="YAML file with sweep settings")
    p.add_argument("--ratios", type=float, nargs="+")
    p.add_argument("--trials", type=int)
    p.add_argument("--len", dest="seq_len", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--report", type=Path, help="Also write an HTML summary")

    p = sub.add_parser("spectra", help="Write the original and residual spectrum tables")
    p.add_argument("--out-dir", type=Path, required=True)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--len", dest="seq_len", type=int, default=DEFAULT_SPECTRUM_SEQ_LEN)

    p = sub.add_parser("select", help="Print the method each selection policy picks")
    p.add_argument("--in", dest="input", type=Path, required=True)
    _add_format(p)
    return parser


def _rap_config(args, seq: np.ndarray, method: MethodKind) -> RapConfig:
    if (args.eps is None) != (args.sat is None):
        raise MalformedStreamError("--eps and --sat must be given together")
    if args.eps is not None:
        if len(args.eps) != method.passes or len(args.sat) != method.passes:
            raise MalformedStreamError(
                f"{method} needs {method.passes} epsilon(s) and threshold(s); "
                f"got {len(args.eps)} and {len(args.sat)}"
            )
        epsilons, thresholds = tuple(args.eps), tuple(args.sat)
    else:
        published = RapConfig.published(method.passes)
        epsilons, thresholds = published.epsilons, published.thresholds

    rotation = None
    if args.rotate == "auto":
        phase = float(np.angle(timecorr_rotation(full_time_correlation(seq))))
        logger.info(f"Rotation derived from the time correlation: {phase:.6f} rad")
        rotation = rotation_from_phase(phase)
    elif args.rotate is not None:
        rotation = rotation_from_phase(args.rotate)
    init = complex(*args.init_prediction) if args.init_prediction else None
    return RapConfig(epsilons, thresholds, rotation, args.quant, init)


def cmd_generate(args) -> None:
    seq, normalization = generate_for_ratio(args.ratio, args.seq_len, args.norm, args.seed)
    write_iq(args.out, seq, args.format)
    logger.info(f"Generated {seq.size} samples (ratio {args.ratio}, normalization {normalization:.6g}) to {args.out}")


def _tc_mode(args) -> TimeCorrMode:
    if args.tc_mode == "adaptive":
        eps = DEFAULT_ADAPTIVE_EPSILON if args.tc_eps is None else args.tc_eps
        return TimeCorrMode.adaptive(eps)
    if args.tc_eps is not None:
        raise MalformedStreamError("--tc-eps applies to --tc-mode adaptive only")
    return TimeCorrMode.full()


def cmd_encode(args) -> None:
    seq = read_iq(args.input, args.format)
    rap_flags = [args.eps, args.sat, args.rotate, args.quant, args.init_prediction]
    tc_flags = [args.tc_mode, args.tc_eps]
    if args.method.startswith("auto"):
        if any(flag is not None for flag in rap_flags + tc_flags):
            raise MalformedStreamError(f"--method {args.method} does not take predictor parameters")
        policy = SelectionPolicy.pick_best() if args.method == "auto-best" else SelectionPolicy.by_bandwidth()
        stream = select_method(seq, policy).stream
    else:
        method = MethodKind.from_label(args.method)
        if method.kind != "rap" and any(flag is not None for flag in rap_flags):
            raise MalformedStreamError("--eps/--sat/--rotate/--quant/--init-prediction apply to rap methods only")
        if method.kind != "timecorr" and any(flag is not None for flag in tc_flags):
            raise MalformedStreamError("--tc-mode/--tc-eps apply to the timecorr method only")
        rap_config = _rap_config(args, seq, method) if method.kind == "rap" else None
        tc_mode = _tc_mode(args) if method.kind == "timecorr" else None
        stream = encode(seq, method, rap_config=rap_config, tc_mode=tc_mode)

    meta = stream_to_meta(stream, seed=args.seed)
    write_iq(args.out, stream.residuals, args.format)
    write_meta(args.meta, meta)
    logger.info(f"Encoded {len(stream)} samples with {meta['method']} to {args.out}")


def cmd_decode(args) -> None:
    residuals = read_iq(args.input, args.format)
    stream = meta_to_stream(residuals, read_meta(args.meta))
    seq = decode(stream)
    write_iq(args.out, seq, args.format)
    logger.info(f"Decoded {seq.size} samples to {args.out}")


def cmd_analyze(args) -> None:
    seq = read_iq(args.input, args.format)
    spectrum = magnitude_spectrum(seq, args.normalization)
    mags = moving_mean(spectrum.mags, args.smooth) if args.smooth else spectrum.mags
    frame = pd.DataFrame({SPECTRUM_FREQ_COLUMN: spectrum.freqs, "magnitude": mags})
    if args.meta is not None:
        stream = meta_to_stream(seq, read_meta(args.meta))
        frame["transfer"] = transfer_magnitude(stream, spectrum.freqs)
    frame.to_csv(args.out, index=False)
    logger.info(f"Wrote {len(spectrum)} spectrum bins to {args.out}")


def cmd_sweep(args) -> None:
    overrides = dict(ratios=args.ratios, trials=args.trials, seq_len=args.seq_len, seed=args.seed)
    if args.config is not None:
        cfg = SweepConfig.from_yaml(args.config, **overrides)
    else:
        cfg = SweepConfig.from_mapping({}, **overrides)
    result = run_magnitude_sweep(cfg, workers=max(1, args.workers))
    result.to_frame().to_csv(args.out, index=False)
    logger.info(f"Wrote sweep table to {args.out}")
    if args.report is not None:
        write_sweep_report(args.report, result, cfg)


def cmd_spectra(args) -> None:
    write_spectrum_tables(args.out_dir, args.seed, args.seq_len)


def cmd_select(args) -> None:
    seq = read_iq(args.input, args.format)
    best = select_method(seq, SelectionPolicy.pick_best())
    print(f"pick_best\t{best.method}\t{best.mean_abs:.6f}")
    bw = estimate_bandwidth(seq)
    banded = select_method(seq, SelectionPolicy.by_bandwidth(bw))
    print(f"by_bandwidth\t{banded.method}\t{banded.mean_abs:.6f}\tbw={bw:.4f}")


COMMANDS = {
    "generate": cmd_generate,
    "encode": cmd_encode,
    "decode": cmd_decode,
    "analyze": cmd_analyze,
    "sweep": cmd_sweep,
    "spectra": cmd_spectra,
    "select": cmd_select,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.INFO,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )
    logging.getLogger().setLevel(logging.DEBUG if args.verbose else logging.INFO)

    if args.command == "sweep" and args.workers < 1:
        parser.error("--workers must be at least 1")
    if args.command == "analyze" and args.smooth is not None and args.smooth < 1:
        parser.error("--smooth must be at least 1")

    try:
        COMMANDS[args.command](args)
    except (RapError, OSError) as e:
        logger.error(f"{args.command} failed: {e}")
        return 1
    except Exception as e:
        logger.error(f"{args.command} failed: {e}", exc_info=True)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
