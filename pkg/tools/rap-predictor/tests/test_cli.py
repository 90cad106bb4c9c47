import os

import numpy as np
import pandas as pd
import pytest
from constants import SWEEP_CSV_COLUMNS
from iq_io import read_iq, read_meta, write_iq, write_meta
from rap_cli import main
from sequences import mean_abs


@pytest.fixture
def sample_csv(tmp_path):
    path = tmp_path / "x.csv"
    assert main(["generate", "--ratio", "0.3", "--len", "1024", "--seed", "11", "--out", str(path)]) == 0
    return path


def encode_decode(tmp_path, source, method, *extra):
    suffix = source.suffix
    res, meta, out = tmp_path / f"res{suffix}", tmp_path / "res.meta", tmp_path / f"out{suffix}"
    code = main(["encode", "--method", method, "--in", str(source), "--out", str(res), "--meta", str(meta), *extra])
    assert code == 0
    assert main(["decode", "--in", str(res), "--meta", str(meta), "--out", str(out)]) == 0
    return res, meta, out


def test_generate_writes_normalized_sequence(sample_csv):
    seq = read_iq(sample_csv)
    assert len(seq) == 1024
    assert mean_abs(seq) == pytest.approx(1.0, rel=1e-12)


def test_generate_rejects_bad_length(tmp_path):
    assert main(["generate", "--ratio", "0.3", "--len", "1000", "--out", str(tmp_path / "x.csv")]) == 1


@pytest.mark.parametrize("method", ["bypass", "timecorr", "rap1", "rap2", "rap3"])
def test_csv_round_trip_is_lossless(tmp_path, sample_csv, method):
    res, meta, out = encode_decode(tmp_path, sample_csv, method)
    seq = read_iq(sample_csv)
    assert len(read_iq(res)) == len(seq)
    assert read_meta(meta)["method"] == method
    assert np.max(np.abs(read_iq(out) - seq)) <= 1e-9 * mean_abs(seq)


def test_cf32_round_trip(tmp_path):
    source = tmp_path / "x.cf32"
    assert main(["generate", "--ratio", "0.3", "--len", "1024", "--out", str(source)]) == 0
    res, _, out = encode_decode(tmp_path, source, "rap3")
    assert res.stat().st_size == source.stat().st_size == 1024 * 8
    assert np.max(np.abs(read_iq(out) - read_iq(source))) <= 1e-4


def test_encode_with_explicit_parameters(tmp_path, sample_csv):
    _, meta, out = encode_decode(
        tmp_path, sample_csv, "rap2",
        "--eps", "0.02", "0.01", "--sat", "2.0", "1.5",
        "--rotate", "auto", "--init-prediction", "0", "0", "--seed", "11",
    )
    values = read_meta(meta)
    assert values["eps.1"] == "0.02"
    assert values["sat.2"] == "1.5"
    assert "rotate" in values
    assert values["init_re"] == "0.0"
    assert values["seed"] == "11"
    seq = read_iq(sample_csv)
    assert np.max(np.abs(read_iq(out) - seq)) <= 1e-9 * mean_abs(seq)


def test_encode_adaptive_timecorr(tmp_path, sample_csv):
    _, meta, out = encode_decode(tmp_path, sample_csv, "timecorr", "--tc-mode", "adaptive", "--tc-eps", "0.05")
    values = read_meta(meta)
    assert values["tc_mode"] == "adaptive"
    assert values["tc_eps"] == "0.05"
    seq = read_iq(sample_csv)
    assert np.max(np.abs(read_iq(out) - seq)) <= 1e-9 * mean_abs(seq)


def test_auto_best_picks_timecorr_for_narrow_band(tmp_path):
    source = tmp_path / "narrow.cf32"
    assert main(["generate", "--ratio", "0.05", "--len", "65536", "--out", str(source)]) == 0
    _, meta, _ = encode_decode(tmp_path, source, "auto-best")
    assert read_meta(meta)["method"] == "timecorr"


def test_auto_bw_records_chosen_method(tmp_path):
    source = tmp_path / "half.cf32"
    assert main(["generate", "--ratio", "0.5", "--len", "4096", "--out", str(source)]) == 0
    _, meta, _ = encode_decode(tmp_path, source, "auto-bw")
    assert read_meta(meta)["method"] == "rap3"


def test_decode_with_edited_epsilon_is_lossy(tmp_path, sample_csv):
    res, meta, out = tmp_path / "res.csv", tmp_path / "res.meta", tmp_path / "out.csv"
    assert main(["encode", "--method", "rap1", "--in", str(sample_csv), "--out", str(res), "--meta", str(meta)]) == 0
    values = read_meta(meta)
    values["eps.1"] = "0.5"
    write_meta(meta, values)
    assert main(["decode", "--in", str(res), "--meta", str(meta), "--out", str(out)]) == 0
    seq = read_iq(sample_csv)
    assert np.mean(np.abs(read_iq(out) - seq)) > 0.1 * mean_abs(seq)


def test_decode_rejects_length_mismatch(tmp_path, sample_csv):
    res, meta = tmp_path / "res.csv", tmp_path / "res.meta"
    assert main(["encode", "--method", "rap1", "--in", str(sample_csv), "--out", str(res), "--meta", str(meta)]) == 0
    write_iq(res, read_iq(res)[:-1])
    assert main(["decode", "--in", str(res), "--meta", str(meta), "--out", str(tmp_path / "out.csv")]) == 1


def test_decode_rejects_malformed_meta(tmp_path, sample_csv):
    meta = tmp_path / "bad.meta"
    meta.write_text("method=rap1\nwindow=hann\n")
    assert main(["decode", "--in", str(sample_csv), "--meta", str(meta), "--out", str(tmp_path / "out.csv")]) == 1


def test_encode_rejects_malformed_input(tmp_path):
    source = tmp_path / "odd.cf32"
    np.array([1.0, 2.0, 3.0], dtype="<f4").tofile(source)
    args = ["encode", "--method", "rap1", "--in", str(source), "--out", str(tmp_path / "r.cf32"),
            "--meta", str(tmp_path / "r.meta")]
    assert main(args) == 1


def test_encode_rejects_missing_input(tmp_path):
    args = ["encode", "--method", "rap1", "--in", str(tmp_path / "absent.csv"), "--out", str(tmp_path / "r.csv"),
            "--meta", str(tmp_path / "r.meta")]
    assert main(args) == 1


@pytest.mark.parametrize(
    "method, extra",
    [
        ("rap2", ["--eps", "0.01", "--sat", "2.0", "1.0"]),
        ("rap1", ["--eps", "0.01"]),
        ("timecorr", ["--quant", "0.5"]),
        ("auto-best", ["--rotate", "0.1"]),
        ("auto-bw", ["--tc-mode", "full"]),
        ("rap1", ["--tc-mode", "adaptive"]),
        ("bypass", ["--tc-eps", "0.1"]),
        ("timecorr", ["--tc-eps", "0.1"]),
    ],
)
def test_encode_rejects_inconsistent_parameters(tmp_path, sample_csv, method, extra):
    meta = tmp_path / "r.meta"
    args = ["encode", "--method", method, "--in", str(sample_csv), "--out", str(tmp_path / "r.csv"),
            "--meta", str(meta), *extra]
    assert main(args) == 1
    assert not meta.exists()


def test_negative_threshold_is_a_usage_error(tmp_path, sample_csv):
    with pytest.raises(SystemExit):
        main(["encode", "--method", "rap1", "--in", str(sample_csv), "--out", str(tmp_path / "r.csv"),
              "--meta", str(tmp_path / "r.meta"), "--eps", "0.01", "--sat", "-1"])


def test_analyze_writes_centered_spectrum(tmp_path, sample_csv):
    out = tmp_path / "spectrum.csv"
    assert main(["analyze", "--in", str(sample_csv), "--out", str(out), "--smooth", "4"]) == 0
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["freq", "magnitude"]
    assert len(frame) == 1024
    assert frame.freq.iloc[0] == -0.5
    assert frame.freq.is_monotonic_increasing


def test_analyze_adds_transfer_column_for_residuals(tmp_path, sample_csv):
    res, meta, _ = encode_decode(tmp_path, sample_csv, "rap1")
    out = tmp_path / "spectrum.csv"
    assert main(["analyze", "--in", str(res), "--meta", str(meta), "--out", str(out)]) == 0
    frame = pd.read_csv(out)
    assert list(frame.columns) == ["freq", "magnitude", "transfer"]
    # one pass with epsilon 0.007 notches DC down to 1 / 1.993
    assert frame.transfer.min() == pytest.approx(1 / 1.993)
    assert frame.transfer.iloc[0] > 1


def test_analyze_rejects_adaptive_residuals(tmp_path, sample_csv):
    res, meta, _ = encode_decode(tmp_path, sample_csv, "timecorr", "--tc-mode", "adaptive")
    assert main(["analyze", "--in", str(res), "--meta", str(meta), "--out", str(tmp_path / "s.csv")]) == 1


def test_analyze_rejects_zero_window(tmp_path, sample_csv):
    with pytest.raises(SystemExit):
        main(["analyze", "--in", str(sample_csv), "--out", str(tmp_path / "s.csv"), "--smooth", "0"])


def test_select_prints_both_policies(tmp_path, capsys):
    source = tmp_path / "half.cf32"
    assert main(["generate", "--ratio", "0.5", "--len", "4096", "--out", str(source)]) == 0
    capsys.readouterr()
    assert main(["select", "--in", str(source)]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 2
    assert lines[0].split("\t")[:2] == ["pick_best", "rap3"]
    assert lines[1].split("\t")[:2] == ["by_bandwidth", "rap3"]
    assert lines[1].split("\t")[3].startswith("bw=")


def test_sweep_with_config_and_report(tmp_path, test_data_dir):
    out, report = tmp_path / "sweep.csv", tmp_path / "sweep.html"
    args = ["sweep", "--out", str(out), "--config", os.path.join(test_data_dir, "sweep_config.yml"),
            "--trials", "1", "--report", str(report)]
    assert main(args) == 0
    frame = pd.read_csv(out)
    assert list(frame.columns) == SWEEP_CSV_COLUMNS
    assert frame.ratio.tolist() == [0.0, 0.3, 0.6]
    assert "<table>" in report.read_text(encoding="utf-8")


def test_sweep_rejects_bad_config(tmp_path):
    config = tmp_path / "bad.yml"
    config.write_text("trials: 0\n")
    assert main(["sweep", "--out", str(tmp_path / "s.csv"), "--config", str(config)]) == 1


def test_sweep_rejects_zero_workers(tmp_path):
    with pytest.raises(SystemExit):
        main(["sweep", "--out", str(tmp_path / "s.csv"), "--workers", "0"])


def test_spectra_writes_both_tables(tmp_path):
    out_dir = tmp_path / "spectra"
    assert main(["spectra", "--out-dir", str(out_dir), "--len", "4096", "--seed", "3"]) == 0
    table_a = pd.read_csv(out_dir / "timecorr_spectra.csv")
    table_b = pd.read_csv(out_dir / "rap_spectra.csv")
    assert len(table_a) == len(table_b) == 4096
    assert list(table_b.columns) == ["freq", "original", "rap1", "rap2", "rap3"]
