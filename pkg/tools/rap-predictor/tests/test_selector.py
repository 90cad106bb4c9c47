import numpy as np
import pytest
from codec import (
    ALL_METHODS,
    BYPASS,
    TIMECORR,
    BypassStream,
    MethodKind,
    decode,
    encode,
    stream_method,
)
from exceptions import DegenerateInputError, DomainError, MalformedStreamError
from numpy.testing import assert_array_equal
from rap import RapConfig
from selector import (
    SelectionPolicy,
    estimate_bandwidth,
    estimate_compression_factor,
    pick_best,
    select_by_bandwidth,
    select_method,
)
from sequences import mean_abs
from timecorr import TimeCorrMode

RAP1, RAP2, RAP3 = MethodKind.rap(1), MethodKind.rap(2), MethodKind.rap(3)


@pytest.mark.parametrize("label", ["bypass", "timecorr", "rap1", "rap2", "rap3"])
def test_method_label_round_trip(label):
    assert MethodKind.from_label(label).label == label


@pytest.mark.parametrize("label", ["rap0", "lpc", "bypass2"])
def test_unknown_method_label(label):
    with pytest.raises(DomainError):
        MethodKind.from_label(label)


@pytest.mark.parametrize("method", ALL_METHODS, ids=str)
def test_codec_round_trip(method, generated):
    seq = generated(0.3)
    stream = encode(seq, method)
    assert stream_method(stream) == method
    assert len(stream) == len(seq)
    assert np.max(np.abs(decode(stream) - seq)) <= 1e-9 * mean_abs(seq)


def test_bypass_residual_is_the_input():
    seq = np.array([1 + 2j, 3 - 4j])
    stream = encode(seq, BYPASS)
    assert isinstance(stream, BypassStream)
    assert_array_equal(stream.residuals, seq)


def test_encode_rejects_pass_mismatch():
    with pytest.raises(MalformedStreamError):
        encode(np.ones(8), RAP2, rap_config=RapConfig.published(3))


def test_encode_adaptive_timecorr():
    stream = encode(np.exp(0.1j * np.arange(64)), TIMECORR, tc_mode=TimeCorrMode.adaptive(0.05))
    assert stream.mode.is_adaptive


@pytest.mark.parametrize(
    "ratio, bits, expected",
    [
        (1.0, 10, 1.0),
        (0.5, 10, 0.9),
        (0.25, 8, 0.75),
    ],
)
def test_compression_factor(ratio, bits, expected):
    assert estimate_compression_factor(ratio, bits) == pytest.approx(expected)


def test_compression_factor_near_published_example():
    assert 0.980 <= estimate_compression_factor(0.9, 10) <= 0.988


def test_compression_factor_is_clamped():
    assert estimate_compression_factor(1e-9, 10) == pytest.approx(0.1)
    assert estimate_compression_factor(2.0, 10) == 1.0


@pytest.mark.parametrize("ratio, bits", [(0.0, 10), (-0.5, 10), (0.5, 1)])
def test_compression_factor_domain(ratio, bits):
    with pytest.raises(DomainError):
        estimate_compression_factor(ratio, bits)


def test_bandwidth_of_tone():
    assert estimate_bandwidth(np.exp(2j * np.pi * 3 * np.arange(256) / 256)) == 1 / 256


@pytest.mark.parametrize("ratio", [0.5, 0.9])
def test_bandwidth_of_generated(ratio, generated):
    assert estimate_bandwidth(generated(ratio)) == pytest.approx(ratio, abs=0.02)


def test_bandwidth_of_zeros():
    with pytest.raises(DegenerateInputError):
        estimate_bandwidth(np.zeros(64))


@pytest.mark.parametrize(
    "bw, expected",
    [
        (0.0, TIMECORR),
        (0.05, TIMECORR),
        (0.08, RAP3),
        (0.5, RAP3),
        (0.74, RAP3),
        (0.75, RAP1),
        (0.8, RAP1),
        (0.85, RAP1),
        (0.86, BYPASS),
        (0.9, BYPASS),
        (1.0, BYPASS),
    ],
)
def test_select_by_bandwidth(bw, expected):
    assert select_by_bandwidth(bw) == expected


def test_select_by_bandwidth_outputs():
    outputs = {select_by_bandwidth(bw) for bw in np.linspace(0, 1, 1001)}
    assert outputs == {TIMECORR, RAP3, RAP1, BYPASS}


@pytest.mark.parametrize("bw", [-0.1, 1.1])
def test_select_by_bandwidth_domain(bw):
    with pytest.raises(DomainError):
        select_by_bandwidth(bw)


def test_policy_validation():
    with pytest.raises(DomainError):
        SelectionPolicy.by_bandwidth(1.5)
    with pytest.raises(DomainError):
        SelectionPolicy("guess")


def test_pick_best_on_tone():
    tone = np.exp(2j * np.pi * np.arange(1024) / 1024)
    assert pick_best(tone).method == TIMECORR


def test_pick_best_on_half_band(generated):
    assert pick_best(generated(0.5, seq_len=65536)).method == RAP3


def test_pick_best_on_wide_band_bypasses(generated):
    seq = generated(0.9, seq_len=65536)
    assert pick_best(seq, bypass_above=0.9).method == BYPASS
    plain = pick_best(seq)
    assert 0.9 < plain.mean_abs <= mean_abs(seq)


def test_pick_best_is_minimum(rng):
    for _ in range(5):
        seq = rng.standard_normal(512) + 1j * rng.standard_normal(512)
        best = pick_best(seq)
        for method in ALL_METHODS:
            assert best.mean_abs <= mean_abs(encode(seq, method).residuals)


def test_pick_best_ties_go_to_first_candidate():
    # a single sample is its own residual under every method
    seq = [1.5 - 0.5j]
    assert pick_best(seq, [RAP1, TIMECORR, BYPASS]).method == RAP1
    assert pick_best(seq, [BYPASS, RAP1, TIMECORR]).method == BYPASS


def test_pick_best_needs_candidates():
    with pytest.raises(DomainError):
        pick_best(np.ones(4), [])


def test_select_method_policies(generated):
    seq = generated(0.05, seq_len=65536)
    assert select_method(seq, SelectionPolicy.pick_best()).method == TIMECORR
    assert select_method(seq, SelectionPolicy.by_bandwidth()).method == TIMECORR
    assert select_method(seq, SelectionPolicy.by_bandwidth(0.8)).method == RAP1


@pytest.mark.slow
@pytest.mark.parametrize("ratio", [0.05, 0.3, 0.5, 0.8, 0.9])
def test_policies_agree_on_generated_sequences(ratio, generated):
    agree = 0
    for seed in range(10):
        seq = generated(ratio, seq_len=65536, seed=seed)
        banded = select_by_bandwidth(estimate_bandwidth(seq))
        best = pick_best(seq, bypass_above=0.9).method
        agree += banded == best
    assert agree >= 8
