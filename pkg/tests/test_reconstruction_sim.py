#!/usr/bin/env python3
"""
Tests for the reconstruction simulation and the truncated-sinc baseline
"""

import numpy as np
import pytest

from core import DecimationPattern, DesignSpec, DimensionMismatch, InvalidPeriod, first_order_model
from ltisys import delay, gain
from reconstruction_sim import (
    generate_rect_wave, polyphase_reconstruction, run_reconstruction, sinc_baseline,
)
from synthesis import FilterBranch, PolyphaseFilterBank, design, extract_filterbank


@pytest.fixture(scope="module")
def example_result():
    spec = DesignSpec(DecimationPattern.from_string("110"), 1.0, 6, 4, first_order_model(10.0))
    return spec, design(spec)


def identity_bank():
    p = DecimationPattern.from_string("1")
    return p, PolyphaseFilterBank([FilterBranch(0, gain([[1.0]], 1.0))], p)


def test_rect_wave_examples():
    np.testing.assert_array_equal(generate_rect_wave(4, 1.0, 8).samples, [1, 1, -1, -1, 1, 1, -1, -1])
    np.testing.assert_array_equal(generate_rect_wave(2, 0.5, 4).samples, [0.5, -0.5, 0.5, -0.5])
    assert not np.any(generate_rect_wave(10, 0.0, 30).samples)


@pytest.mark.parametrize("period,length", [(1, 10), (8, 4)])
def test_rect_wave_rejects_bad_period(period, length):
    with pytest.raises(InvalidPeriod):
        generate_rect_wave(period, 1.0, length)


def test_identity_reconstruction(rng):
    p, fb = identity_bank()
    x = rng.standard_normal(50)
    report = run_reconstruction(x, p, fb, 0)
    np.testing.assert_array_equal(report.reconstructed.samples, x)
    assert report.max_abs_error == 0.0
    assert report.l2_error == 0.0


def test_mismatched_filterbank():
    _, fb = identity_bank()
    with pytest.raises(DimensionMismatch):
        run_reconstruction(np.ones(6), DecimationPattern.from_string("110"), fb, 0)


def test_zero_input_gives_zero_output(example_result):
    spec, result = example_result
    fb = extract_filterbank(result.filter, spec.pattern)
    report = run_reconstruction(generate_rect_wave(20, 0.0, 120), spec.pattern, fb, spec.m)
    assert not np.any(report.reconstructed.samples)
    assert report.max_abs_error == 0.0


def test_report_shapes_and_csv(example_result, tmp_path):
    spec, result = example_result
    fb = extract_filterbank(result.filter, spec.pattern)
    x = generate_rect_wave(20, 1.0, 200)
    report = run_reconstruction(x, spec.pattern, fb, spec.m)
    assert len(report.input) == len(report.reconstructed) == len(report.abs_error) == 200
    assert report.warmup == result.filter.n_states + spec.m
    assert report.end == 198

    report.to_csv(tmp_path / "sim.csv")
    lines = (tmp_path / "sim.csv").read_text().splitlines()
    assert lines[0] == "k,input,reconstructed,abs_error"
    assert len(lines) == 201
    data = np.loadtxt(tmp_path / "sim.csv", delimiter=',', skiprows=1)
    np.testing.assert_array_equal(data[:, 1], x.samples)


def test_designed_filter_beats_sinc_baseline(example_result):
    spec, result = example_result
    fb = extract_filterbank(result.filter, spec.pattern)
    x = generate_rect_wave(20, 1.0, 600)
    proposed = run_reconstruction(x, spec.pattern, fb, spec.m)
    baseline = sinc_baseline(x, spec.pattern, 31)
    assert baseline.m == 15
    assert proposed.intersample_max_abs_error < baseline.intersample_max_abs_error
    assert proposed.intersample_max_abs_error >= proposed.max_abs_error
    assert proposed.summary()["intersample_max_abs_error"] == proposed.intersample_max_abs_error


def test_intersample_error_covers_both_neighbours():
    p, fb = identity_bank()
    x = np.array([0.0, 0.0, 1.0, 1.0, 1.0, -1.0, -1.0, 0.0])
    report = run_reconstruction(x, p, fb, 0)
    assert report.max_abs_error == 0.0
    # exact samples still miss the jump from 1 to -1 between k=4 and k=5
    assert report.intersample_max_abs_error == 2.0


@pytest.mark.parametrize("steps", [0, 1, 3])
def test_delay_filter_aligns_with_reference(rng, steps):
    p = DecimationPattern.from_string("1")
    fb = PolyphaseFilterBank([FilterBranch(0, delay(steps, 1.0))], p)
    x = rng.standard_normal(40)
    report = run_reconstruction(x, p, fb, steps)
    np.testing.assert_array_equal(report.reconstructed.samples[steps:], x[:x.size - steps])
    assert report.max_abs_error == 0.0
    assert report.l2_error == 0.0


def test_sinc_baseline_without_decimation(rng):
    x = rng.standard_normal(100)
    report = sinc_baseline(x, DecimationPattern.from_string("11"), 31)
    np.testing.assert_allclose(report.reconstructed.samples[15:], x[:-15], atol=1e-12)
    assert report.max_abs_error < 1e-12


def test_sinc_baseline_rejects_even_taps():
    with pytest.raises(ValueError):
        sinc_baseline(np.ones(10), DecimationPattern.from_string("10"), 30)


def test_polyphase_reconstruction_truncates(example_result, rng):
    spec, result = example_result
    report = polyphase_reconstruction(rng.standard_normal(100), spec.pattern, result.filter, spec.m)
    assert len(report.reconstructed) == 99
