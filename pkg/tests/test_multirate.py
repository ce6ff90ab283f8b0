#!/usr/bin/env python3
"""
Tests for the nonuniform decimator/expander and polyphase blocking
"""

import numpy as np
import pytest

from conftest import random_pattern, random_stable
from core import DecimationPattern, LengthNotDivisible, StateSpaceModel
from ltisys import lift, simulate
from multirate import (
    SignalSequence, block, decimate, expand, read_sequence_csv, selection_matrix, unblock,
    write_sequence_csv,
)


def test_decimate_example():
    p = DecimationPattern.from_string("1100")
    y = decimate(np.arange(1, 9), p)
    np.testing.assert_array_equal(y.samples, [1, 2, 5, 6])


def test_decimate_keeps_trailing_partial_segment():
    p = DecimationPattern.from_string("101")
    y = decimate(np.arange(7), p)
    np.testing.assert_array_equal(y.samples, [0, 2, 3, 5, 6])


def test_expand_example():
    p = DecimationPattern.from_string("1010")
    v = expand([1, 2, 3, 4], p)
    np.testing.assert_array_equal(v.samples, [1, 0, 2, 0, 3, 0, 4, 0])


def test_expand_partial_group():
    p = DecimationPattern.from_string("1101")
    v = expand([1, 2, 3, 4, 5], p)
    np.testing.assert_array_equal(v.samples, [1, 2, 0, 3, 4, 5])


def test_selection_matrix():
    E = selection_matrix(DecimationPattern.from_string("1100")).entries
    np.testing.assert_array_equal(E, [[1, 0, 0, 0], [0, 1, 0, 0]])
    np.testing.assert_array_equal(E @ E.T, np.eye(2))


def test_selection_matrix_projector(rng):
    for _ in range(20):
        p = random_pattern(rng)
        E = selection_matrix(p)
        np.testing.assert_array_equal(E.entries @ E.T, np.eye(p.N))
        np.testing.assert_array_equal(np.diag(E.T @ E.entries), p.bits)


def test_block_and_unblock():
    x = np.arange(6.0)
    v = block(x, 3)
    np.testing.assert_array_equal(v, [[0, 1, 2], [3, 4, 5]])
    np.testing.assert_array_equal(unblock(v).samples, x)


def test_block_requires_full_segments():
    with pytest.raises(LengthNotDivisible):
        block(np.arange(7.0), 3)


def test_block_form_identities(rng):
    """decimate = E block and expand = unblock(E' block) on whole segments"""
    for _ in range(100):
        p = random_pattern(rng)
        segments = int(rng.integers(1, 400 // p.M + 1))
        x = rng.standard_normal(segments * p.M)
        E = selection_matrix(p).entries

        d = decimate(x, p).samples
        np.testing.assert_array_equal(d, (block(x, p.M) @ E.T).reshape(-1))

        y = rng.standard_normal(segments * p.N)
        np.testing.assert_array_equal(expand(y, p).samples, unblock(block(y, p.N) @ E).samples)


def test_expand_decimate_mask_law(rng):
    for _ in range(100):
        p = random_pattern(rng)
        length = int(rng.integers(p.M, 400))
        x = rng.standard_normal(length)
        mask = np.resize(np.array(p.bits, dtype=float), length)
        v = expand(decimate(x, p), p, length).samples
        np.testing.assert_array_equal(v, mask * x)


def test_expand_restores_original_length():
    p = DecimationPattern.from_string("10")
    x = np.arange(1.0, 358.0)
    assert len(expand(decimate(x, p), p)) == 358
    v = expand(decimate(x, p), p, 357).samples
    assert v.size == 357
    np.testing.assert_array_equal(v[::2], x[::2])
    assert not np.any(v[1::2])


def test_expand_rejects_wrong_length():
    p = DecimationPattern.from_string("1100")
    with pytest.raises(LengthNotDivisible):
        expand([1.0, 2.0, 3.0], p, 4)


def test_expand_keeps_start_index():
    p = DecimationPattern.from_string("110")
    d = decimate(SignalSequence(np.arange(9.0), start_index=5), p)
    assert d.start_index == 5
    assert expand(d, p).start_index == 5
    assert expand(d, p, 9).start_index == 5


def test_filtering_expanded_signal_matches_block_form(rng):
    """K applied to expand(decimate(x)) equals the lifted K times E' on blocks"""
    for _ in range(30):
        p = random_pattern(rng, max_M=6)
        K = random_stable(rng, int(rng.integers(1, 4)))
        x = rng.standard_normal(int(rng.integers(2, 30)) * p.M)

        direct = simulate(K, expand(decimate(x, p), p, x.size).samples)[:, 0]

        lifted = lift(K, p.M)
        K_tilde = StateSpaceModel(lifted.A, lifted.B @ selection_matrix(p).T, lifted.C,
                                  lifted.D @ selection_matrix(p).T, lifted.dt)
        blocked = unblock(simulate(K_tilde, block(x, p.M) @ selection_matrix(p).T)).samples
        np.testing.assert_allclose(direct, blocked, atol=1e-10)


def test_rotation_matches_one_step_shift(rng):
    """Delaying x by one step and rotating the pattern keeps the same retained values"""
    for _ in range(30):
        p = random_pattern(rng)
        x = rng.standard_normal(int(rng.integers(2, 20)) * p.M)
        shifted = np.concatenate([[0.0], x])[:x.size]
        rotated = DecimationPattern(p.bits[-1:] + p.bits[:-1])
        original = expand(decimate(x, p), p, x.size).samples
        moved = expand(decimate(shifted, rotated), rotated, x.size).samples
        np.testing.assert_array_equal(moved[1:], original[:-1])


def test_signal_sequence_is_read_only():
    s = SignalSequence([1.0, 2.0])
    with pytest.raises(ValueError):
        s.samples[0] = 3.0
    assert len(s) == 2
    np.testing.assert_array_equal(np.asarray(s), [1.0, 2.0])


def test_csv_round_trip(tmp_path, rng):
    x = rng.standard_normal(50)
    path = tmp_path / "x.csv"
    write_sequence_csv(path, x)
    np.testing.assert_array_equal(read_sequence_csv(path).samples, x)
