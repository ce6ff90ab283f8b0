#!/usr/bin/env python3
"""
Multirate operators for nonuniform decimation
Decimator, expander, polyphase blocking and the selection matrix E
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from core import DecimationPattern, LengthNotDivisible


@dataclass(frozen=True, eq=False)
class SignalSequence:
    """Finite truncation {x_0, x_1, ...} of a discrete-time signal"""
    samples: np.ndarray
    start_index: int = 0

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=float).ravel().copy()
        samples.setflags(write=False)
        object.__setattr__(self, 'samples', samples)
        if self.start_index < 0:
            raise ValueError("start_index must be non-negative")

    def __len__(self) -> int:
        return self.samples.size

    def __array__(self, dtype=None, copy=None):
        return self.samples if dtype is None else self.samples.astype(dtype)


SequenceLike = Union[SignalSequence, np.ndarray, list]


def as_array(x: SequenceLike) -> np.ndarray:
    if isinstance(x, SignalSequence):
        return x.samples
    return np.asarray(x, dtype=float).ravel()


@dataclass(frozen=True, eq=False)
class SelectionMatrix:
    """N x M 0/1 matrix E picking the retained positions of a segment"""
    entries: np.ndarray

    @property
    def T(self) -> np.ndarray:
        return self.entries.T


def _retained_positions(p: DecimationPattern, length: int) -> np.ndarray:
    n_segments = -(-length // p.M)
    positions = (np.arange(n_segments)[:, None] * p.M + np.array(p.ones_indices)[None, :]).ravel()
    return positions[positions < length]


def decimate(x: SequenceLike, p: DecimationPattern) -> SignalSequence:
    """Keep the samples marked 1 in every length-M segment (trailing partial segment included)"""
    samples = as_array(x)
    start = x.start_index if isinstance(x, SignalSequence) else 0
    return SignalSequence(samples[_retained_positions(p, samples.size)], start)


def expand(y: SequenceLike, p: DecimationPattern, length: Optional[int] = None) -> SignalSequence:
    """Put each group of N samples back on the M-sample grid, zeros at discarded positions

    Without `length` complete groups fill whole segments and a trailing partial group
    stops at its last retained position. Pass the original length to get exactly that
    many samples back.
    """
    samples = as_array(y)
    full, rem = divmod(samples.size, p.N)
    if length is None:
        length = full * p.M + (p.ones_indices[rem - 1] + 1 if rem else 0)
    elif length < 0 or _retained_positions(p, length).size != samples.size:
        raise LengthNotDivisible(
            f"{samples.size} retained samples do not come from a length-{length} sequence under {p}")
    out = np.zeros(length)
    positions = _retained_positions(p, (full + 1) * p.M)[:samples.size]
    out[positions] = samples
    start = y.start_index if isinstance(y, SignalSequence) else 0
    return SignalSequence(out, start)


def selection_matrix(p: DecimationPattern) -> SelectionMatrix:
    E = np.zeros((p.N, p.M))
    E[np.arange(p.N), p.ones_indices] = 1.0
    E.setflags(write=False)
    return SelectionMatrix(E)


def block(x: SequenceLike, M: int) -> np.ndarray:
    """Polyphase blocking: rows are consecutive M-vectors (x_{kM}, ..., x_{kM+M-1})"""
    samples = as_array(x)
    if M < 1:
        raise ValueError(f"block size must be positive, got {M}")
    if samples.size % M:
        raise LengthNotDivisible(f"length {samples.size} is not a multiple of {M}; truncate first")
    return samples.reshape(-1, M).copy()


def unblock(v: np.ndarray) -> SignalSequence:
    """Inverse of block: concatenate the vectors back into a scalar sequence"""
    return SignalSequence(np.asarray(v, dtype=float).reshape(-1))


def read_sequence_csv(path: Union[str, Path]) -> SignalSequence:
    """Single-column CSV, one sample per line"""
    data = np.loadtxt(path, delimiter=',', ndmin=1, comments='#')
    return SignalSequence(data)


def write_sequence_csv(path: Union[str, Path], x: SequenceLike) -> None:
    np.savetxt(path, as_array(x), fmt='%.17g')
