#!/usr/bin/env python3
"""
Reconstruction simulation
Decimates a test sequence, interpolates it through the designed filterbank and
measures the error against the delayed original
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np
from scipy import signal

from core import DecimationPattern, DimensionMismatch, InvalidPeriod, StateSpaceModel
from ltisys import simulate
from multirate import SequenceLike, SignalSequence, as_array, block, decimate, expand, selection_matrix, unblock
from synthesis import PolyphaseFilterBank

DEFAULT_RECT_PERIOD = 20
DEFAULT_RECT_AMPLITUDE = 1.0
DEFAULT_BASELINE_TAPS = 31


@dataclass
class SimulationReport:
    """Time responses plus error aggregates over the post-transient window [warmup, end)"""
    input: SignalSequence
    reconstructed: SignalSequence
    abs_error: SignalSequence
    max_abs_error: float
    l2_error: float
    m: int = 0
    warmup: int = 0
    end: Optional[int] = None
    warmup_max_abs_error: float = 0.0
    intersample_max_abs_error: float = 0.0

    def to_csv(self, path: Union[str, Path]) -> None:
        k = np.arange(len(self.input))
        table = np.column_stack([k, self.input.samples, self.reconstructed.samples, self.abs_error.samples])
        np.savetxt(path, table, fmt=['%d', '%.17g', '%.17g', '%.17g'], delimiter=',',
                   header='k,input,reconstructed,abs_error', comments='')

    def summary(self) -> dict:
        return {
            'length': len(self.input),
            'm': self.m,
            'warmup': self.warmup,
            'max_abs_error': self.max_abs_error,
            'l2_error': self.l2_error,
            'warmup_max_abs_error': self.warmup_max_abs_error,
            'intersample_max_abs_error': self.intersample_max_abs_error,
        }


def generate_rect_wave(period: int = DEFAULT_RECT_PERIOD, amplitude: float = DEFAULT_RECT_AMPLITUDE,
                       length: int = 600) -> SignalSequence:
    """Square wave: +amplitude for the first half of each period, -amplitude for the second"""
    if period < 2:
        raise InvalidPeriod(f"period must be at least 2 samples, got {period}")
    if length < period:
        raise InvalidPeriod(f"length {length} is shorter than one period ({period})")
    k = np.arange(length)
    high = (k % period) < (period // 2)
    return SignalSequence(np.where(high, amplitude, -amplitude).astype(float))


def _delayed(x: np.ndarray, m: int) -> np.ndarray:
    ref = np.zeros_like(x)
    if m < x.size:
        ref[m:] = x[:x.size - m]
    return ref


def _intersample_error(ref: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Worst deviation of the held y_k from an original moving monotonically from ref_k to ref_{k+1}"""
    following = np.append(ref[1:], ref[-1:])
    return np.maximum(np.abs(ref - y), np.abs(following - y))


def _report(x: np.ndarray, y: np.ndarray, m: int, warmup: int, end: int) -> SimulationReport:
    ref = _delayed(x, m)
    err = np.abs(ref - y)
    end = min(end, x.size)
    window = err[warmup:end] if warmup < end else np.zeros(0)
    held = _intersample_error(ref, y)[warmup:end] if warmup < end else np.zeros(0)
    head = err[:min(warmup, x.size)]
    return SimulationReport(
        input=SignalSequence(x),
        reconstructed=SignalSequence(y),
        abs_error=SignalSequence(err),
        max_abs_error=float(window.max()) if window.size else 0.0,
        l2_error=float(np.sqrt(np.sum(window ** 2))),
        m=m,
        warmup=warmup,
        end=end,
        warmup_max_abs_error=float(head.max()) if head.size else 0.0,
        intersample_max_abs_error=float(held.max()) if held.size else 0.0,
    )


def filterbank_output(x: SequenceLike, p: DecimationPattern, fb: PolyphaseFilterBank) -> np.ndarray:
    """Sum of the branch filters driven by the retained samples, each placed at its segment start"""
    samples = as_array(x)
    if len(fb.branches) != p.N or tuple(b.delay_index for b in fb.branches) != p.ones_indices:
        raise DimensionMismatch(f"filterbank with {len(fb.branches)} branches does not match pattern {p}")
    T = samples.size
    d = decimate(samples, p).samples
    y = np.zeros(T)
    for k, branch in enumerate(fb.branches):
        u = np.zeros(T)
        picks = d[k::p.N]
        starts = np.arange(picks.size) * p.M
        keep = starts < T
        u[starts[keep]] = picks[keep]
        y += simulate(branch.filter, u)[:, 0]
    return y


def run_reconstruction(x: SequenceLike, p: DecimationPattern, fb: PolyphaseFilterBank,
                       m: int) -> SimulationReport:
    """Decimate, interpolate through the filterbank and compare with x delayed by m"""
    samples = as_array(x)
    y = filterbank_output(samples, p, fb)
    # the last incomplete segment cannot be reconstructed
    end = (samples.size // p.M) * p.M
    return _report(samples, y, m, fb.order + m, end)


def polyphase_reconstruction(x: SequenceLike, p: DecimationPattern, K: StateSpaceModel,
                             m: int = 0) -> SimulationReport:
    """Block form unblock(K E block(x)), on the longest prefix of x that fills whole segments"""
    samples = as_array(x)
    if K.n_inputs != p.N or K.n_outputs != p.M:
        raise DimensionMismatch(f"filter must map {p.N} inputs to {p.M} outputs")
    T = (samples.size // p.M) * p.M
    samples = samples[:T]
    Y = block(samples, p.M) @ selection_matrix(p).T
    y = unblock(simulate(K, Y)).samples
    return _report(samples, y, m, K.n_states + m, T)


def sinc_baseline(x: SequenceLike, p: DecimationPattern,
                  taps: int = DEFAULT_BASELINE_TAPS) -> SimulationReport:
    """Zero-filled expansion followed by a truncated ideal lowpass (cutoff pi N/M, gain M/N)"""
    samples = as_array(x)
    if taps < 1 or taps % 2 == 0:
        raise ValueError(f"baseline needs an odd positive tap count, got {taps}")
    v = expand(decimate(samples, p), p, samples.size).samples
    if p.N == p.M:
        h = signal.unit_impulse(taps, 'mid')
    else:
        h = signal.firwin(taps, p.N / p.M, window='boxcar') * (p.M / p.N)
    y = signal.lfilter(h, [1.0], v)
    delay_steps = (taps - 1) // 2
    return _report(samples, y, delay_steps, taps - 1, samples.size)
