"""Shared fixtures for the interpolation filter tests"""

import numpy as np
import pytest

from core import DecimationPattern, DesignSpec, StateSpaceModel, first_order_model


def random_stable(rng: np.random.Generator, n_x: int, n_u: int = 1, n_y: int = 1,
                  radius: float = 0.9, dt: float = 1.0) -> StateSpaceModel:
    """Random discrete system with spectral radius `radius`"""
    A = rng.standard_normal((n_x, n_x))
    rho = np.max(np.abs(np.linalg.eigvals(A)))
    A *= radius / rho
    B = rng.standard_normal((n_x, n_u))
    C = rng.standard_normal((n_y, n_x))
    D = rng.standard_normal((n_y, n_u))
    return StateSpaceModel(A, B, C, D, dt)


def random_pattern(rng: np.random.Generator, max_M: int = 8) -> DecimationPattern:
    M = int(rng.integers(1, max_M + 1))
    bits = rng.integers(0, 2, size=M)
    bits[rng.integers(0, M)] = 1
    return DecimationPattern(tuple(int(b) for b in bits))


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def signal_model():
    return first_order_model(10.0)


@pytest.fixture
def example_spec(signal_model):
    """Pattern 110, h=1, delay 6 samples, n=4"""
    return DesignSpec(DecimationPattern.from_string("110"), 1.0, 6, 4, signal_model)


@pytest.fixture
def table_spec(signal_model):
    """h=1, n=4 base for the pattern tables (pattern and delay replaced per class)"""
    return DesignSpec(DecimationPattern.from_string("1100"), 1.0, 4, 4, signal_model)


def gap_error_floor(gap: int, time_constant: float = 10.0) -> float:
    """Worst-case error for F(s)=1/(Ts+1), h=1, across `gap` periods between retained samples

    An input whose state leaves zero and returns to zero inside the gap is invisible to any
    interpolator; sin(pi t/gap) is the extremal such state, which attains this value.
    """
    return 1.0 / np.sqrt((time_constant * np.pi / gap) ** 2 + 1.0)
