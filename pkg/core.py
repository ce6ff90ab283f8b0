#!/usr/bin/env python3
"""
Core domain types for the nonuniform interpolation toolkit
Decimation patterns, state-space models and design problem descriptions
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np


class MrhinfError(Exception):
    """Base class for every toolkit failure"""


class InvalidInput(MrhinfError, ValueError):
    """Bad user-supplied data (patterns, counts, specs)"""


class AllZeroPattern(InvalidInput):
    pass


class InvalidSymbol(InvalidInput):
    pass


class InvalidBlockSpec(InvalidInput):
    pass


class InvalidSpec(InvalidInput):
    pass


class InvalidCounts(InvalidInput):
    pass


class InvalidPeriod(InvalidInput):
    pass


class LengthNotDivisible(InvalidInput):
    pass


class DimensionMismatch(InvalidInput):
    pass


class DomainMismatch(InvalidInput):
    pass


class NonContinuousInput(InvalidInput):
    pass


class NonDiscreteInput(InvalidInput):
    pass


class UnstableSystem(MrhinfError):
    pass


class BracketFailure(MrhinfError):
    pass


class SingularAtGridPoint(MrhinfError):
    pass


class InfeasibleAtUpperBound(MrhinfError):
    """Even the initial upper bound of the gamma bracket is not achievable"""

    def __init__(self, gamma: float, iterations: Optional[List[Tuple[float, bool]]] = None):
        super().__init__(f"H-infinity problem infeasible at upper bound gamma={gamma:.6g}")
        self.gamma = gamma
        self.iterations = iterations or []


class RiccatiFailure(MrhinfError):
    """A Riccati equation had no admissible solution at the given gamma"""

    def __init__(self, gamma: float, reason: str):
        super().__init__(f"Riccati failure at gamma={gamma:.6g}: {reason}")
        self.gamma = gamma
        self.reason = reason


# ---------------------------------------------------------------------------
# Decimation patterns
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecimationPattern:
    """Binary word of length M; 1 retains a sample of each segment, 0 discards it"""
    bits: Tuple[int, ...]
    M: int = field(init=False)
    N: int = field(init=False)
    ones_indices: Tuple[int, ...] = field(init=False)

    def __post_init__(self):
        bits = tuple(self.bits)
        if len(bits) == 0:
            raise InvalidSymbol("decimation pattern must not be empty")
        for b in bits:
            # bool is excluded on purpose: True/False are not pattern symbols
            if isinstance(b, bool) or b not in (0, 1):
                raise InvalidSymbol(f"pattern entry {b!r} is not 0 or 1")
        bits = tuple(int(b) for b in bits)
        ones = tuple(i for i, b in enumerate(bits) if b == 1)
        if not ones:
            raise AllZeroPattern(f"pattern {''.join(map(str, bits))} retains no samples")
        object.__setattr__(self, 'bits', bits)
        object.__setattr__(self, 'M', len(bits))
        object.__setattr__(self, 'N', len(ones))
        object.__setattr__(self, 'ones_indices', ones)

    @property
    def ratio(self) -> float:
        """Decimation ratio M/N (always >= 1)"""
        return self.M / self.N

    @classmethod
    def from_string(cls, literal: str) -> 'DecimationPattern':
        """Parse the '0'/'1' literal used by the CLI and spec files, e.g. "1100" """
        literal = literal.strip().replace(' ', '').replace(',', '')
        if literal.startswith('[') and literal.endswith(']'):
            literal = literal[1:-1]
        if not literal:
            raise InvalidSymbol("empty pattern literal")
        bits = []
        for ch in literal:
            if ch not in '01':
                raise InvalidSymbol(f"pattern literal contains {ch!r}")
            bits.append(int(ch))
        return cls(tuple(bits))

    def __str__(self) -> str:
        return ''.join(str(b) for b in self.bits)

    def rotate(self, k: int = 1) -> 'DecimationPattern':
        """Cyclic rotation to the left by k positions"""
        k %= self.M
        return DecimationPattern(self.bits[k:] + self.bits[:k])


def pattern_from_bits(bits: Sequence[int]) -> DecimationPattern:
    """Build a pattern from a list of 0/1 entries"""
    return DecimationPattern(tuple(bits))


def block_pattern(R1: int, R2: int) -> DecimationPattern:
    """Block decimation: keep the first R1 samples of each R2-sample segment"""
    if R1 < 1 or R1 > R2:
        raise InvalidBlockSpec(f"block decimation needs 1 <= R1 <= R2, got R1={R1}, R2={R2}")
    return DecimationPattern((1,) * R1 + (0,) * (R2 - R1))


def canonical_rotation(p: DecimationPattern) -> DecimationPattern:
    """Lexicographically smallest cyclic rotation of the pattern"""
    best = min(p.bits[k:] + p.bits[:k] for k in range(p.M))
    return DecimationPattern(best)


# ---------------------------------------------------------------------------
# State-space models
# ---------------------------------------------------------------------------

def _as_matrix(value, rows: Optional[int] = None, cols: Optional[int] = None) -> np.ndarray:
    arr = np.array(value, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1) if arr.size else arr.reshape(0, 0)
    if arr.size == 0 and rows is not None and cols is not None:
        arr = np.zeros((rows, cols))
    return arr


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """Real quadruple (A, B, C, D); dt=None means continuous time, otherwise the sample period"""
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    dt: Optional[float] = None

    def __post_init__(self):
        D = _as_matrix(self.D)
        n_y, n_u = D.shape
        A = _as_matrix(self.A, 0, 0)
        n_x = A.shape[0]
        B = _as_matrix(self.B, n_x, n_u)
        C = _as_matrix(self.C, n_y, n_x)

        if A.shape != (n_x, n_x):
            raise DimensionMismatch(f"A must be square, got {A.shape}")
        if B.shape != (n_x, n_u):
            raise DimensionMismatch(f"B has shape {B.shape}, expected {(n_x, n_u)}")
        if C.shape != (n_y, n_x):
            raise DimensionMismatch(f"C has shape {C.shape}, expected {(n_y, n_x)}")
        if self.dt is not None and not self.dt > 0:
            raise InvalidSpec(f"sample period must be positive, got {self.dt}")

        for name, mat in (('A', A), ('B', B), ('C', C), ('D', D)):
            mat.setflags(write=False)
            object.__setattr__(self, name, mat)

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.D.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.D.shape[0]

    @property
    def is_discrete(self) -> bool:
        return self.dt is not None

    @property
    def domain(self) -> str:
        return 'continuous' if self.dt is None else f'discrete({self.dt:g})'

    @property
    def matrices(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        return self.A, self.B, self.C, self.D

    def poles(self) -> np.ndarray:
        if self.n_states == 0:
            return np.zeros(0, dtype=complex)
        return np.linalg.eigvals(self.A)

    def to_dict(self) -> Dict[str, Any]:
        """Row-major arrays with explicit shape fields"""
        return {
            'A': self.A.tolist(),
            'B': self.B.tolist(),
            'C': self.C.tolist(),
            'D': self.D.tolist(),
            'n_states': self.n_states,
            'n_inputs': self.n_inputs,
            'n_outputs': self.n_outputs,
            'dt': self.dt,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any], dt: Optional[float] = None) -> 'StateSpaceModel':
        D = np.array(data['D'], dtype=float)
        if 'n_outputs' in data and 'n_inputs' in data:
            D = D.reshape(int(data['n_outputs']), int(data['n_inputs']))
        n_y, n_u = _as_matrix(D).shape
        n_x = int(data['n_states']) if 'n_states' in data else _as_matrix(data.get('A', [])).shape[0]
        A = np.array(data.get('A', []), dtype=float).reshape(n_x, n_x)
        B = np.array(data.get('B', []), dtype=float).reshape(n_x, n_u)
        C = np.array(data.get('C', []), dtype=float).reshape(n_y, n_x)
        period = data.get('dt', dt)
        return cls(A, B, C, D.reshape(n_y, n_u), period)


# ---------------------------------------------------------------------------
# Design problems and results
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DesignSpec:
    """Problem data: pattern, sampling period h, delay steps m (L = m*h), fast ratio n, signal model F"""
    pattern: DecimationPattern
    h: float
    m: int
    n: int
    F: StateSpaceModel

    def __post_init__(self):
        if not self.h > 0:
            raise InvalidSpec(f"sampling period h must be positive, got {self.h}")
        if int(self.m) != self.m or self.m < 0:
            raise InvalidSpec(f"delay steps m must be a non-negative integer, got {self.m}")
        if int(self.n) != self.n or self.n < 1:
            raise InvalidSpec(f"fast-discretization ratio n must be a positive integer, got {self.n}")
        object.__setattr__(self, 'm', int(self.m))
        object.__setattr__(self, 'n', int(self.n))
        F = self.F
        if F.is_discrete:
            raise InvalidSpec("signal model F must be continuous-time")
        if F.n_inputs != 1 or F.n_outputs != 1:
            raise InvalidSpec(f"signal model F must be SISO, got {F.n_outputs}x{F.n_inputs}")
        if np.any(F.D != 0):
            raise InvalidSpec("signal model F must be strictly proper (D = 0)")
        if F.n_states and np.max(np.linalg.eigvals(F.A).real) >= 0:
            raise InvalidSpec("signal model F must be stable")

    @property
    def L(self) -> float:
        """Reconstruction delay in seconds"""
        return self.m * self.h

    def with_pattern(self, pattern: DecimationPattern, m: Optional[int] = None) -> 'DesignSpec':
        return DesignSpec(pattern, self.h, self.m if m is None else m, self.n, self.F)

    def to_dict(self) -> Dict[str, Any]:
        F = self.F
        return {
            'pattern': str(self.pattern),
            'h': self.h,
            'm': self.m,
            'n': self.n,
            'F': {'A': F.A.tolist(), 'B': F.B.tolist(), 'C': F.C.tolist(), 'D': F.D.tolist()},
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'DesignSpec':
        try:
            pattern = data['pattern']
            if isinstance(pattern, str):
                pattern = DecimationPattern.from_string(pattern)
            else:
                pattern = pattern_from_bits(pattern)
            F = StateSpaceModel.from_dict(data['F'])
            if F.is_discrete:
                raise InvalidSpec("signal model F must be continuous-time")
            return cls(pattern, float(data['h']), data['m'], data['n'], F)
        except KeyError as e:
            raise InvalidSpec(f"design spec is missing field {e}") from e
        except (TypeError, ValueError) as e:
            if isinstance(e, MrhinfError):
                raise
            raise InvalidSpec(f"malformed design spec: {e}") from e


def first_order_model(time_constant: float = 10.0) -> StateSpaceModel:
    """F(s) = 1/(T s + 1) realized as A=-1/T, B=1, C=1/T"""
    a = 1.0 / time_constant
    return StateSpaceModel([[-a]], [[1.0]], [[a]], [[0.0]])


@dataclass
class SynthesisResult:
    """Optimal filter K (N inputs -> M outputs), its gamma level and verified norm J"""
    filter: StateSpaceModel
    gamma: float
    J: float
    iterations: List[Tuple[float, bool]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'filter': self.filter.to_dict(),
            'gamma': self.gamma,
            'J': self.J,
            'iterations': [{'gamma': g, 'feasible': bool(ok)} for g, ok in self.iterations],
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SynthesisResult':
        return cls(
            filter=StateSpaceModel.from_dict(data['filter']),
            gamma=float(data['gamma']),
            J=float(data['J']),
            iterations=[(float(it['gamma']), bool(it['feasible'])) for it in data.get('iterations', [])],
        )
