#!/usr/bin/env python3
"""
State-space algebra for the interpolation design
Series/parallel composition, step-invariant discretization, discrete lifting,
frequency response and discrete-time H-infinity norm
"""

from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg, signal

from core import (
    BracketFailure, DimensionMismatch, DomainMismatch, NonContinuousInput,
    NonDiscreteInput, SingularAtGridPoint, StateSpaceModel, UnstableSystem,
)

DEFAULT_NORM_TOL = 1e-6
DEFAULT_GRID = 2048
UNIT_CIRCLE_TOL = 1e-8


@dataclass
class FrequencyResponseCurve:
    """Largest singular value of G(e^{jw}) on a grid over [0, pi]"""
    omega: np.ndarray
    gain: np.ndarray
    skipped: List[float] = field(default_factory=list)

    @property
    def points(self) -> List[Tuple[float, float]]:
        return list(zip(self.omega.tolist(), self.gain.tolist()))

    def peak(self) -> Tuple[float, float]:
        k = int(np.argmax(self.gain))
        return float(self.omega[k]), float(self.gain[k])

    def to_csv(self, path: Union[str, Path]) -> None:
        np.savetxt(path, np.column_stack([self.omega, self.gain]), fmt='%.17g',
                   delimiter=',', header='omega,gain', comments='')


# ---------------------------------------------------------------------------
# Construction and composition
# ---------------------------------------------------------------------------

def _same_domain(G: StateSpaceModel, H: StateSpaceModel) -> None:
    if G.is_discrete != H.is_discrete:
        raise DomainMismatch(f"cannot combine {G.domain} with {H.domain}")
    if G.is_discrete and not np.isclose(G.dt, H.dt, rtol=1e-12, atol=0.0):
        raise DomainMismatch(f"sample periods differ: {G.dt} vs {H.dt}")


def gain(D, dt: Optional[float] = 1.0) -> StateSpaceModel:
    """Static system y = D u"""
    D = np.atleast_2d(np.asarray(D, dtype=float))
    return StateSpaceModel(np.zeros((0, 0)), np.zeros((0, D.shape[1])),
                           np.zeros((D.shape[0], 0)), D, dt)


def delay(k: int, dt: float = 1.0) -> StateSpaceModel:
    """k-state shift register with transfer function z^{-k}"""
    if k < 0:
        raise ValueError(f"delay must be non-negative, got {k}")
    if k == 0:
        return gain([[1.0]], dt)
    A = np.eye(k, k=-1)
    B = np.zeros((k, 1))
    B[0, 0] = 1.0
    C = np.zeros((1, k))
    C[0, -1] = 1.0
    return StateSpaceModel(A, B, C, [[0.0]], dt)


def series(G: StateSpaceModel, H: StateSpaceModel) -> StateSpaceModel:
    """Cascade u -> H -> G -> y (transfer function G*H)"""
    _same_domain(G, H)
    if G.n_inputs != H.n_outputs:
        raise DimensionMismatch(f"G expects {G.n_inputs} inputs but H has {H.n_outputs} outputs")
    nh, ng = H.n_states, G.n_states
    A = np.block([
        [H.A, np.zeros((nh, ng))],
        [G.B @ H.C, G.A],
    ])
    B = np.vstack([H.B, G.B @ H.D])
    C = np.hstack([G.D @ H.C, G.C])
    D = G.D @ H.D
    return StateSpaceModel(A, B, C, D, G.dt)


def parallel(G: StateSpaceModel, H: StateSpaceModel) -> StateSpaceModel:
    """Sum y = G u + H u"""
    _same_domain(G, H)
    if (G.n_inputs, G.n_outputs) != (H.n_inputs, H.n_outputs):
        raise DimensionMismatch("parallel connection needs equal channel counts")
    A = linalg.block_diag(G.A, H.A)
    B = np.vstack([G.B, H.B])
    C = np.hstack([G.C, H.C])
    return StateSpaceModel(A, B, C, G.D + H.D, G.dt)


def append(*systems: StateSpaceModel) -> StateSpaceModel:
    """Block-diagonal stacking of independent channels"""
    first = systems[0]
    for other in systems[1:]:
        _same_domain(first, other)
    A = linalg.block_diag(*[s.A for s in systems])
    B = linalg.block_diag(*[s.B for s in systems])
    C = linalg.block_diag(*[s.C for s in systems])
    D = linalg.block_diag(*[s.D for s in systems])
    return StateSpaceModel(A, B, C, D, first.dt)


def transpose(G: StateSpaceModel) -> StateSpaceModel:
    return StateSpaceModel(G.A.T, G.C.T, G.B.T, G.D.T, G.dt)


def scale(G: StateSpaceModel, left=None, right=None) -> StateSpaceModel:
    """Pre-/post-multiply by constant matrices: left * G * right"""
    B, C, D = G.B, G.C, G.D
    if right is not None:
        right = np.atleast_2d(right)
        B, D = B @ right, D @ right
    if left is not None:
        left = np.atleast_2d(left)
        C, D = left @ C, left @ D
    return StateSpaceModel(G.A, B, C, D, G.dt)


def is_stable(G: StateSpaceModel, margin: float = 0.0) -> bool:
    if G.n_states == 0:
        return True
    eigs = np.linalg.eigvals(G.A)
    if G.is_discrete:
        return bool(np.max(np.abs(eigs)) < 1.0 - margin)
    return bool(np.max(eigs.real) < -margin)


# ---------------------------------------------------------------------------
# Discretization and lifting
# ---------------------------------------------------------------------------

def c2d_step_invariant(F: StateSpaceModel, tau: float) -> StateSpaceModel:
    """Hold-sample equivalent (e^{A tau}, int_0^tau e^{At} B dt, C, D) with period tau"""
    if F.is_discrete:
        raise NonContinuousInput("step-invariant discretization needs a continuous-time model")
    if not tau > 0:
        raise ValueError(f"discretization period must be positive, got {tau}")
    n_x, n_u = F.n_states, F.n_inputs
    aug = np.zeros((n_x + n_u, n_x + n_u))
    aug[:n_x, :n_x] = F.A
    aug[:n_x, n_x:] = F.B
    # expm is scaling-and-squaring Pade; one exponential gives both blocks
    phi = linalg.expm(aug * tau)
    return StateSpaceModel(phi[:n_x, :n_x], phi[:n_x, n_x:], F.C, F.D, tau)


def lift(G: StateSpaceModel, n: int) -> StateSpaceModel:
    """Discrete lifting: the n-frame blocked realization of G"""
    if not G.is_discrete:
        raise NonDiscreteInput("lifting needs a discrete-time model")
    if n < 1:
        raise ValueError(f"lifting factor must be positive, got {n}")
    if n == 1:
        return G
    A, B, C, D = G.matrices
    n_x, n_u, n_y = G.n_states, G.n_inputs, G.n_outputs

    powers = [np.eye(n_x)]
    for _ in range(n):
        powers.append(powers[-1] @ A)

    A_l = powers[n]
    B_l = np.hstack([powers[n - 1 - j] @ B for j in range(n)]) if n_x else np.zeros((0, n * n_u))
    C_l = np.vstack([C @ powers[i] for i in range(n)]) if n_x else np.zeros((n * n_y, 0))
    D_l = np.zeros((n * n_y, n * n_u))
    for i in range(n):
        D_l[i * n_y:(i + 1) * n_y, i * n_u:(i + 1) * n_u] = D
        for j in range(i):
            D_l[i * n_y:(i + 1) * n_y, j * n_u:(j + 1) * n_u] = C @ powers[i - 1 - j] @ B
    return StateSpaceModel(A_l, B_l, C_l, D_l, n * G.dt)


def lift_gain(D, n: int, dt: float) -> StateSpaceModel:
    """Lifted static gain: blockdiag(D, ..., D); dt is the lifted period"""
    D = np.atleast_2d(np.asarray(D, dtype=float))
    return gain(linalg.block_diag(*([D] * n)), dt)


# ---------------------------------------------------------------------------
# Time and frequency domain evaluation
# ---------------------------------------------------------------------------

def impulse_response(G: StateSpaceModel, length: int) -> np.ndarray:
    """Markov parameters h[0]=D, h[k]=C A^{k-1} B, shape (length, outputs, inputs)"""
    h = np.zeros((length, G.n_outputs, G.n_inputs))
    if length == 0:
        return h
    h[0] = G.D
    AkB = G.B
    for k in range(1, length):
        h[k] = G.C @ AkB
        AkB = G.A @ AkB
    return h


def simulate(G: StateSpaceModel, u) -> np.ndarray:
    """Zero-initial-state response; u has shape (T,) or (T, inputs), result (T, outputs)"""
    if not G.is_discrete:
        raise NonDiscreteInput("simulation is only provided for discrete-time models")
    u = np.asarray(u, dtype=float)
    if u.ndim == 1:
        u = u[:, None]
    if u.shape[1] != G.n_inputs:
        raise DimensionMismatch(f"input has {u.shape[1]} channels, system expects {G.n_inputs}")
    if u.shape[0] == 0:
        return np.zeros((0, G.n_outputs))
    if G.n_states == 0:
        return u @ G.D.T
    _, y, _ = signal.dlsim((G.A, G.B, G.C, G.D, G.dt), u)
    return np.asarray(y).reshape(u.shape[0], G.n_outputs)


def _gains_at(G: StateSpaceModel, omegas: np.ndarray, chunk: int = 4096) -> np.ndarray:
    """Largest singular value of G(e^{jw}); NaN where e^{jw} is (numerically) a pole"""
    omegas = np.asarray(omegas, dtype=float)
    out = np.empty(omegas.size)
    A, B, C, D = G.matrices
    n_x = G.n_states
    if n_x == 0:
        out[:] = np.linalg.norm(D, 2) if D.size else 0.0
        return out
    eye = np.eye(n_x)
    for start in range(0, omegas.size, chunk):
        w = omegas[start:start + chunk]
        z = np.exp(1j * w)
        pencil = z[:, None, None] * eye[None, :, :] - A[None, :, :]
        with np.errstate(all='ignore'):
            try:
                X = np.linalg.solve(pencil, np.broadcast_to(B, (w.size,) + B.shape))
                singular = np.zeros(w.size, dtype=bool)
            except np.linalg.LinAlgError:
                X = np.empty((w.size,) + B.shape, dtype=complex)
                singular = np.zeros(w.size, dtype=bool)
                for i in range(w.size):
                    try:
                        X[i] = np.linalg.solve(pencil[i], B)
                    except np.linalg.LinAlgError:
                        singular[i] = True
                        X[i] = 0.0
        resp = C[None, :, :] @ X + D[None, :, :]
        if resp.shape[1] == 1 or resp.shape[2] == 1:
            vals = np.linalg.norm(resp.reshape(w.size, -1), axis=1)
        else:
            vals = np.linalg.svd(resp, compute_uv=False)[:, 0]
        vals[singular | ~np.isfinite(vals)] = np.nan
        out[start:start + chunk] = vals
    return out


def frequency_response(G: StateSpaceModel, n_points: int = DEFAULT_GRID,
                       strict: bool = False) -> FrequencyResponseCurve:
    """Uniform grid over [0, pi]; grid points sitting on poles are skipped and reported"""
    if not G.is_discrete:
        raise NonDiscreteInput("frequency_response evaluates discrete-time models only")
    if n_points < 2:
        raise ValueError("need at least two grid points")
    omega = np.linspace(0.0, np.pi, n_points)
    gains = _gains_at(G, omega)
    bad = np.isnan(gains)
    if bad.any():
        skipped = omega[bad].tolist()
        if strict:
            raise SingularAtGridPoint(f"e^(jw) is a pole of G at w={skipped[0]:.6g}")
        print(f"⚠️  Skipped {len(skipped)} grid point(s) on poles of G")
        return FrequencyResponseCurve(omega[~bad], gains[~bad], skipped)
    return FrequencyResponseCurve(omega, gains)


# ---------------------------------------------------------------------------
# H-infinity norm
# ---------------------------------------------------------------------------

def _unit_circle_angles(G: StateSpaceModel, gamma: float, tol: float) -> np.ndarray:
    """Angles of the unit-circle eigenvalues of the bounded-real symplectic pencil at gamma"""
    A, B, C, D = G.matrices
    n_x, n_u = G.n_states, G.n_inputs
    Q = C.T @ C
    S = C.T @ D
    R = D.T @ D - gamma ** 2 * np.eye(n_u)

    # extended pencil, no inverse of A or R needed
    size = 2 * n_x + n_u
    H = np.zeros((size, size))
    J = np.zeros((size, size))
    H[:n_x, :n_x] = A
    H[:n_x, 2 * n_x:] = B
    H[n_x:2 * n_x, :n_x] = -Q
    H[n_x:2 * n_x, n_x:2 * n_x] = np.eye(n_x)
    H[n_x:2 * n_x, 2 * n_x:] = -S
    H[2 * n_x:, :n_x] = S.T
    H[2 * n_x:, 2 * n_x:] = R
    J[:n_x, :n_x] = np.eye(n_x)
    J[n_x:2 * n_x, n_x:2 * n_x] = A.T
    J[2 * n_x:, n_x:2 * n_x] = -B.T

    with np.errstate(all='ignore'):
        eigs = linalg.eigvals(H, J)
    eigs = eigs[np.isfinite(eigs)]
    on_circle = eigs[np.abs(np.abs(eigs) - 1.0) < tol]
    return np.unique(np.round(np.abs(np.angle(on_circle)), 14))


def _hankel_upper_bound(G: StateSpaceModel) -> float:
    A, B, C, D = G.matrices
    Wc = linalg.solve_discrete_lyapunov(A, B @ B.T)
    Wo = linalg.solve_discrete_lyapunov(A.T, C.T @ C)
    hsv = np.sqrt(np.clip(np.linalg.eigvals(Wc @ Wo).real, 0.0, None))
    return float(np.linalg.norm(D, 2) + 2.0 * np.sum(hsv))


def hinf_norm(G: StateSpaceModel, tol: float = DEFAULT_NORM_TOL,
              unit_circle_tol: float = UNIT_CIRCLE_TOL, grid: int = 256,
              max_bracket_steps: int = 60) -> float:
    """Discrete-time H-infinity norm by gamma-bisection on the symplectic pencil"""
    if not G.is_discrete:
        raise NonDiscreteInput("hinf_norm is implemented for discrete-time models")
    if tol <= 0:
        raise ValueError("tolerance must be positive")
    d_norm = float(np.linalg.norm(G.D, 2)) if G.D.size else 0.0
    if G.n_states == 0 or G.n_inputs == 0 or G.n_outputs == 0:
        return d_norm
    if not is_stable(G):
        rho = np.max(np.abs(np.linalg.eigvals(G.A)))
        raise UnstableSystem(f"spectral radius {rho:.6g} >= 1")

    # certified lower bound from a frequency grid
    sampled = _gains_at(G, np.linspace(0.0, np.pi, grid))
    lower = max(d_norm, float(np.nanmax(sampled)) if np.any(np.isfinite(sampled)) else 0.0)
    # ||D|| + 2 sum of Hankel singular values bounds the norm from above
    upper = max(_hankel_upper_bound(G), lower)
    if upper == 0.0:
        return 0.0
    upper *= 1.0 + 10 * tol

    # no unit-circle eigenvalue at level upper certifies the bound
    for _ in range(max_bracket_steps):
        if _unit_circle_angles(G, upper, unit_circle_tol).size == 0:
            break
        lower = upper
        upper *= 2.0
    else:
        raise BracketFailure(f"no certified upper bound found below {upper:.6g}")

    # bisection on [lower, upper]; a crossing raises lower to the largest gain found
    while upper - lower > tol * max(lower, np.finfo(float).tiny):
        gamma = 0.5 * (lower + upper)
        angles = _unit_circle_angles(G, gamma, unit_circle_tol)
        if angles.size:
            # gamma is a singular value somewhere; evaluate between crossings as well
            points = angles if angles.size == 1 else np.concatenate([angles, 0.5 * (angles[1:] + angles[:-1])])
            found = _gains_at(G, points)
            lower = max(gamma, float(np.nanmax(found)) if np.any(np.isfinite(found)) else gamma)
            upper = max(upper, lower)
        else:
            upper = gamma
    return 0.5 * (lower + upper)
