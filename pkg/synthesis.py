#!/usr/bin/env python3
"""
H-infinity optimal interpolation filter synthesis
Builds the fast-discretized generalized plant, runs the discrete-time
gamma-iteration and turns the optimal filter into a polyphase filterbank
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from core import (
    DecimationPattern, DesignSpec, DimensionMismatch, DomainMismatch,
    InfeasibleAtUpperBound, RiccatiFailure, StateSpaceModel, SynthesisResult,
)
from ltisys import (
    FrequencyResponseCurve, c2d_step_invariant, delay, frequency_response, gain,
    hinf_norm, is_stable, lift, lift_gain, scale, series, DEFAULT_GRID, DEFAULT_NORM_TOL,
)
from multirate import selection_matrix

DEFAULT_GAMMA_TOL = 1e-4
DEFAULT_REGULARIZATION = 1e-6
GAMMA_FLOOR = 1e-9
PSD_TOL = 1e-8
STABILITY_MARGIN = 1e-9


@dataclass
class GeneralizedPlant:
    """Partitioned plant [[G11, G12], [G21, 0]]; w: nM, u: M, e: nM, y: N channels"""
    G11: StateSpaceModel
    G12: StateSpaceModel
    G21: StateSpaceModel
    dims: Tuple[int, int, int, int]  # (n, M, N, m)

    @property
    def period(self) -> float:
        return self.G11.dt

    @property
    def n_states(self) -> int:
        return self.G11.n_states + self.G12.n_states + self.G21.n_states

    def partition(self) -> Dict[str, np.ndarray]:
        """Single realization: x = [x11; x12; x21] shared by all channels"""
        G11, G12, G21 = self.G11, self.G12, self.G21
        n1, n2, n3 = G11.n_states, G12.n_states, G21.n_states
        n_w, n_u = G11.n_inputs, G12.n_inputs
        n_e, n_y = G11.n_outputs, G21.n_outputs
        return {
            'A': linalg.block_diag(G11.A, G12.A, G21.A),
            'B1': np.vstack([G11.B, np.zeros((n2, n_w)), G21.B]),
            'B2': np.vstack([np.zeros((n1, n_u)), G12.B, np.zeros((n3, n_u))]),
            'C1': np.hstack([G11.C, G12.C, np.zeros((n_e, n3))]),
            'C2': np.hstack([np.zeros((n_y, n1 + n2)), G21.C]),
            'D11': G11.D.copy(),
            'D12': G12.D.copy(),
            'D21': G21.D.copy(),
        }


@dataclass
class FilterBranch:
    delay_index: int
    filter: StateSpaceModel


@dataclass
class PolyphaseFilterBank:
    """Branch filters Phi_{i_1}(z) ... Phi_{i_N}(z) of the nonuniform filterbank"""
    branches: List[FilterBranch]
    pattern: DecimationPattern
    order: int = 0

    @property
    def phis(self) -> List[StateSpaceModel]:
        return [b.filter for b in self.branches]

    def to_list(self) -> List[Dict[str, Any]]:
        out = []
        for b in self.branches:
            entry = {'delay_index': b.delay_index}
            entry.update(b.filter.to_dict())
            out.append(entry)
        return out


# ---------------------------------------------------------------------------
# Plant assembly
# ---------------------------------------------------------------------------

def build_plant(spec: DesignSpec) -> GeneralizedPlant:
    """Fast-discretized plant: G11 = L_M{G1n}, G12 = -L_M{H}, G21 = E L_M{G3n}"""
    p, h, m, n = spec.pattern, spec.h, spec.m, spec.n
    tau = h / n
    Fd = c2d_step_invariant(spec.F, tau)

    G1n = lift(series(delay(m * n, tau), Fd), n)
    H = np.ones((n, 1))
    S = np.zeros((1, n))
    S[0, 0] = 1.0
    G3n = series(gain(S, h), lift(Fd, n))

    G11 = lift(G1n, p.M)
    G12 = lift_gain(-H, p.M, p.M * h)
    G21 = scale(lift(G3n, p.M), left=selection_matrix(p).entries)
    return GeneralizedPlant(G11, G12, G21, (n, p.M, p.N, m))


def _lft(P: Dict[str, np.ndarray], Ak, Bk, Ck, Dk) -> Tuple[np.ndarray, ...]:
    A, B1, B2 = P['A'], P['B1'], P['B2']
    C1, C2 = P['C1'], P['C2']
    D11, D12, D21 = P['D11'], P['D12'], P['D21']
    A_cl = np.block([
        [A + B2 @ Dk @ C2, B2 @ Ck],
        [Bk @ C2, Ak],
    ])
    B_cl = np.vstack([B1 + B2 @ Dk @ D21, Bk @ D21])
    C_cl = np.hstack([C1 + D12 @ Dk @ C2, D12 @ Ck])
    D_cl = D11 + D12 @ Dk @ D21
    return A_cl, B_cl, C_cl, D_cl


def close_loop(plant: GeneralizedPlant, K: StateSpaceModel) -> StateSpaceModel:
    """T_n = G11 + G12 K G21 (the minus sign already sits in G12)"""
    _, M, N, _ = plant.dims
    if K.n_inputs != N or K.n_outputs != M:
        raise DimensionMismatch(f"filter must map {N} inputs to {M} outputs, got "
                                f"{K.n_inputs} -> {K.n_outputs}")
    if K.n_states and (not K.is_discrete or not np.isclose(K.dt, plant.period, rtol=1e-12, atol=0.0)):
        raise DomainMismatch(f"filter runs at {K.domain}, plant at period {plant.period:g}")
    return StateSpaceModel(*_lft(plant.partition(), *K.matrices), plant.period)


# ---------------------------------------------------------------------------
# Discrete-time H-infinity gamma-iteration
# ---------------------------------------------------------------------------

def _full_information(A, B1, B2, C1, D11, D12, gamma: float):
    """Control Riccati of the full-information game; returns X, F = [Fw; Fu] and V = R + B'XB"""
    m1 = B1.shape[1]
    m2 = B2.shape[1]
    B = np.hstack([B1, B2])
    D1 = np.hstack([D11, D12])
    R = D1.T @ D1
    R[:m1, :m1] -= gamma ** 2 * np.eye(m1)
    R = 0.5 * (R + R.T)
    Q = C1.T @ C1
    Q = 0.5 * (Q + Q.T)
    S = C1.T @ D1
    try:
        X = linalg.solve_discrete_are(A, B, Q, R, s=S)
    except (np.linalg.LinAlgError, ValueError) as e:
        raise RiccatiFailure(gamma, f"DARE: {e}")
    if not np.all(np.isfinite(X)):
        raise RiccatiFailure(gamma, "DARE returned non-finite entries")
    X = 0.5 * (X + X.T)

    eig_x = np.linalg.eigvalsh(X) if X.size else np.zeros(0)
    if eig_x.size and eig_x.min() < -PSD_TOL * max(1.0, np.abs(eig_x).max()):
        raise RiccatiFailure(gamma, f"Riccati solution not PSD (min eig {eig_x.min():.3g})")

    V = R + B.T @ X @ B
    V = 0.5 * (V + V.T)
    F = -np.linalg.solve(V, B.T @ X @ A + S.T)
    if A.size and np.max(np.abs(np.linalg.eigvals(A + B @ F))) >= 1.0:
        raise RiccatiFailure(gamma, "Riccati solution is not stabilizing")

    V11, V12 = V[:m1, :m1], V[:m1, m1:]
    V21, V22 = V[m1:, :m1], V[m1:, m1:]
    try:
        Rc = linalg.cholesky(V22)
    except np.linalg.LinAlgError:
        raise RiccatiFailure(gamma, "control weighting R + B2'XB2 not positive definite")
    nabla = V11 - V12 @ linalg.cho_solve((Rc, False), V21)
    try:
        Dl = linalg.cholesky(-0.5 * (nabla + nabla.T))
    except np.linalg.LinAlgError:
        raise RiccatiFailure(gamma, "disturbance weighting is not negative definite")
    return X, F, V, Rc, Dl


def _central_controller(P: Dict[str, np.ndarray], gamma: float) -> Tuple[np.ndarray, ...]:
    """Central filter at level gamma, or RiccatiFailure

    The control Riccati turns the problem into an output-estimation problem at
    level one; its dual full-information Riccati (filtering side) supplies the
    observer gains and encodes the coupling condition.
    """
    A, B1, B2 = P['A'], P['B1'], P['B2']
    C1, C2 = P['C1'], P['C2']
    D11, D12, D21 = P['D11'], P['D12'], P['D21']
    m1 = B1.shape[1]

    # control side: state feedback F = [Fw; Fu] and the factors Rc, Dl of V
    X, F, V, Rc, Dl = _full_information(A, B1, B2, C1, D11, D12, gamma)
    Fw, Fu = F[:m1], F[m1:]
    Dl_inv = linalg.solve_triangular(Dl, np.eye(m1))

    # r = Dl (w - Fw x),  s = Rc (u - Fu x) + Rc^{-T} V21 (w - Fw x)
    At = A + B1 @ Fw
    B1t = B1 @ Dl_inv
    C1t = -Rc @ Fu
    D11t = linalg.solve_triangular(Rc, V[m1:, :m1], trans='T') @ Dl_inv
    C2t = C2 + D21 @ Fw
    D21t = D21 @ Dl_inv

    # filtering side: full information problem of the transposed system, level 1
    mw = C1t.shape[0]
    try:
        _, Fd, Vd, _, _ = _full_information(At.T, C1t.T, C2t.T, B1t.T, D11t.T, D21t.T, 1.0)
    except RiccatiFailure as e:
        raise RiccatiFailure(gamma, f"filtering side: {e.reason}")
    # observer gains of the output-estimation problem from the dual feedback
    K2 = -np.linalg.solve(Vd[mw:, mw:], Vd[mw:, :mw])
    K1 = Fd[mw:] - K2 @ Fd[:mw]
    H1 = -K1.T
    H2 = K2.T

    # central filter: observer on the transformed plant, control read back through Rc
    Dk = linalg.solve_triangular(Rc, H2)
    Ck = -linalg.solve_triangular(Rc, C1t + H2 @ C2t)
    Ak = At - H1 @ C2t + B2 @ Ck
    Bk = H1 + B2 @ Dk
    return Ak, Bk, Ck, Dk


def _regularize(P: Dict[str, np.ndarray], eps: float) -> Dict[str, np.ndarray]:
    """Append a fictitious measurement-noise channel eps*I entering y"""
    n_y = P['D21'].shape[0]
    if eps <= 0 or n_y == 0:
        return P
    R = dict(P)
    R['B1'] = np.hstack([P['B1'], np.zeros((P['B1'].shape[0], n_y))])
    R['D11'] = np.hstack([P['D11'], np.zeros((P['D11'].shape[0], n_y))])
    R['D21'] = np.hstack([P['D21'], eps * np.eye(n_y)])
    return R


def hinf_synthesize(plant: GeneralizedPlant, gamma_tol: float = DEFAULT_GAMMA_TOL,
                    regularization: float = DEFAULT_REGULARIZATION,
                    norm_tol: float = DEFAULT_NORM_TOL, max_iterations: int = 200,
                    verbose: bool = False) -> SynthesisResult:
    """Bisect on gamma; return the central filter at the smallest feasible level"""
    if gamma_tol <= 0:
        raise ValueError("gamma_tol must be positive")
    P = plant.partition()
    Pr = _regularize(P, regularization)
    iterations: List[Tuple[float, bool]] = []

    def attempt(gamma: float):
        try:
            Ak, Bk, Ck, Dk = _central_controller(Pr, gamma)
        except RiccatiFailure:
            iterations.append((gamma, False))
            return None
        A_cl = _lft(Pr, Ak, Bk, Ck, Dk)[0]
        ok = bool(np.all(np.isfinite(A_cl))) and (
            A_cl.size == 0 or np.max(np.abs(np.linalg.eigvals(A_cl))) < 1.0 - STABILITY_MARGIN)
        iterations.append((gamma, ok))
        return (Ak, Bk, Ck, Dk) if ok else None

    open_loop = hinf_norm(plant.G11, tol=norm_tol)
    upper = max(open_loop, GAMMA_FLOOR) * (1.0 + gamma_tol)
    if verbose:
        print(f"🧮 Plant: {plant.n_states} states, open-loop error norm {open_loop:.6f}")

    best = attempt(upper)
    if best is None:
        raise InfeasibleAtUpperBound(upper, iterations)

    lower = max(open_loop / 100.0, GAMMA_FLOOR)
    while lower > GAMMA_FLOOR and len(iterations) < max_iterations:
        found = attempt(lower)
        if found is None:
            break
        best, upper = found, lower
        lower = max(lower / 100.0, GAMMA_FLOOR)
    else:
        if lower <= GAMMA_FLOOR and lower < upper:
            found = attempt(lower)
            if found is not None:
                best, upper = found, lower

    while upper - lower > gamma_tol * upper and len(iterations) < max_iterations:
        gamma = np.sqrt(lower * upper) if upper / lower > 4.0 else 0.5 * (lower + upper)
        found = attempt(gamma)
        if found is None:
            lower = gamma
        else:
            best, upper = found, gamma
        if verbose:
            print(f"   γ={gamma:.6f} {'✅' if found is not None else '❌'}")

    K = StateSpaceModel(*best, plant.period)
    closed = close_loop(plant, K)
    if not is_stable(closed, STABILITY_MARGIN):
        raise RiccatiFailure(upper, "closed loop with the central filter is unstable")
    J = hinf_norm(closed, tol=norm_tol)
    if verbose:
        print(f"✅ γ={upper:.6f}, verified J={J:.6f} after {len(iterations)} Riccati solves")
    return SynthesisResult(filter=K, gamma=float(upper), J=float(J), iterations=iterations)


def design(spec: DesignSpec, gamma_tol: float = DEFAULT_GAMMA_TOL,
           regularization: float = DEFAULT_REGULARIZATION, verbose: bool = False) -> SynthesisResult:
    """Three-step procedure: assemble G_{i,n}, lift by M, solve the H-infinity problem"""
    return hinf_synthesize(build_plant(spec), gamma_tol=gamma_tol,
                           regularization=regularization, verbose=verbose)


def fast_discretization_sweep(spec: DesignSpec, ns: Sequence[int],
                              gamma_tol: float = DEFAULT_GAMMA_TOL,
                              verbose: bool = False) -> List[Tuple[int, float]]:
    """Optimal J as the fast-discretization ratio n grows"""
    results = []
    for n in ns:
        sub = DesignSpec(spec.pattern, spec.h, spec.m, n, spec.F)
        J = design(sub, gamma_tol=gamma_tol).J
        if verbose:
            print(f"   n={n:2d}  J={J:.6f}")
        results.append((int(n), J))
    return results


def error_response(plant: GeneralizedPlant, K: StateSpaceModel,
                   n_points: int = DEFAULT_GRID) -> FrequencyResponseCurve:
    """Frequency response of the closed-loop error system T_n"""
    return frequency_response(close_loop(plant, K), n_points)


# ---------------------------------------------------------------------------
# Filterbank form
# ---------------------------------------------------------------------------

def _upsampled(K: StateSpaceModel, M: int) -> StateSpaceModel:
    """Realization of K(z^M) at the base rate"""
    dt = K.dt / M
    if M == 1:
        return StateSpaceModel(K.A, K.B, K.C, K.D, dt)
    nk = K.n_states
    if nk == 0:
        return gain(K.D, dt)
    A = np.zeros((M * nk, M * nk))
    A[:nk, (M - 1) * nk:] = K.A
    for j in range(1, M):
        A[j * nk:(j + 1) * nk, (j - 1) * nk:j * nk] = np.eye(nk)
    B = np.zeros((M * nk, K.n_inputs))
    B[:nk] = K.B
    C = np.zeros((K.n_outputs, M * nk))
    C[:, (M - 1) * nk:] = K.C
    return StateSpaceModel(A, B, C, K.D, dt)


def _delay_sum(M: int, dt: float) -> StateSpaceModel:
    """Row [1, z^-1, ..., z^-(M-1)]: y(t) = sum_j v_j(t - j)"""
    if M == 1:
        return gain([[1.0]], dt)
    A = np.eye(M - 1, k=1)
    B = np.zeros((M - 1, M))
    B[np.arange(M - 1), np.arange(1, M)] = 1.0
    C = np.zeros((1, M - 1))
    C[0, 0] = 1.0
    D = np.zeros((1, M))
    D[0, 0] = 1.0
    return StateSpaceModel(A, B, C, D, dt)


def extract_filterbank(K: StateSpaceModel, p: DecimationPattern) -> PolyphaseFilterBank:
    """[Phi_{i_1} ... Phi_{i_N}] = [1, z^-1, ..., z^-(M-1)] K(z^M)"""
    if K.n_outputs != p.M or K.n_inputs != p.N:
        raise DimensionMismatch(f"filter must map {p.N} inputs to {p.M} outputs, got "
                                f"{K.n_inputs} -> {K.n_outputs}")
    if not K.is_discrete:
        K = StateSpaceModel(K.A, K.B, K.C, K.D, float(p.M))
    row = series(_delay_sum(p.M, K.dt / p.M), _upsampled(K, p.M))
    branches = []
    for k, idx in enumerate(p.ones_indices):
        picker = np.zeros((p.N, 1))
        picker[k, 0] = 1.0
        branches.append(FilterBranch(idx, scale(row, right=picker)))
    return PolyphaseFilterBank(branches, p, order=K.n_states)


# ---------------------------------------------------------------------------
# Persistence
# ---------------------------------------------------------------------------

def save_result(path: Union[str, Path], result: SynthesisResult,
                config: Optional[Dict[str, Any]] = None) -> None:
    payload = result.to_dict()
    if config is not None:
        payload['config'] = config
    with open(path, 'w') as f:
        json.dump(payload, f, indent=2)


def load_filter(path: Union[str, Path]) -> StateSpaceModel:
    """Accepts a SynthesisResult file or a bare state-space file"""
    with open(path, 'r') as f:
        data = json.load(f)
    if 'filter' in data:
        data = data['filter']
    return StateSpaceModel.from_dict(data)


def load_result(path: Union[str, Path]) -> SynthesisResult:
    with open(path, 'r') as f:
        return SynthesisResult.from_dict(json.load(f))


def save_filterbank(path: Union[str, Path], fb: PolyphaseFilterBank,
                    config: Optional[Dict[str, Any]] = None) -> None:
    payload: Dict[str, Any] = {'pattern': str(fb.pattern), 'order': fb.order,
                               'branches': fb.to_list()}
    if config is not None:
        payload['config'] = config
    with open(path, 'w') as f:
        json.dump(payload, f, indent=2)


def load_filterbank(path: Union[str, Path]) -> PolyphaseFilterBank:
    with open(path, 'r') as f:
        data = json.load(f)
    pattern = DecimationPattern.from_string(data['pattern'])
    branches = [FilterBranch(int(b['delay_index']), StateSpaceModel.from_dict(b))
                for b in data['branches']]
    return PolyphaseFilterBank(branches, pattern, order=int(data.get('order', 0)))
