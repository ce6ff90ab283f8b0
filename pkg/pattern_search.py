#!/usr/bin/env python3
"""
Optimal decimation pattern search
Enumerates patterns up to cyclic rotation, designs the optimal filter for each
class and ranks the classes by the achieved error norm J
"""

import csv
import json
import math
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from joblib import Parallel, delayed

from core import DecimationPattern, DesignSpec, InvalidCounts, MrhinfError, canonical_rotation
from synthesis import DEFAULT_GAMMA_TOL, DEFAULT_REGULARIZATION, design


@dataclass
class PatternReport:
    """One cyclic-equivalence class and its optimal norm"""
    canonical: DecimationPattern
    rotations: List[DecimationPattern]
    J: float
    consecutive_zero_run: int
    gamma: float = math.nan
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'canonical': str(self.canonical),
            'rotations': [str(r) for r in self.rotations],
            'J': None if math.isnan(self.J) else self.J,
            'gamma': None if math.isnan(self.gamma) else self.gamma,
            'consecutive_zero_run': self.consecutive_zero_run,
            'error': self.error,
        }


def consecutive_zero_run(p: DecimationPattern) -> int:
    """Longest cyclic run of zeros"""
    if p.N == p.M:
        return 0
    doubled = p.bits + p.bits
    best = run = 0
    for b in doubled:
        run = run + 1 if b == 0 else 0
        best = max(best, run)
    return min(best, p.M - p.N)


def all_rotations(p: DecimationPattern) -> List[DecimationPattern]:
    """Distinct cyclic rotations, in rotation order starting from p"""
    seen = []
    for k in range(p.M):
        r = p.rotate(k)
        if r not in seen:
            seen.append(r)
    return seen


def enumerate_classes(M: int, N: int) -> List[DecimationPattern]:
    """One canonical representative per necklace of length M with N ones"""
    if not isinstance(M, int) or not isinstance(N, int) or N < 1 or N > M:
        raise InvalidCounts(f"need 1 <= N <= M, got M={M}, N={N}")
    classes = set()
    for ones in combinations(range(M), N):
        bits = [0] * M
        for i in ones:
            bits[i] = 1
        classes.add(canonical_rotation(DecimationPattern(tuple(bits))).bits)
    return [DecimationPattern(bits) for bits in sorted(classes)]


def _evaluate_class(canonical: DecimationPattern, spec: DesignSpec,
                    gamma_tol: float, regularization: float) -> PatternReport:
    rotations = all_rotations(canonical)
    zeros = consecutive_zero_run(canonical)
    try:
        result = design(spec, gamma_tol=gamma_tol, regularization=regularization)
    except MrhinfError as e:
        return PatternReport(canonical, rotations, math.nan, zeros, error=f"{type(e).__name__}: {e}")
    return PatternReport(canonical, rotations, result.J, zeros, gamma=result.gamma)


def _rank_key(report: PatternReport):
    J = report.J if report.ok else math.inf
    return (J, report.consecutive_zero_run, report.canonical.bits)


def search(M: int, N: int, base_spec: DesignSpec, m: Optional[int] = None,
           gamma_tol: float = DEFAULT_GAMMA_TOL,
           regularization: float = DEFAULT_REGULARIZATION,
           workers: int = 1, verbose: bool = False) -> List[PatternReport]:
    """Rank all (M, N) pattern classes by J; reconstruction delay defaults to M"""
    classes = enumerate_classes(M, N)
    delay_steps = M if m is None else m
    if verbose:
        print(f"🔍 M={M}, N={N}: {len(classes)} pattern classes, delay m={delay_steps}, workers={workers}")

    specs = [base_spec.with_pattern(c, m=delay_steps) for c in classes]
    reports = Parallel(n_jobs=workers)(
        delayed(_evaluate_class)(c, s, gamma_tol, regularization) for c, s in zip(classes, specs)
    )
    reports = sorted(reports, key=_rank_key)

    if verbose:
        for r in reports:
            if r.ok:
                print(f"   ✅ {r.canonical}  J={r.J:.4f}  zeros={r.consecutive_zero_run}")
            else:
                print(f"   ❌ {r.canonical}  {r.error}")
    return reports


TABLE_SWEEPS = {
    'm4_n2': (4, [2]),
    'm5': (5, [1, 2, 3, 4]),
    'm7_n4': (7, [4]),
}


def reproduce_tables(base_spec: DesignSpec, gamma_tol: float = DEFAULT_GAMMA_TOL,
                     regularization: float = DEFAULT_REGULARIZATION, workers: int = 1,
                     verbose: bool = False) -> Dict[str, List[PatternReport]]:
    """M=4/N=2, M=5/N=1..4 and M=7/N=4 sweeps, delay equal to M"""
    tables = {}
    for name, (M, Ns) in TABLE_SWEEPS.items():
        if verbose:
            print(f"\n📊 {name}")
        rows = []
        for N in Ns:
            rows.extend(search(M, N, base_spec, gamma_tol=gamma_tol,
                               regularization=regularization, workers=workers, verbose=verbose))
        tables[name] = rows
    return tables


# ---------------------------------------------------------------------------
# Exports
# ---------------------------------------------------------------------------

def format_table(reports: List[PatternReport]) -> str:
    lines = [f"{'pattern':<12} {'rotations':>9} {'zeros':>5} {'J':>10}", "-" * 39]
    for r in reports:
        J = f"{r.J:.4f}" if r.ok else "failed"
        lines.append(f"{str(r.canonical):<12} {len(r.rotations):>9} {r.consecutive_zero_run:>5} {J:>10}")
    return "\n".join(lines)


def write_reports_csv(path: Union[str, Path], reports: List[PatternReport]) -> None:
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(['pattern', 'rotations', 'consecutive_zero_run', 'J', 'error'])
        for r in reports:
            J = "" if not r.ok else f"{r.J:.17g}"
            writer.writerow([str(r.canonical), len(r.rotations), r.consecutive_zero_run, J, r.error or ''])


def write_reports_json(path: Union[str, Path], reports: List[PatternReport],
                       config: Optional[Dict[str, Any]] = None) -> None:
    payload: Dict[str, Any] = {'reports': [r.to_dict() for r in reports]}
    if config is not None:
        payload['config'] = config
    with open(path, 'w') as f:
        json.dump(payload, f, indent=2)
