#!/usr/bin/env python3
"""
H-infinity interpolation filter toolkit - command line front end

Subcommands:
  design     synthesize the optimal filter for one pattern
  search     rank all pattern classes for given M, N
  norm       H-infinity norm of a stored discrete-time system
  simulate   rectangular-wave (or CSV) reconstruction against a sinc baseline
  response   frequency response of a stored filter / filterbank branch
  tables     reproduce the M=4, M=5 and M=7 pattern tables
  converge   optimal J as the fast-sampling ratio n grows
  config     show or create the run configuration file
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from config_loader import ConfigLoader, RunConfig
from core import (
    BracketFailure, DesignSpec, InfeasibleAtUpperBound, InvalidInput, MrhinfError,
    NonDiscreteInput, RiccatiFailure, UnstableSystem,
)
from ltisys import frequency_response, hinf_norm
from multirate import read_sequence_csv
from pattern_search import format_table, reproduce_tables, search, write_reports_csv, write_reports_json
from reconstruction_sim import generate_rect_wave, run_reconstruction, sinc_baseline
from synthesis import (
    build_plant, error_response, extract_filterbank, fast_discretization_sweep, hinf_synthesize,
    load_filterbank, load_filter, save_filterbank, save_result,
)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_SYNTHESIS = 3


class Run:
    """Resolved configuration plus output helpers for one CLI invocation"""

    def __init__(self, config: RunConfig, verbose: bool):
        self.config = config
        self.verbose = verbose
        self.out = Path(config.output.out_dir)

    def say(self, message: str) -> None:
        if self.verbose:
            print(message)

    def path(self, name: str) -> Path:
        self.out.mkdir(parents=True, exist_ok=True)
        return self.out / name

    def write_json(self, name: str, payload: Dict[str, Any]) -> Path:
        payload = dict(payload)
        payload['config'] = self.config.to_dict()
        target = self.path(name)
        with open(target, 'w') as f:
            json.dump(payload, f, indent=2)
        return target

    def spec(self) -> DesignSpec:
        return self.config.design.to_spec()


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """defaults < config file < --spec < flags < MRHINF_WORKERS"""
    config = ConfigLoader(args.config, verbose=not args.quiet).load_config()
    if args.spec:
        with open(args.spec, 'r') as f:
            config.apply_spec(DesignSpec.from_dict(json.load(f)))
    if args.pattern is not None:
        config.design.pattern = args.pattern
    if args.n is not None:
        config.design.n = args.n
    if args.m is not None:
        config.design.m = args.m
    if args.h is not None:
        config.design.h = args.h
    if args.gamma_tol is not None:
        config.solver.gamma_tol = args.gamma_tol
    if args.grid is not None:
        config.solver.grid = args.grid
    if args.workers is not None:
        config.search.workers = args.workers
    if args.out is not None:
        config.output.out_dir = args.out
    config.apply_environment()
    if args.quiet:
        config.output.verbose = False
    return config


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_design(run: Run, args: argparse.Namespace) -> int:
    spec = run.spec()
    solver = run.config.solver
    run.say(f"🚀 Designing filter: pattern {spec.pattern}, h={spec.h:g}, m={spec.m}, n={spec.n}")
    plant = build_plant(spec)
    result = hinf_synthesize(plant, gamma_tol=solver.gamma_tol, regularization=solver.regularization,
                             norm_tol=solver.norm_tol, max_iterations=solver.max_bisections,
                             verbose=run.verbose)
    fb = extract_filterbank(result.filter, spec.pattern)

    save_result(run.path('filter.json'), result, run.config.to_dict())
    save_filterbank(run.path('filterbank.json'), fb, run.config.to_dict())
    run.write_json('summary.json', {'pattern': str(spec.pattern), 'gamma': result.gamma, 'J': result.J,
                                    'iterations': len(result.iterations)})
    frequency_response(fb.phis[0], solver.grid).to_csv(run.path('phi1_response.csv'))
    error_response(plant, result.filter, solver.grid).to_csv(run.path('error_response.csv'))

    print(f"J = {result.J:.17g}")
    run.say(f"💾 Results written to {run.out}/")
    return EXIT_OK


def cmd_search(run: Run, args: argparse.Namespace) -> int:
    spec = run.spec()
    solver = run.config.solver
    m = None if run.config.search.delay_equals_M else spec.m
    reports = search(args.M, args.N, spec, m=m, gamma_tol=solver.gamma_tol,
                     regularization=solver.regularization, workers=run.config.search.workers,
                     verbose=run.verbose)
    print(format_table(reports))
    write_reports_csv(run.path(f"search_M{args.M}_N{args.N}.csv"), reports)
    write_reports_json(run.path(f"search_M{args.M}_N{args.N}.json"), reports, run.config.to_dict())
    return EXIT_OK


def cmd_norm(run: Run, args: argparse.Namespace) -> int:
    G = load_filter(args.system)
    if not G.is_discrete:
        raise NonDiscreteInput(f"{args.system} has no sampling period dt; "
                               "the norm is defined for discrete-time systems")
    if G.n_states == 0:
        value = float(np.linalg.norm(G.D, 2))
    else:
        value = hinf_norm(G, tol=run.config.solver.norm_tol,
                          unit_circle_tol=run.config.solver.unit_circle_tol)
    print(f"{value:.17g}")
    return EXIT_OK


def cmd_simulate(run: Run, args: argparse.Namespace) -> int:
    spec = run.spec()
    sim = run.config.simulation
    if args.filter:
        K = load_filter(args.filter)
        run.say(f"📂 Using stored filter {args.filter}")
    else:
        solver = run.config.solver
        K = hinf_synthesize(build_plant(spec), gamma_tol=solver.gamma_tol,
                            regularization=solver.regularization, norm_tol=solver.norm_tol,
                            max_iterations=solver.max_bisections, verbose=run.verbose).filter
    if args.signal:
        x = read_sequence_csv(args.signal)
    else:
        x = generate_rect_wave(sim.rect_period, sim.rect_amplitude, sim.length)

    fb = extract_filterbank(K, spec.pattern)
    report = run_reconstruction(x, spec.pattern, fb, spec.m)
    baseline = sinc_baseline(x, spec.pattern, sim.baseline_taps)
    report.to_csv(run.path('simulation.csv'))
    baseline.to_csv(run.path('baseline.csv'))
    run.write_json('simulation_summary.json', {'proposed': report.summary(), 'baseline': baseline.summary()})

    print(f"max_abs_error = {report.max_abs_error:.17g}")
    print(f"baseline_max_abs_error = {baseline.max_abs_error:.17g}")
    print(f"intersample_max_abs_error = {report.intersample_max_abs_error:.17g}")
    print(f"baseline_intersample_max_abs_error = {baseline.intersample_max_abs_error:.17g}")
    # zero-order-hold output against the original between samples
    if report.intersample_max_abs_error < baseline.intersample_max_abs_error:
        run.say("✅ Designed filter beats the truncated-sinc baseline")
    else:
        run.say("⚠️  Baseline error is not larger than the designed filter's")
    return EXIT_OK


def cmd_response(run: Run, args: argparse.Namespace) -> int:
    with open(args.filter, 'r') as f:
        data = json.load(f)
    if 'branches' in data:
        fb = load_filterbank(args.filter)
        G = fb.phis[args.branch]
    else:
        G = load_filter(args.filter)
        if G.n_inputs != 1 or G.n_outputs != 1:
            G = extract_filterbank(G, run.spec().pattern).phis[args.branch]
    curve = frequency_response(G, run.config.solver.grid)
    target = Path(args.output) if args.output else run.path('response.csv')
    curve.to_csv(target)
    omega, peak = curve.peak()
    run.say(f"📈 Peak gain {peak:.6f} at ω={omega:.4f}; curve written to {target}")
    return EXIT_OK


def cmd_tables(run: Run, args: argparse.Namespace) -> int:
    solver = run.config.solver
    tables = reproduce_tables(run.spec(), gamma_tol=solver.gamma_tol,
                              regularization=solver.regularization,
                              workers=run.config.search.workers, verbose=run.verbose)
    for name, reports in tables.items():
        print(f"\n{name}")
        print(format_table(reports))
        write_reports_csv(run.path(f"{name}.csv"), reports)
    run.write_json('tables.json', {name: [r.to_dict() for r in reports] for name, reports in tables.items()})
    return EXIT_OK


def _parse_ns(text: str) -> List[int]:
    try:
        ns = [int(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise InvalidInput(f"--ns expects comma-separated integers, got {text!r}")
    if not ns or min(ns) < 1:
        raise InvalidInput("--ns needs at least one positive integer")
    return ns


def cmd_converge(run: Run, args: argparse.Namespace) -> int:
    rows = fast_discretization_sweep(run.spec(), _parse_ns(args.ns),
                                     gamma_tol=run.config.solver.gamma_tol, verbose=run.verbose)
    target = run.path('converge.csv')
    np.savetxt(target, np.array(rows, dtype=float), fmt=['%d', '%.17g'], delimiter=',',
               header='n,J', comments='')
    for n, J in rows:
        print(f"{n},{J:.17g}")
    return EXIT_OK


def cmd_config(run: Run, args: argparse.Namespace) -> int:
    loader = ConfigLoader(args.config)
    if args.action == 'create':
        loader.create_default_config()
        print("✅ Default configuration file created")
    else:
        loader.config = run.config
        loader.show_current_config()
    return EXIT_OK


COMMANDS = {
    'design': cmd_design,
    'search': cmd_search,
    'norm': cmd_norm,
    'simulate': cmd_simulate,
    'response': cmd_response,
    'tables': cmd_tables,
    'converge': cmd_converge,
    'config': cmd_config,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', default='mrhinf_config.json', help='Run configuration JSON')
    common.add_argument('--spec', help='DesignSpec JSON file')
    common.add_argument('--out', help='Output directory')
    common.add_argument('--pattern', help='Decimation pattern literal, e.g. 1100')
    common.add_argument('--n', type=int, help='Fast-discretization ratio')
    common.add_argument('--m', type=int, help='Reconstruction delay in samples')
    common.add_argument('--h', type=float, help='Sampling period')
    common.add_argument('--gamma-tol', type=float, help='Relative gamma bisection tolerance')
    common.add_argument('--grid', type=int, help='Frequency grid size')
    common.add_argument('--workers', type=int, help='Parallel workers for search')
    common.add_argument('--quiet', action='store_true', help='Only print results')

    parser = argparse.ArgumentParser(description='H-infinity optimal interpolation for nonuniformly decimated signals')
    sub = parser.add_subparsers(dest='command', required=True)

    sub.add_parser('design', parents=[common], help='Synthesize the optimal filter')
    p = sub.add_parser('search', parents=[common], help='Rank decimation pattern classes')
    p.add_argument('M', type=int)
    p.add_argument('N', type=int)
    p = sub.add_parser('norm', parents=[common], help='H-infinity norm of a stored system')
    p.add_argument('system', help='System or result JSON')
    p = sub.add_parser('simulate', parents=[common], help='Reconstruction simulation')
    p.add_argument('--signal', help='Single-column CSV input sequence (default: rectangular wave)')
    p.add_argument('--filter', help='Reuse a stored filter instead of designing one')
    p = sub.add_parser('response', parents=[common], help='Frequency response CSV')
    p.add_argument('filter', help='Filter, result or filterbank JSON')
    p.add_argument('--branch', type=int, default=0, help='Filterbank branch index')
    p.add_argument('--output', help='CSV path (default: <out>/response.csv)')
    sub.add_parser('tables', parents=[common], help='Reproduce the M=4, 5, 7 tables')
    p = sub.add_parser('converge', parents=[common], help='J versus fast-sampling ratio n')
    p.add_argument('--ns', default='1,2,3,4,5,6', help='Comma-separated n values')
    p = sub.add_parser('config', parents=[common], help='Show or create the configuration file')
    p.add_argument('action', choices=['show', 'create'], nargs='?', default='show')
    return parser


def _dump_trace(run: Optional[Run], e: MrhinfError) -> None:
    if run is None:
        return
    trace = {
        'error': f"{type(e).__name__}: {e}",
        'gamma': getattr(e, 'gamma', None),
        'iterations': [{'gamma': g, 'feasible': ok} for g, ok in getattr(e, 'iterations', None) or []],
    }
    target = run.write_json('gamma_trace.json', trace)
    print(f"💾 γ trace written to {target}", file=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    run = None
    try:
        config = resolve_config(args)
        run = Run(config, config.output.verbose)
        return COMMANDS[args.command](run, args)
    except json.JSONDecodeError as e:
        print(f"❌ Malformed JSON: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (InfeasibleAtUpperBound, RiccatiFailure, BracketFailure) as e:
        print(f"❌ Synthesis failed: {e}", file=sys.stderr)
        _dump_trace(run, e)
        return EXIT_SYNTHESIS
    except (InvalidInput, UnstableSystem) as e:
        print(f"❌ Invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (OSError, KeyError, IndexError, ValueError) as e:
        print(f"❌ Cannot read input: {e}", file=sys.stderr)
        return EXIT_INVALID
    except MrhinfError as e:
        print(f"❌ {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_SYNTHESIS


if __name__ == "__main__":
    sys.exit(main())
