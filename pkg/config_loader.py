#!/usr/bin/env python3
"""
Configuration Loader for the interpolation filter toolkit
Handles loading and validation of design, solver, search and simulation settings
"""

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from core import DecimationPattern, DesignSpec, StateSpaceModel

WORKERS_ENV = "MRHINF_WORKERS"


@dataclass
class DesignConfig:
    """Default design problem: pattern, sampling period h, delay m, fast-sampling ratio n, model F"""
    pattern: str = "110"
    h: float = 1.0
    m: int = 6
    n: int = 4
    F: Dict[str, List[List[float]]] = field(default_factory=lambda: {
        'A': [[-0.1]], 'B': [[1.0]], 'C': [[0.1]], 'D': [[0.0]]
    })

    def to_spec(self) -> DesignSpec:
        return DesignSpec(DecimationPattern.from_string(self.pattern), self.h, self.m, self.n,
                          StateSpaceModel.from_dict(self.F))


@dataclass
class SolverConfig:
    """Gamma-iteration and norm computation tolerances"""
    gamma_tol: float = 1e-4
    regularization: float = 1e-6
    norm_tol: float = 1e-6
    grid: int = 2048
    unit_circle_tol: float = 1e-8
    max_bisections: int = 200


@dataclass
class SearchConfig:
    """Pattern search settings"""
    workers: int = 1
    delay_equals_M: bool = True


@dataclass
class SimulationConfig:
    """Reconstruction simulation settings"""
    rect_period: int = 20
    rect_amplitude: float = 1.0
    length: int = 600
    baseline_taps: int = 31


@dataclass
class OutputConfig:
    out_dir: str = "results"
    verbose: bool = True


@dataclass
class RunConfig:
    """Complete run configuration"""
    design: DesignConfig = field(default_factory=DesignConfig)
    solver: SolverConfig = field(default_factory=SolverConfig)
    search: SearchConfig = field(default_factory=SearchConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunConfig':
        return cls(
            design=DesignConfig(**data.get('design', {})),
            solver=SolverConfig(**data.get('solver', {})),
            search=SearchConfig(**data.get('search', {})),
            simulation=SimulationConfig(**data.get('simulation', {})),
            output=OutputConfig(**data.get('output', {})),
        )

    def apply_spec(self, spec: DesignSpec) -> None:
        """Take the design section from a DesignSpec file"""
        data = spec.to_dict()
        self.design = DesignConfig(pattern=data['pattern'], h=data['h'], m=data['m'], n=data['n'],
                                   F=data['F'])

    def apply_environment(self, environ: Optional[Dict[str, str]] = None) -> None:
        """MRHINF_WORKERS overrides the worker count"""
        environ = os.environ if environ is None else environ
        value = environ.get(WORKERS_ENV)
        if value:
            try:
                self.search.workers = int(value)
            except ValueError:
                print(f"⚠️  Ignoring {WORKERS_ENV}={value!r}: not an integer")


class ConfigLoader:
    """Configuration loader and manager"""

    def __init__(self, config_file: str = "mrhinf_config.json", verbose: bool = True):
        self.config_file = Path(config_file)
        self.config: Optional[RunConfig] = None
        self.verbose = verbose

    def load_config(self) -> RunConfig:
        """Load configuration from file"""
        if self.config_file.exists():
            try:
                with open(self.config_file, 'r') as f:
                    config_data = json.load(f)
                self.config = RunConfig.from_dict(config_data)
                if self.verbose:
                    print(f"✅ Loaded configuration from {self.config_file}")
                return self.config

            except (OSError, json.JSONDecodeError, TypeError) as e:
                if self.verbose:
                    print(f"⚠️  Error loading config: {e}")
                    print("🔧 Using default configuration")

        elif self.verbose:
            print(f"📝 Config file not found: {self.config_file}")
            print("🔧 Using default configuration")

        self.config = RunConfig()
        return self.config

    def save_config(self, config: RunConfig) -> None:
        """Save configuration to file"""
        try:
            with open(self.config_file, 'w') as f:
                json.dump(config.to_dict(), f, indent=2)
            if self.verbose:
                print(f"💾 Configuration saved to {self.config_file}")
        except OSError as e:
            print(f"❌ Error saving config: {e}")

    def create_default_config(self) -> None:
        """Create a default configuration file"""
        self.save_config(RunConfig())

    def show_current_config(self) -> None:
        """Display current configuration"""
        if not self.config:
            self.load_config()
        c = self.config

        print("\n🎛️  CURRENT RUN CONFIGURATION")
        print("=" * 50)

        print("\n📐 Design:")
        print(f"  Pattern: {c.design.pattern}")
        print(f"  Sampling period h: {c.design.h:g}")
        print(f"  Reconstruction delay m: {c.design.m} samples")
        print(f"  Fast-sampling ratio n: {c.design.n}")

        print("\n🧮 Solver:")
        print(f"  Gamma tolerance: {c.solver.gamma_tol:g}")
        print(f"  Regularization: {c.solver.regularization:g}")
        print(f"  Norm tolerance: {c.solver.norm_tol:g}")
        print(f"  Frequency grid: {c.solver.grid} points")

        print("\n🔍 Search:")
        print(f"  Workers: {c.search.workers}")
        print(f"  Delay equals M: {'YES' if c.search.delay_equals_M else 'NO'}")

        print("\n📈 Simulation:")
        print(f"  Rectangular wave: period {c.simulation.rect_period}, amplitude {c.simulation.rect_amplitude:g}")
        print(f"  Length: {c.simulation.length} samples")
        print(f"  Baseline taps: {c.simulation.baseline_taps}")

        print("\n💾 Output:")
        print(f"  Directory: {c.output.out_dir}")
        print(f"  Verbose: {'ENABLED' if c.output.verbose else 'DISABLED'}")
