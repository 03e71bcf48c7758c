"""nocsim: deterministic cycle-accurate simulation of deflection-based
on-chip networks (single ring, hierarchical rings, deflection meshes)."""

from .config import ExperimentConfig, parse_config
from .core import ConfigError, Flit, NodeId, PacketId, SimClock, SimulationError
from .metrics import MetricsStore, percentile
from .rng import Rng
from .runner import ResultRow, run_experiment, run_sweep
from .simulation import Simulation
from .topology import build_hird, build_single_ring
from .traffic import (TrafficSpec, dest_bit_complement, dest_transpose,
                      dest_uniform_random, load_trace)

__all__ = [
    "ExperimentConfig", "parse_config", "ConfigError", "Flit", "NodeId",
    "PacketId", "SimClock", "SimulationError", "MetricsStore", "percentile",
    "Rng", "ResultRow", "run_experiment", "run_sweep", "Simulation",
    "build_hird", "build_single_ring", "TrafficSpec", "dest_bit_complement",
    "dest_transpose", "dest_uniform_random", "load_trace",
]

__version__ = "0.1.0"
