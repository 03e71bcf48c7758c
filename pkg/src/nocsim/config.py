"""Experiment configuration: flat key=value files, CLI overrides, defaults.

Unknown keys are errors (no silent typos).  The canonical serialisation
feeds the config hash that identifies result rows.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass, fields

from .core import ConfigError

TOPOLOGIES = ("single_ring", "hird", "mesh_chipper", "mesh_minbd")


@dataclass
class ExperimentConfig:
    topology: str = "hird"
    nodes: int = 16
    lanes: int = 1              # single ring width in flit lanes
    lane_ratio: int = 2         # global:local width ratio per level
    bridges: int = 8
    hop_cycles: int = 2         # single-ring per-hop pipeline depth (1 or 2)
    local_hop: int = 2
    global_hop: int = 3
    fifo_up: int = 1
    fifo_down: int = 4
    side_buffer: int = 4
    eject_cap: int = 2
    injection_guarantee: bool = True
    transfer_guarantee: bool = True
    injection_threshold: int = 100
    retry_threshold: int = 2
    c_threshold: int = 2
    signal_latency: int = 1
    golden_epoch: int = 0       # 0 = 8 * (width + height)
    txn_window: int = 16
    strict_chipper: bool = False
    reassembly_slots: int = 16
    pattern: str = "uniform_random"
    rate: float = 0.1
    num_flits: int = 4
    trace: str | None = None
    cycles: int = 100_000
    warmup: int = -1            # -1 = 10% of cycles
    windows: int = 4
    seed: int = -1              # -1 = NOC_SEED env var, else 1
    sat_threshold: float = 300.0
    check_interval: int = 1024

    def finalize(self) -> "ExperimentConfig":
        if self.warmup < 0:
            self.warmup = self.cycles // 10
        if self.seed < 0:
            self.seed = int(os.environ.get("NOC_SEED", "1"))
        self.validate()
        return self

    def validate(self):
        if self.topology not in TOPOLOGIES:
            raise ConfigError(f"topology: unknown value {self.topology!r}")
        if self.topology == "hird" and self.nodes not in (16, 64):
            raise ConfigError(f"nodes: unsupported size {self.nodes} for hird")
        if self.topology == "single_ring" and self.nodes < 2:
            raise ConfigError("nodes: single_ring needs >= 2")
        if self.topology.startswith("mesh"):
            side = math.isqrt(self.nodes)
            if side * side != self.nodes or side < 2:
                raise ConfigError(f"nodes: mesh needs a square count >= 4, got {self.nodes}")
        if self.bridges not in (4, 8, 16):
            raise ConfigError(f"bridges: must be 4, 8 or 16, got {self.bridges}")
        if self.hop_cycles not in (1, 2):
            raise ConfigError("hop_cycles: must be 1 or 2")
        if not (0.0 <= self.rate <= 1.0):
            raise ConfigError(f"rate: out of range {self.rate}")
        if not (1 <= self.num_flits <= 63):
            raise ConfigError("num_flits: must be in [1, 63]")
        if self.cycles <= 0:
            raise ConfigError("cycles: must be positive")
        if self.warmup < 0:
            raise ConfigError("warmup: must be >= 0")
        if self.windows < 1:
            raise ConfigError("windows: must be >= 1")
        if self.pattern == "adversarial_starve" and \
                (self.topology != "hird" or self.nodes != 16):
            raise ConfigError("pattern: adversarial_starve needs hird with 16 nodes")
        if self.pattern == "bit_complement" and self.nodes & (self.nodes - 1):
            raise ConfigError("pattern: bit_complement needs a power-of-two node count")
        if self.pattern == "transpose":
            k = math.isqrt(self.nodes)
            if k * k != self.nodes:
                raise ConfigError("pattern: transpose needs a square node count")
        for name in ("fifo_up", "fifo_down", "side_buffer", "injection_threshold",
                     "retry_threshold", "c_threshold", "signal_latency",
                     "reassembly_slots", "txn_window", "lanes", "lane_ratio"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name}: must be >= 1")

    def canonical(self) -> str:
        parts = []
        for f in sorted(fields(self), key=lambda f: f.name):
            v = getattr(self, f.name)
            if isinstance(v, float):
                v = repr(v)
            parts.append(f"{f.name}={v}")
        return "\n".join(parts)

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:12]


_FIELD_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}
_BOOL_FIELDS = {"injection_guarantee", "transfer_guarantee", "strict_chipper"}
_FLOAT_FIELDS = {"rate", "sat_threshold"}
_STR_FIELDS = {"topology", "pattern", "trace"}


def _coerce(key: str, raw: str):
    if key in _BOOL_FIELDS:
        low = raw.lower()
        if low in ("1", "true", "on", "yes"):
            return True
        if low in ("0", "false", "off", "no"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}")
    if key in _FLOAT_FIELDS:
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"{key}: expected a number, got {raw!r}") from None
    if key in _STR_FIELDS:
        return raw
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def parse_config(path: str | None = None,
                 overrides: dict | None = None) -> ExperimentConfig:
    """Build a config from an optional key=value file plus overrides."""
    cfg = ExperimentConfig()
    if path is not None:
        with open(path, "r", encoding="ascii") as f:
            for ln, raw in enumerate(f, start=1):
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{ln}: expected 'key = value'")
                key, val = (s.strip() for s in line.split("=", 1))
                if key not in _FIELD_TYPES:
                    raise ConfigError(f"{path}:{ln}: unknown key {key!r}")
                setattr(cfg, key, _coerce(key, val))
    for key, val in (overrides or {}).items():
        if key not in _FIELD_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        if val is not None:
            setattr(cfg, key, val)
    return cfg.finalize()
