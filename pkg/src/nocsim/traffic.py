"""Synthetic traffic patterns, worst-case starvation traffic, and traces.

Open-loop injection: each node flips a Bernoulli coin per cycle with
probability rate / num_flits of generating one packet, so offered load
in flits/node/cycle equals the configured rate.  Destinations follow
the selected pattern.  The starvation pattern instead keeps the nodes
of three chosen rings injecting continuously (one packet queued ahead
at all times).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import ConfigError

PATTERNS = ("uniform_random", "bit_complement", "transpose",
            "adversarial_starve", "trace", "none")

PAT_UNIFORM = 0
PAT_STATIC_MAP = 1   # bit_complement / transpose (precomputed)
PAT_ADVERSARIAL = 2
PAT_TRACE = 3
PAT_NONE = 4


@dataclass
class TrafficSpec:
    pattern: str = "uniform_random"
    rate: float = 0.1
    num_flits: int = 4
    trace_path: str | None = None

    def validate(self):
        if self.pattern not in PATTERNS:
            raise ConfigError(f"unknown traffic pattern: {self.pattern}")
        if not (0.0 <= self.rate <= 1.0):
            raise ConfigError(f"rate must be in [0, 1], got {self.rate}")
        if not (1 <= self.num_flits <= 63):
            raise ConfigError("num_flits must be in [1, 63]")
        if self.pattern == "trace" and not self.trace_path:
            raise ConfigError("trace pattern needs trace_path")


def dest_uniform_random(rng, src: int, n: int) -> int:
    """Uniform over the other n-1 nodes: one draw in [0, n-1) shifted past src."""
    if n < 2:
        raise ConfigError("uniform_random needs at least 2 nodes")
    d = rng.below(n - 1)
    return d if d < src else d + 1


def dest_bit_complement(src: int, n: int) -> int:
    """Bitwise complement of the node index over log2(n) bits."""
    if n & (n - 1) or n < 2:
        raise ConfigError(f"bit_complement needs a power-of-two node count, got {n}")
    return src ^ (n - 1)


def dest_transpose(src: int, n: int) -> int:
    """Swap grid coordinates (x = src mod k, y = src div k, n = k*k).

    Diagonal nodes map to themselves; they fall back to bit_complement
    so every node still offers load.
    """
    k = math.isqrt(n)
    if k * k != n:
        raise ConfigError(f"transpose needs a square node count, got {n}")
    x, y = src % k, src // k
    dst = x * k + y
    if dst == src:
        return dest_bit_complement(src, n)
    return dst


def static_dest_map(pattern: str, n: int) -> np.ndarray:
    fn = {"bit_complement": dest_bit_complement, "transpose": dest_transpose}[pattern]
    return np.array([fn(s, n) for s in range(n)], dtype=np.int64)


def bernoulli_threshold(rate: float, num_flits: int) -> np.uint64:
    """Fixed-point per-cycle packet probability (draw < threshold)."""
    p = rate / num_flits
    if p >= 1.0:
        return np.uint64(0xFFFFFFFFFFFFFFFF)
    return np.uint64(int(p * 2.0 ** 64))


def adversarial_plan(layout) -> tuple[np.ndarray, np.ndarray]:
    """Per-node destination window for the worst-case starvation pattern.

    Requires the two-level 16-node hierarchical network.  Ring A nodes
    target ring C round-robin, ring C targets ring A, ring B targets the
    remaining ring D; ring D nodes are pure sinks.  Rings A, B, C are
    the first three local rings, whose bridges sit adjacent, in that
    order, on the global ring.
    """
    if layout.levels != 2 or layout.n_nodes != 16:
        raise ConfigError("adversarial_starve requires the 16-node two-level network")
    base = np.full(layout.n_nodes, -1, dtype=np.int64)
    size = np.zeros(layout.n_nodes, dtype=np.int64)
    target_of = {0: 2, 1: 3, 2: 0}  # A->C, B->D, C->A; D injects nothing
    for node in range(layout.n_nodes):
        ring = node // 4
        if ring in target_of:
            base[node] = target_of[ring] * 4
            size[node] = 4
    return base, size


def load_trace(path: str) -> list[tuple[int, int, int, int]]:
    """Parse a trace file of "cycle src dst num_flits" lines.

    '#' starts a comment; cycles must be non-decreasing; src != dst.
    """
    out = []
    last_cycle = -1
    with open(path, "r", encoding="ascii") as f:
        for ln, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 4:
                raise ConfigError(f"{path}:{ln}: expected 'cycle src dst num_flits'")
            try:
                cycle, src, dst, nf = (int(p) for p in parts)
            except ValueError:
                raise ConfigError(f"{path}:{ln}: non-integer field") from None
            if cycle < last_cycle:
                raise ConfigError(f"{path}:{ln}: cycles must be non-decreasing")
            if src == dst:
                raise ConfigError(f"{path}:{ln}: src and dst must differ")
            if nf < 1 or nf > 63:
                raise ConfigError(f"{path}:{ln}: num_flits out of range")
            last_cycle = cycle
            out.append((cycle, src, dst, nf))
    return out


class TrafficState:
    """Kernel-facing traffic tables for one simulation instance."""

    def __init__(self, spec: TrafficSpec, layout, n_nodes: int):
        spec.validate()
        self.spec = spec
        self.pattern_code = PAT_NONE
        self.threshold = bernoulli_threshold(spec.rate, spec.num_flits)
        self.dst_map = np.zeros(1, dtype=np.int64)
        self.adv_base = np.zeros(1, dtype=np.int64)
        self.adv_size = np.zeros(1, dtype=np.int64)
        self.adv_rr = np.zeros(max(n_nodes, 1), dtype=np.int64)
        self.trace_cycle = np.zeros(0, dtype=np.int64)
        self.trace_src = np.zeros(0, dtype=np.int64)
        self.trace_dst = np.zeros(0, dtype=np.int64)
        self.trace_nf = np.zeros(0, dtype=np.int64)
        self.trace_ptr = np.zeros(1, dtype=np.int64)

        p = spec.pattern
        if p == "uniform_random":
            self.pattern_code = PAT_UNIFORM
        elif p in ("bit_complement", "transpose"):
            self.pattern_code = PAT_STATIC_MAP
            self.dst_map = static_dest_map(p, n_nodes)
        elif p == "adversarial_starve":
            self.pattern_code = PAT_ADVERSARIAL
            self.adv_base, self.adv_size = adversarial_plan(layout)
        elif p == "trace":
            self.pattern_code = PAT_TRACE
            rows = load_trace(spec.trace_path)
            if rows:
                arr = np.array(rows, dtype=np.int64)
                self.trace_cycle = arr[:, 0].copy()
                self.trace_src = arr[:, 1].copy()
                self.trace_dst = arr[:, 2].copy()
                self.trace_nf = arr[:, 3].copy()
            for _, src, dst, _nf in rows:
                if src >= n_nodes or dst >= n_nodes or src < 0 or dst < 0:
                    raise ConfigError("trace node id out of range")

    def kernel_view(self):
        return (self.dst_map, self.adv_base, self.adv_size, self.adv_rr,
                self.trace_cycle, self.trace_src, self.trace_dst,
                self.trace_nf, self.trace_ptr)
