"""Core identities and clock shared by every network model.

Node addresses are hierarchical: a node has one digit per level of the
topology tree (most-global digit first) plus a flat index.  Flat indices
are what traffic patterns and the flit pool use; digits are what routing
uses.  For flat networks (mesh, single ring) the address has one digit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

CW = 0
CCW = 1

DIR_NAMES = {CW: "cw", CCW: "ccw"}


class SimulationError(RuntimeError):
    """Fatal invariant violation (conservation, corrupted state)."""


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass(frozen=True)
class NodeId:
    """Hierarchical node address: digits (most-global first) + flat index."""

    digits: tuple[int, ...]
    flat: int

    def __int__(self) -> int:
        return self.flat


@dataclass(frozen=True)
class PacketId:
    """Globally unique packet identity: source node + per-source sequence."""

    src: int
    txn: int


@dataclass
class Flit:
    """One flow-control unit; the unit routed each cycle.

    Kernel code keeps flits in a struct-of-arrays pool; this dataclass is
    the API-level view used by tests and single-flit inspection.
    """

    packet: PacketId
    seq: int
    num_flits: int
    src: int
    dst: int
    enqueue_cycle: int
    inject_cycle: int = -1
    deflections: int = 0
    ring_retries: int = 0


@dataclass
class SimClock:
    """Cycle counter plus the warmup/measurement split.

    Metrics only sample flits whose packet was enqueued at or after
    ``warmup_cycles``.
    """

    cycle: int = 0
    warmup_cycles: int = 0
    run_cycles: int = 0

    @property
    def total_cycles(self) -> int:
        return self.warmup_cycles + self.run_cycles


def pack_flit_key(src: int, txn: int, seq: int) -> int:
    """Stable identity for a flit usable as a single int64 comparison key."""
    return (src << 48) | ((txn & 0xFFFFFFFFFF) << 8) | (seq & 0xFF)
