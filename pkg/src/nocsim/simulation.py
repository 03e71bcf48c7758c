"""Simulation instance: clock, state, chunked kernel execution.

One instance owns its entire state and is strictly single threaded;
parallelism happens only across instances.  The per-cycle contract is:
traffic enqueues, every router fires on the previous cycle's register
state (two-phase update), ejections feed reassembly, and conservation
is checked (incrementally every cycle, by full enumeration every
``check_interval`` cycles).
"""

from __future__ import annotations

import numpy as np

from .core import ConfigError, SimClock, SimulationError
from .metrics import MetricsArrays, MetricsStore, MC_ERR_CYCLE, MC_ERR_WHERE
from .rng import Rng
from .state import (ABORT_POOL, ABORT_QUEUE, ABORT_PENDING, ABORT_STALE,
                    ABORT_GRANTS, ERR_CONSERVATION, PK_SRC, PK_TXN)
from .topology import build_hird, build_single_ring
from .traffic import TrafficSpec, TrafficState, bernoulli_threshold
from . import ring_net, mesh_net
from .ring_net import RingNetwork, ring_chunk
from .mesh_net import MeshNetwork, mesh_chunk

RING_TOPOLOGIES = ("single_ring", "hird")
MESH_TOPOLOGIES = ("mesh_chipper", "mesh_minbd")


class Simulation:
    """A deterministic cycle-accurate run of one network configuration."""

    def __init__(self, config):
        self.config = config
        self.clock = SimClock(0, config.warmup, config.cycles)
        self.rng = Rng(config.seed)
        topo = config.topology

        if topo == "single_ring":
            self.layout = build_single_ring(config.nodes, config.lanes,
                                            config.hop_cycles)
            self.net = RingNetwork(self.layout,
                                   fifo_up=config.fifo_up,
                                   fifo_down=config.fifo_down,
                                   eject_cap=config.eject_cap,
                                   reassembly_slots=config.reassembly_slots)
            self.kind = "ring"
        elif topo == "hird":
            self.layout = build_hird(config.nodes, config.bridges,
                                     config.lane_ratio, config.local_hop,
                                     config.global_hop)
            self.net = RingNetwork(self.layout,
                                   fifo_up=config.fifo_up,
                                   fifo_down=config.fifo_down,
                                   eject_cap=config.eject_cap,
                                   reassembly_slots=config.reassembly_slots)
            self.kind = "ring"
        elif topo in MESH_TOPOLOGIES:
            side = int(round(config.nodes ** 0.5))
            if side * side != config.nodes:
                raise ConfigError(f"mesh needs a square node count, got {config.nodes}")
            mode = "minbd" if topo == "mesh_minbd" else "chipper"
            self.net = MeshNetwork(side, side, mode=mode,
                                   sb_depth=config.side_buffer,
                                   eject_cap=1 if config.strict_chipper else config.eject_cap,
                                   reassembly_slots=config.reassembly_slots)
            self.layout = None
            self.kind = "mesh"
        else:
            raise ConfigError(f"unknown topology: {topo}")

        spec = TrafficSpec(config.pattern, config.rate, config.num_flits,
                           config.trace)
        self.traffic = TrafficState(spec, self.layout, config.nodes)
        self.bern = bernoulli_threshold(config.rate, config.num_flits)

        n_rings = self.layout.n_rings if self.layout is not None else 1
        self.metrics_arrays = MetricsArrays(self.clock.total_cycles, n_rings)
        self.store = MetricsStore(self.metrics_arrays, config.nodes)
        self.ip = self._build_ip()

    # -- kernel parameter block ---------------------------------------------
    def _build_ip(self) -> np.ndarray:
        c = self.config
        if self.kind == "ring":
            ip = np.zeros(ring_net.IP_LEN, dtype=np.int64)
            ip[ring_net.IP_N_NODES] = c.nodes
            ip[ring_net.IP_NUM_FLITS] = c.num_flits
            ip[ring_net.IP_WARMUP] = c.warmup
            ip[ring_net.IP_PATTERN] = self.traffic.pattern_code
            ip[ring_net.IP_EJECT_CAP] = self.net.eject_cap
            ip[ring_net.IP_INJ_ON] = 1 if c.injection_guarantee else 0
            ip[ring_net.IP_TR_ON] = 1 if c.transfer_guarantee else 0
            ip[ring_net.IP_INJ_THRESH] = c.injection_threshold
            ip[ring_net.IP_RETRY_THRESH] = c.retry_threshold
            ip[ring_net.IP_SIG_LAT] = c.signal_latency
            ip[ring_net.IP_CHECK_INTERVAL] = c.check_interval
            ip[ring_net.IP_INJECT_ENABLED] = 1
            return ip
        ip = np.zeros(mesh_net.MIP_LEN, dtype=np.int64)
        ip[mesh_net.MIP_N_NODES] = c.nodes
        ip[mesh_net.MIP_WIDTH] = self.net.width
        ip[mesh_net.MIP_HEIGHT] = self.net.height
        ip[mesh_net.MIP_NUM_FLITS] = c.num_flits
        ip[mesh_net.MIP_WARMUP] = c.warmup
        ip[mesh_net.MIP_PATTERN] = self.traffic.pattern_code
        ip[mesh_net.MIP_EJECT_CAP] = self.net.eject_cap
        ip[mesh_net.MIP_MODE] = 1 if self.net.mode == "minbd" else 0
        ip[mesh_net.MIP_C_THRESH] = c.c_threshold
        ip[mesh_net.MIP_SB_DEPTH] = max(c.side_buffer, 1)
        epoch = c.golden_epoch
        if epoch <= 0:
            epoch = 8 * (self.net.width + self.net.height)
        ip[mesh_net.MIP_EPOCH] = epoch
        ip[mesh_net.MIP_TXN_WINDOW] = c.txn_window
        ip[mesh_net.MIP_CHECK_INTERVAL] = c.check_interval
        ip[mesh_net.MIP_INJECT_ENABLED] = 1
        return ip

    @property
    def golden_epoch(self) -> int:
        return int(self.ip[mesh_net.MIP_EPOCH]) if self.kind == "mesh" else 0

    def set_injection_enabled(self, enabled: bool):
        idx = ring_net.IP_INJECT_ENABLED if self.kind == "ring" \
            else mesh_net.MIP_INJECT_ENABLED
        self.ip[idx] = 1 if enabled else 0

    # -- execution ------------------------------------------------------------
    def _run_chunk(self, n: int):
        met = self.metrics_arrays.kernel_view()
        tr = self.traffic.kernel_view()
        if self.kind == "ring":
            return ring_chunk(self.clock.cycle, n, self.bern, self.ip,
                              self.rng.raw(),
                              self.net.topo_args(), self.net.bridge_args(),
                              self.net.obs_args(), self.net.throttle_args(),
                              self.net.regs, self.net.queue_args(),
                              self.net.pool.kernel_view(),
                              self.net.reassembly.kernel_view(),
                              self.net.grant_buf, self.net.grant_count,
                              tr, met)
        return mesh_chunk(self.clock.cycle, n, self.bern, self.ip,
                          self.rng.raw(), *self.net.mesh_args(),
                          self.net.queue_args(),
                          self.net.pool.kernel_view(),
                          self.net.reassembly.kernel_view(),
                          self.net.grant_buf, self.net.grant_count,
                          tr, met)

    def advance(self, n_cycles: int = 1):
        """Run exactly ``n_cycles`` simulated cycles."""
        remaining = n_cycles
        while remaining > 0:
            done, code = self._run_chunk(remaining)
            self.clock.cycle += int(done)
            remaining -= int(done)
            if code == 0:
                continue
            if code == ABORT_QUEUE:
                self.net.queues.grow()
            elif code == ABORT_PENDING:
                self.net.reassembly.grow_pending()
            elif code == ABORT_STALE:
                self.net.reassembly.grow_stale()
            elif code == ABORT_POOL:
                self.net.pool.grow()
            elif code == ERR_CONSERVATION:
                c = self.metrics_arrays.counters
                raise SimulationError(
                    f"flit conservation violated at cycle {int(c[MC_ERR_CYCLE])}"
                    f" (container delta {int(c[MC_ERR_WHERE])})")
            else:
                raise SimulationError(f"kernel abort code {code}")

    def run(self, windows: int | None = None) -> MetricsStore:
        """Warmup then the measured region, snapshotting window marks."""
        w = windows if windows is not None else self.config.windows
        if self.config.warmup > 0:
            self.advance(self.config.warmup)
        self.store.snapshot_window(self.clock.cycle)
        per = self.config.cycles // w
        for i in range(w):
            n = per if i < w - 1 else self.config.cycles - per * (w - 1)
            if n > 0:
                self.advance(n)
            self.store.snapshot_window(self.clock.cycle)
        return self.store

    def drain(self, max_cycles: int, step: int = 64) -> int:
        """Disable injection and cycle until the network empties.

        Returns the number of cycles taken, or -1 if still occupied
        after ``max_cycles``.  Queued packets stay queued; only
        in-network flits must leave.
        """
        self.set_injection_enabled(False)
        ran = 0
        try:
            while ran < max_cycles:
                n = min(step, max_cycles - ran)
                self.advance(n)
                ran += n
                if self.net.in_flight() == 0:
                    return ran
        finally:
            self.set_injection_enabled(True)
        return -1

    # -- inspection -----------------------------------------------------------
    @property
    def in_flight(self) -> int:
        return self.net.in_flight()

    def packet_live(self, src: int, txn: int) -> bool:
        """Whether any trace of packet (src, txn) is still outstanding."""
        pool = self.net.pool
        live = (pool.arrays[PK_SRC] == src) & (pool.arrays[PK_TXN] == txn)
        if bool(np.any(live)):
            return True
        q = self.net.queues
        for qq in range(q.n_queues):
            for k in range(int(q.size[qq])):
                pos = (int(q.head[qq]) + k) % q.capacity
                if int(q.txn[qq, pos]) == txn and qq_src(qq, self.kind) == src:
                    return True
        ra = self.net.reassembly
        if bool(np.any((ra.r_src == src) & (ra.r_txn == txn))):
            return True
        for node in range(ra.n_nodes):
            for k in range(int(ra.p_size[node])):
                pos = (int(ra.p_head[node]) + k) % ra.pending_cap
                if int(ra.p_src[node, pos]) == src and \
                        int(ra.p_txn[node, pos]) == txn:
                    return True
        return False

    # -- snapshot/restore -------------------------------------------------------
    def snapshot(self) -> dict:
        return {
            "net": self.net.snapshot(),
            "cycle": self.clock.cycle,
            "rng": self.rng.raw().copy(),
            "metrics": self.metrics_arrays.copy(),
            "adv_rr": self.traffic.adv_rr.copy(),
            "trace_ptr": self.traffic.trace_ptr.copy(),
        }

    def restore(self, snap: dict):
        self.net.restore(snap["net"])
        self.clock.cycle = snap["cycle"]
        self.rng.raw()[...] = snap["rng"]
        m = snap["metrics"]
        self.metrics_arrays.counters[...] = m.counters
        self.metrics_arrays.lat_hist_enq[...] = m.lat_hist_enq
        self.metrics_arrays.lat_hist_net[...] = m.lat_hist_net
        self.metrics_arrays.retry_hist[...] = m.retry_hist
        self.metrics_arrays.ring_src_delivered[...] = m.ring_src_delivered
        self.metrics_arrays.event_hash[...] = m.event_hash
        self.metrics_arrays.scratch[...] = m.scratch
        self.traffic.adv_rr[...] = snap["adv_rr"]
        self.traffic.trace_ptr[...] = snap["trace_ptr"]


def qq_src(queue_index: int, kind: str) -> int:
    """Owning node of an injection queue index."""
    return queue_index // 2 if kind == "ring" else queue_index
