"""Experiment execution: single runs, rate sweeps, result rows.

A sweep runs one simulation instance per rate and terminates at network
saturation: average latency above the threshold, or injection-queue
occupancy growing monotonically across the last three measurement
windows.  Sweeps may run on a process pool; rows are order-normalised
(config hash, then rate) so worker count never changes the output.
"""

from __future__ import annotations

import multiprocessing as mp
from dataclasses import dataclass, replace

import numpy as np

from .config import ExperimentConfig
from .metrics import (occupancy_growing, MC_DEFLECTIONS, MC_RING_RETRIES,
                      MC_MAX_RING_RETRIES, MC_SWAPS, MC_FIFO_WAIT_SUM,
                      MC_FIFO_WAIT_COUNT, MC_FIFO_WAIT_MAX,
                      MC_FIFO_HEAD_WAIT_MAX, MC_DROPPED, MC_RETX_GRANTS,
                      MC_INJECTED, MC_EJECTED, MC_DELIVERED_PKTS,
                      MC_THROTTLE_ACTIVATIONS, MC_LAT_COUNT)
from .simulation import Simulation


@dataclass
class ResultRow:
    config_hash: str
    topology: str
    nodes: int
    pattern: str
    rate: float
    seed: int
    cycles: int
    warmup: int
    avg_latency: float | None
    p95_latency: int | None
    max_latency: int | None
    avg_net_latency: float | None
    p95_net_latency: int | None
    max_net_latency: int | None
    throughput: float
    ring_throughput: str
    deflections: int
    deflections_per_flit: float
    ring_retries: int
    max_ring_retries: int
    fifo_wait_avg: float | None
    fifo_wait_max: int
    fifo_head_wait_max: int
    swaps: int
    drops: int
    retransmits: int
    throttle_activations: int
    injected: int
    ejected: int
    delivered_packets: int
    saturated: int
    event_hash: str
    runtime_cycles: int

    COLUMNS = ("config_hash", "topology", "nodes", "pattern", "rate", "seed",
               "cycles", "warmup", "avg_latency", "p95_latency", "max_latency",
               "avg_net_latency", "p95_net_latency", "max_net_latency",
               "throughput", "ring_throughput", "deflections",
               "deflections_per_flit", "ring_retries", "max_ring_retries",
               "fifo_wait_avg", "fifo_wait_max", "fifo_head_wait_max",
               "swaps", "drops", "retransmits", "throttle_activations",
               "injected", "ejected", "delivered_packets", "saturated",
               "event_hash", "runtime_cycles")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def run_experiment(config: ExperimentConfig) -> ResultRow:
    """One measured run at the configured rate."""
    sim = Simulation(config)
    store = sim.run()
    c = store.counters
    lat = store.latency_stats()
    per_window = store.queue_occupancy_per_window()
    lat_avg = lat["avg_enq"]
    saturated = (lat_avg is not None and lat_avg > config.sat_threshold) or \
        occupancy_growing(per_window)

    n_rings = sim.layout.n_rings if sim.layout is not None else 1
    window_cycles = config.cycles
    ring_tp = []
    if sim.layout is not None and sim.layout.n_bridges > 0:
        for r in range(n_rings):
            if sim.layout.ring_level[r] == sim.layout.levels - 1:
                nodes_on = int(np.sum(sim.layout.node_ring == r))
                ring_tp.append(store.ring_throughput(r, nodes_on, window_cycles))
    fifo_waits = int(c[MC_FIFO_WAIT_COUNT])
    ejected = int(c[MC_EJECTED])
    return ResultRow(
        config_hash=config.config_hash(),
        topology=config.topology,
        nodes=config.nodes,
        pattern=config.pattern,
        rate=config.rate,
        seed=config.seed,
        cycles=config.cycles,
        warmup=config.warmup,
        avg_latency=lat["avg_enq"],
        p95_latency=lat["p95_enq"],
        max_latency=lat["max_enq"],
        avg_net_latency=lat["avg_net"],
        p95_net_latency=lat["p95_net"],
        max_net_latency=lat["max_net"],
        throughput=ejected / (config.nodes * config.cycles),
        ring_throughput=";".join(f"{t:.6g}" for t in ring_tp),
        deflections=int(c[MC_DEFLECTIONS]),
        deflections_per_flit=(int(c[MC_DEFLECTIONS]) / ejected) if ejected else 0.0,
        ring_retries=int(c[MC_RING_RETRIES]),
        max_ring_retries=int(c[MC_MAX_RING_RETRIES]),
        fifo_wait_avg=(int(c[MC_FIFO_WAIT_SUM]) / fifo_waits) if fifo_waits else None,
        fifo_wait_max=int(c[MC_FIFO_WAIT_MAX]),
        fifo_head_wait_max=int(c[MC_FIFO_HEAD_WAIT_MAX]),
        swaps=int(c[MC_SWAPS]),
        drops=int(c[MC_DROPPED]),
        retransmits=int(c[MC_RETX_GRANTS]),
        throttle_activations=int(c[MC_THROTTLE_ACTIVATIONS]),
        injected=int(c[MC_INJECTED]),
        ejected=ejected,
        delivered_packets=int(c[MC_DELIVERED_PKTS]),
        saturated=1 if saturated else 0,
        event_hash=f"{store.event_hash:016x}",
        runtime_cycles=config.warmup + config.cycles,
    )


def parse_rate_sweep(text: str) -> list[float]:
    """Parse 'a:b:step' into an inclusive rate list."""
    try:
        a, b, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise ValueError(f"bad rate sweep {text!r}, expected a:b:step") from None
    if step <= 0 or b < a:
        raise ValueError("rate sweep needs a <= b and step > 0")
    rates = []
    k = 0
    while True:
        r = a + k * step
        if r > b + 1e-12:
            break
        rates.append(round(r, 12))
        k += 1
    return rates


def run_sweep(config: ExperimentConfig, rates: list[float],
              workers: int = 1) -> list[ResultRow]:
    """Run one instance per rate; truncate past the first saturated rate."""
    configs = [replace(config, rate=r) for r in rates]
    for c in configs:
        c.validate()
    if workers > 1 and len(configs) > 1:
        ctx = mp.get_context("fork")
        with ctx.Pool(workers) as pool:
            rows = pool.map(run_experiment, configs)
    else:
        rows = []
        for c in configs:
            row = run_experiment(c)
            rows.append(row)
            if row.saturated:
                break
    # truncate in rate order at the first saturated point, then normalise
    out = []
    for row in rows:
        out.append(row)
        if row.saturated:
            break
    out.sort(key=lambda r: (r.config_hash, r.rate))
    return out
