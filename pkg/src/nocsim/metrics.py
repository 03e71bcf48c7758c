"""Run statistics: latency distributions, throughput, deflection counts.

Latencies are integer cycle counts, so distributions are kept as exact
histograms indexed by latency (bounded by the run length).  Two
variants are recorded per flit: enqueue-to-eject (includes source
queueing) and inject-to-eject (network only).  Samples are taken at the
first arrival of each flit of post-warmup packets; duplicates from
retransmissions are not re-sampled.
"""

from __future__ import annotations

import numpy as np

# counter indices (metrics counters array)
MC_INJECTED = 0
MC_EJECTED = 1            # flits consumed by receivers (incl. duplicates/stale)
MC_DROPPED = 2
MC_DELIVERED_PKTS = 3
MC_DEFLECTIONS = 4
MC_RING_RETRIES = 5
MC_MAX_RING_RETRIES = 6
MC_SWAPS = 7
MC_FIFO_WAIT_SUM = 8
MC_FIFO_WAIT_COUNT = 9
MC_FIFO_WAIT_MAX = 10
MC_FIFO_HEAD_WAIT_MAX = 11
MC_LAT_SUM_ENQ = 12
MC_LAT_COUNT = 13
MC_LAT_SUM_NET = 14
MC_OCC_SUM = 15
MC_RETX_GRANTS = 16
MC_DUPLICATES = 17
MC_STALE = 18
MC_THROTTLE_ACTIVATIONS = 19
MC_REDIRECTIONS = 20
MC_BUFFER_EJECTS = 21
MC_TOP_PRIORITY_VIOLATIONS = 22
MC_MAX_SB_RESIDENCE = 23
MC_EJECT_DENIALS = 24
MC_GOLDEN_DEFLECTIONS = 25
MC_PERMUTE_IMBALANCE = 26
MC_ERR_CYCLE = 27
MC_ERR_WHERE = 28
NUM_COUNTERS = 32

RETRY_HIST_LEN = 4097  # last bin collects the overflow


def percentile(samples, p: float):
    """Nearest-rank percentile: the value at index ceil(p/100 * n) (1-based).

    Returns None for empty samples (reported as absent downstream).
    """
    if p <= 0 or p > 100:
        raise ValueError("percentile p must be in (0, 100]")
    xs = sorted(samples)
    if not xs:
        return None
    n = len(xs)
    rank = -(-p * n // 100)  # ceil(p/100 * n) without float error
    rank = int(max(1, min(n, rank)))
    return xs[rank - 1]


def percentile_from_hist(hist: np.ndarray, count: int, p: float):
    """Nearest-rank percentile over an integer-value histogram."""
    if count == 0:
        return None
    rank = int(-(-p * count // 100))
    rank = max(1, min(count, rank))
    acc = 0
    for v in range(hist.shape[0]):
        acc += int(hist[v])
        if acc >= rank:
            return v
    return hist.shape[0] - 1


def max_from_hist(hist: np.ndarray):
    nz = np.nonzero(hist)[0]
    return int(nz[-1]) if nz.size else None


class MetricsArrays:
    """Kernel-visible metric storage for one simulation instance."""

    def __init__(self, total_cycles: int, n_rings: int):
        self.counters = np.zeros(NUM_COUNTERS, dtype=np.int64)
        self.lat_hist_enq = np.zeros(total_cycles + 2, dtype=np.int64)
        self.lat_hist_net = np.zeros(total_cycles + 2, dtype=np.int64)
        self.retry_hist = np.zeros(RETRY_HIST_LEN, dtype=np.int64)
        self.ring_src_delivered = np.zeros(max(n_rings, 1), dtype=np.int64)
        self.event_hash = np.zeros(1, dtype=np.uint64)
        self.scratch = np.zeros(4, dtype=np.int64)  # [queued_flits, ...]

    def kernel_view(self):
        return (self.counters, self.lat_hist_enq, self.lat_hist_net,
                self.retry_hist, self.ring_src_delivered, self.event_hash,
                self.scratch)

    def copy(self) -> "MetricsArrays":
        m = MetricsArrays.__new__(MetricsArrays)
        m.counters = self.counters.copy()
        m.lat_hist_enq = self.lat_hist_enq.copy()
        m.lat_hist_net = self.lat_hist_net.copy()
        m.retry_hist = self.retry_hist.copy()
        m.ring_src_delivered = self.ring_src_delivered.copy()
        m.event_hash = self.event_hash.copy()
        m.scratch = self.scratch.copy()
        return m


class MetricsStore:
    """Finalized statistics for one run, plus per-window snapshots."""

    def __init__(self, arrays: MetricsArrays, n_nodes: int):
        self.arrays = arrays
        self.n_nodes = n_nodes
        self.window_marks: list[dict] = []

    def snapshot_window(self, cycle: int):
        c = self.arrays.counters
        self.window_marks.append({
            "cycle": cycle,
            "ring_src_delivered": self.arrays.ring_src_delivered.copy(),
            "occ_sum": int(c[MC_OCC_SUM]),
            "ejected": int(c[MC_EJECTED]),
        })

    # -- scalar accessors -------------------------------------------------
    @property
    def counters(self):
        return self.arrays.counters

    def counter(self, idx: int) -> int:
        return int(self.arrays.counters[idx])

    @property
    def event_hash(self) -> int:
        return int(self.arrays.event_hash[0])

    def latency_stats(self) -> dict:
        c = self.arrays.counters
        n = int(c[MC_LAT_COUNT])
        out = {"count": n}
        for name, hist, total in (
            ("enq", self.arrays.lat_hist_enq, int(c[MC_LAT_SUM_ENQ])),
            ("net", self.arrays.lat_hist_net, int(c[MC_LAT_SUM_NET])),
        ):
            out[f"avg_{name}"] = (total / n) if n else None
            out[f"p95_{name}"] = percentile_from_hist(hist, n, 95.0)
            out[f"max_{name}"] = max_from_hist(hist)
        return out

    def ring_throughput(self, ring: int, window_nodes: int, window_cycles: int,
                        start_mark: int = 0, end_mark: int = -1) -> float:
        """Delivered flits sourced from ``ring`` per node per cycle."""
        marks = self.window_marks
        if not marks:
            raise ValueError("no window snapshots recorded")
        a = marks[start_mark]["ring_src_delivered"][ring]
        b = marks[end_mark]["ring_src_delivered"][ring]
        return float(b - a) / (window_nodes * window_cycles)

    def queue_occupancy_per_window(self) -> list[float]:
        """Average queued flits per cycle inside each snapshot window."""
        out = []
        for a, b in zip(self.window_marks, self.window_marks[1:]):
            dc = b["cycle"] - a["cycle"]
            out.append((b["occ_sum"] - a["occ_sum"]) / dc if dc else 0.0)
        return out


def occupancy_growing(per_window: list[float], windows: int = 3) -> bool:
    """True when queue occupancy rose strictly across the last ``windows``."""
    if len(per_window) < windows:
        return False
    tail = per_window[-windows:]
    return all(b > a for a, b in zip(tail, tail[1:]))
