"""Mutable per-instance simulation state: flit pool and injection queues.

Hot-loop state lives in flat numpy arrays so the cycle kernels can be
compiled.  Flits are struct-of-arrays entries addressed by pool index;
-1 everywhere means "no flit".  Injection queues hold packet
descriptors (a flit is materialised only when it enters the network),
which keeps memory bounded by live network flits plus queued packets.

Growable containers are grown from Python between kernel chunks; a
kernel that runs out of space aborts its chunk with a resource code and
is resumed after the grow.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# pool tuple layout (UniTuple of int64 arrays)
PK_SRC, PK_TXN, PK_SEQ, PK_NF, PK_FSRC, PK_FDST = 0, 1, 2, 3, 4, 5
PK_ENQ, PK_INJ, PK_DEFL, PK_RETRY, PK_FREE, PK_META = 6, 7, 8, 9, 10, 11
# meta slots
PM_FREE_TOP, PM_NEXT_FRESH, PM_LIVE = 0, 1, 2

# kernel abort codes (negative); 0 = chunk completed
ABORT_POOL = -1
ABORT_QUEUE = -2
ABORT_PENDING = -3
ABORT_STALE = -4
ABORT_GRANTS = -5
ERR_CONSERVATION = -100


class FlitPool:
    """Recycling struct-of-arrays flit storage."""

    FIELDS = 10

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.arrays = [np.full(capacity, -1, dtype=np.int64) for _ in range(self.FIELDS)]
        self.free_stack = np.zeros(capacity, dtype=np.int64)
        self.meta = np.zeros(3, dtype=np.int64)

    def kernel_view(self):
        return tuple(self.arrays) + (self.free_stack, self.meta)

    def grow(self):
        new_cap = self.capacity * 2
        for i in range(self.FIELDS):
            a = np.full(new_cap, -1, dtype=np.int64)
            a[: self.capacity] = self.arrays[i]
            self.arrays[i] = a
        fs = np.zeros(new_cap, dtype=np.int64)
        fs[: self.capacity] = self.free_stack
        self.free_stack = fs
        self.capacity = new_cap

    @property
    def live(self) -> int:
        return int(self.meta[PM_LIVE])


@njit(cache=True)
def pool_alloc(pool):
    """Returns a fresh flit index, or -1 when the pool is exhausted."""
    meta = pool[PK_META]
    if meta[PM_FREE_TOP] > 0:
        meta[PM_FREE_TOP] -= 1
        idx = pool[PK_FREE][meta[PM_FREE_TOP]]
    else:
        idx = meta[PM_NEXT_FRESH]
        if idx >= pool[PK_SRC].shape[0]:
            return -1
        meta[PM_NEXT_FRESH] += 1
    meta[PM_LIVE] += 1
    return idx


@njit(cache=True)
def pool_free(pool, idx):
    meta = pool[PK_META]
    pool[PK_FREE][meta[PM_FREE_TOP]] = idx
    meta[PM_FREE_TOP] += 1
    meta[PM_LIVE] -= 1
    pool[PK_SRC][idx] = -1


class PacketQueues:
    """Per-injection-point FIFO of packet descriptors (ring buffers).

    Ring nodes own two queues (one per travel direction); mesh nodes
    one.  ``cursor`` counts flits of the head packet already injected.
    """

    def __init__(self, n_queues: int, capacity: int = 64):
        self.n_queues = n_queues
        self.capacity = capacity
        self.dst = np.zeros((n_queues, capacity), dtype=np.int64)
        self.nf = np.zeros((n_queues, capacity), dtype=np.int64)
        self.enq = np.zeros((n_queues, capacity), dtype=np.int64)
        self.txn = np.zeros((n_queues, capacity), dtype=np.int64)
        self.head = np.zeros(n_queues, dtype=np.int64)
        self.size = np.zeros(n_queues, dtype=np.int64)
        self.cursor = np.zeros(n_queues, dtype=np.int64)

    def kernel_view(self):
        return (self.dst, self.nf, self.enq, self.txn,
                self.head, self.size, self.cursor)

    def needs_grow(self, slack: int) -> bool:
        return bool(np.any(self.size >= self.capacity - slack))

    def grow(self):
        new_cap = self.capacity * 2
        for name in ("dst", "nf", "enq", "txn"):
            old = getattr(self, name)
            new = np.zeros((self.n_queues, new_cap), dtype=np.int64)
            for q in range(self.n_queues):
                n = int(self.size[q])
                h = int(self.head[q])
                for k in range(n):
                    new[q, k] = old[q, (h + k) % self.capacity]
            setattr(self, name, new)
        self.head[:] = 0
        self.capacity = new_cap

    def total_packets(self) -> int:
        return int(self.size.sum())


@njit(cache=True)
def q_push(qdst, qnf, qenq, qtxn, head, size, q, dst, nf, enq, txn):
    """Append a packet descriptor; returns False when the queue is full."""
    cap = qdst.shape[1]
    if size[q] >= cap:
        return False
    pos = (head[q] + size[q]) % cap
    qdst[q, pos] = dst
    qnf[q, pos] = nf
    qenq[q, pos] = enq
    qtxn[q, pos] = txn
    size[q] += 1
    return True


@njit(cache=True)
def q_push_retx(qdst, qnf, qenq, qtxn, head, size, cursor, q, dst, nf, enq, txn):
    """Re-enqueue a retransmitted packet at the queue head.

    If the current head packet is mid-injection the retransmission goes
    directly behind it so its remaining flits stay contiguous.
    """
    cap = qdst.shape[1]
    if size[q] >= cap:
        return False
    h = head[q]
    nh = (h - 1) % cap
    if size[q] > 0 and cursor[q] > 0:
        # keep the half-injected packet in front
        qdst[q, nh] = qdst[q, h]
        qnf[q, nh] = qnf[q, h]
        qenq[q, nh] = qenq[q, h]
        qtxn[q, nh] = qtxn[q, h]
        qdst[q, h] = dst
        qnf[q, h] = nf
        qenq[q, h] = enq
        qtxn[q, h] = txn
    else:
        qdst[q, nh] = dst
        qnf[q, nh] = nf
        qenq[q, nh] = enq
        qtxn[q, nh] = txn
    head[q] = nh
    size[q] += 1
    return True
