"""In-place packet reassembly with drop-and-retransmit-once flow control.

Every flit reaching its destination is consumed in that cycle: stored
into a reassembly slot, or dropped when the packet has no slot and none
is free.  A drop marks the packet in the receiver's pending queue; when
a slot frees up, the oldest pending packet gets the slot reserved and
the sender re-enqueues the whole packet once (zero-latency out-of-band
request).  The network side therefore never stalls on reassembly.

Bookkeeping guarantees exactly-once delivery: a reserved slot knows how
many arrivals it will consume in total (remaining originals plus the
retransmitted copies), and any copies still in flight after delivery
are absorbed by a small stale filter instead of opening a new slot.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# receive_flit outcome codes
RX_DROPPED = 0
RX_STORED = 1
RX_DELIVERED = 2
RX_DUPLICATE = 3
RX_STALE = 4
RX_NEED_PENDING = -3
RX_NEED_STALE = -4
RX_NEED_GRANT = -5


class ReassemblyState:
    """Per-node slots, pending-retransmit queues and stale filters."""

    def __init__(self, n_nodes: int, slots: int, pending_cap: int = 32,
                 stale_cap: int = 32):
        self.n_nodes = n_nodes
        self.slots = slots
        shape = (n_nodes, slots)
        self.r_src = np.full(shape, -1, dtype=np.int64)
        self.r_txn = np.zeros(shape, dtype=np.int64)
        self.r_mask = np.zeros(shape, dtype=np.int64)
        self.r_nf = np.zeros(shape, dtype=np.int64)
        self.r_expected = np.zeros(shape, dtype=np.int64)
        self.r_count = np.zeros(shape, dtype=np.int64)
        self.pending_cap = pending_cap
        self.p_src = np.zeros((n_nodes, pending_cap), dtype=np.int64)
        self.p_txn = np.zeros((n_nodes, pending_cap), dtype=np.int64)
        self.p_nf = np.zeros((n_nodes, pending_cap), dtype=np.int64)
        self.p_enq = np.zeros((n_nodes, pending_cap), dtype=np.int64)
        self.p_drops = np.zeros((n_nodes, pending_cap), dtype=np.int64)
        self.p_head = np.zeros(n_nodes, dtype=np.int64)
        self.p_size = np.zeros(n_nodes, dtype=np.int64)
        self.stale_cap = stale_cap
        self.f_src = np.zeros((n_nodes, stale_cap), dtype=np.int64)
        self.f_txn = np.zeros((n_nodes, stale_cap), dtype=np.int64)
        self.f_rem = np.zeros((n_nodes, stale_cap), dtype=np.int64)
        self.f_size = np.zeros(n_nodes, dtype=np.int64)

    def kernel_view(self):
        return (self.r_src, self.r_txn, self.r_mask, self.r_nf,
                self.r_expected, self.r_count,
                self.p_src, self.p_txn, self.p_nf, self.p_enq, self.p_drops,
                self.p_head, self.p_size,
                self.f_src, self.f_txn, self.f_rem, self.f_size)

    def grow_pending(self):
        new_cap = self.pending_cap * 2
        for name in ("p_src", "p_txn", "p_nf", "p_enq", "p_drops"):
            old = getattr(self, name)
            new = np.zeros((self.n_nodes, new_cap), dtype=np.int64)
            for n in range(self.n_nodes):
                h, s = int(self.p_head[n]), int(self.p_size[n])
                for k in range(s):
                    new[n, k] = old[n, (h + k) % self.pending_cap]
            setattr(self, name, new)
        self.p_head[:] = 0
        self.pending_cap = new_cap

    def grow_stale(self):
        new_cap = self.stale_cap * 2
        for name in ("f_src", "f_txn", "f_rem"):
            old = getattr(self, name)
            new = np.zeros((self.n_nodes, new_cap), dtype=np.int64)
            new[:, : self.stale_cap] = old
            setattr(self, name, new)
        self.stale_cap = new_cap

    def occupied_slots(self) -> int:
        return int(np.sum(self.r_src >= 0))


# RA tuple indices (kernel_view order)
_R_SRC, _R_TXN, _R_MASK, _R_NF, _R_EXP, _R_CNT = 0, 1, 2, 3, 4, 5
_P_SRC, _P_TXN, _P_NF, _P_ENQ, _P_DROPS, _P_HEAD, _P_SIZE = 6, 7, 8, 9, 10, 11, 12
_F_SRC, _F_TXN, _F_REM, _F_SIZE = 13, 14, 15, 16


@njit(cache=True)
def receive_flit(ra, node, fsrc, ftxn, fseq, fnf, fenq,
                 grant_buf, grant_count):
    """Consume one arriving flit at ``node``; never blocks.

    Returns an RX_* code.  On delivery, a freed slot is immediately
    re-reserved for the oldest pending retransmission (if any) and a
    grant record (sender, txn, nf, enq, receiver) is appended to
    ``grant_buf`` for the caller to apply after the router pass.
    """
    r_src, r_txn, r_mask, r_nf = ra[_R_SRC], ra[_R_TXN], ra[_R_MASK], ra[_R_NF]
    r_exp, r_cnt = ra[_R_EXP], ra[_R_CNT]
    f_src, f_txn, f_rem, f_size = ra[_F_SRC], ra[_F_TXN], ra[_F_REM], ra[_F_SIZE]

    # stale duplicates from an already-delivered retransmitted packet
    for k in range(f_size[node]):
        if f_src[node, k] == fsrc and f_txn[node, k] == ftxn:
            f_rem[node, k] -= 1
            if f_rem[node, k] <= 0:
                last = f_size[node] - 1
                f_src[node, k] = f_src[node, last]
                f_txn[node, k] = f_txn[node, last]
                f_rem[node, k] = f_rem[node, last]
                f_size[node] -= 1
            return RX_STALE

    n_slots = r_src.shape[1]
    slot = -1
    free_slot = -1
    for s in range(n_slots):
        if r_src[node, s] == fsrc and r_txn[node, s] == ftxn:
            slot = s
            break
        if r_src[node, s] < 0 and free_slot < 0:
            free_slot = s

    if slot >= 0:
        r_cnt[node, slot] += 1
        bit = np.int64(1) << np.uint64(fseq)
        if r_mask[node, slot] & bit:
            return RX_DUPLICATE
        r_mask[node, slot] |= bit
        full = (np.int64(1) << np.uint64(r_nf[node, slot])) - 1
        if r_mask[node, slot] != full:
            return RX_STORED
        # delivered: maybe leave a stale-filter entry, then hand the slot on
        remaining = r_exp[node, slot] - r_cnt[node, slot]
        if remaining > 0:
            if f_size[node] >= f_src.shape[1]:
                return RX_NEED_STALE
            k = f_size[node]
            f_src[node, k] = fsrc
            f_txn[node, k] = ftxn
            f_rem[node, k] = remaining
            f_size[node] += 1
        r_src[node, slot] = -1
        _grant_slot(ra, node, slot, grant_buf, grant_count)
        return RX_DELIVERED

    # unknown packet: pending packets stay in the drop path until granted
    p_src, p_txn, p_size, p_head = ra[_P_SRC], ra[_P_TXN], ra[_P_SIZE], ra[_P_HEAD]
    p_drops = ra[_P_DROPS]
    cap = p_src.shape[1]
    for k in range(p_size[node]):
        pos = (p_head[node] + k) % cap
        if p_src[node, pos] == fsrc and p_txn[node, pos] == ftxn:
            p_drops[node, pos] += 1
            return RX_DROPPED

    if free_slot >= 0:
        r_src[node, free_slot] = fsrc
        r_txn[node, free_slot] = ftxn
        r_nf[node, free_slot] = fnf
        r_exp[node, free_slot] = fnf
        r_cnt[node, free_slot] = 1
        r_mask[node, free_slot] = np.int64(1) << np.uint64(fseq)
        if fnf == 1:
            r_src[node, free_slot] = -1
            _grant_slot(ra, node, free_slot, grant_buf, grant_count)
            return RX_DELIVERED
        return RX_STORED

    # drop and set the retransmit bit
    if p_size[node] >= cap:
        return RX_NEED_PENDING
    pos = (p_head[node] + p_size[node]) % cap
    p_src[node, pos] = fsrc
    p_txn[node, pos] = ftxn
    ra[_P_NF][node, pos] = fnf
    ra[_P_ENQ][node, pos] = fenq
    p_drops[node, pos] = 1
    p_size[node] += 1
    return RX_DROPPED


@njit(cache=True)
def _grant_slot(ra, node, slot, grant_buf, grant_count):
    """Reserve the freed ``slot`` for the oldest pending packet."""
    p_head, p_size = ra[_P_HEAD], ra[_P_SIZE]
    if p_size[node] == 0:
        return
    if grant_count[0] >= grant_buf.shape[0]:
        grant_count[1] = 1  # overflow flag; caller aborts the chunk
        return
    cap = ra[_P_SRC].shape[1]
    h = p_head[node]
    sender = ra[_P_SRC][node, h]
    txn = ra[_P_TXN][node, h]
    nf = ra[_P_NF][node, h]
    enq = ra[_P_ENQ][node, h]
    drops = ra[_P_DROPS][node, h]
    p_head[node] = (h + 1) % cap
    p_size[node] -= 1

    r = ra[_R_SRC]
    r[node, slot] = sender
    ra[_R_TXN][node, slot] = txn
    ra[_R_NF][node, slot] = nf
    ra[_R_MASK][node, slot] = 0
    ra[_R_CNT][node, slot] = 0
    # remaining originals (nf - drops) plus one full retransmission
    ra[_R_EXP][node, slot] = 2 * nf - drops

    g = grant_count[0]
    grant_buf[g, 0] = sender
    grant_buf[g, 1] = txn
    grant_buf[g, 2] = nf
    grant_buf[g, 3] = enq
    grant_buf[g, 4] = node
    grant_count[0] = g + 1
