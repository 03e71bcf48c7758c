"""Flit materialisation and consumption shared by the network engines.

Injection allocates a pool entry from a queued packet descriptor;
consumption runs the reassembly protocol, updates the metric counters
and histograms, folds the event digest, and recycles the pool entry.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .rng import mix64
from .state import (PK_SRC, PK_TXN, PK_SEQ, PK_NF, PK_FSRC, PK_FDST, PK_ENQ,
                    PK_INJ, PK_DEFL, PK_RETRY, pool_alloc, pool_free)
from .reassembly import (receive_flit, RX_DROPPED, RX_STORED, RX_DELIVERED,
                         RX_DUPLICATE, RX_STALE)
from .metrics import (MC_INJECTED, MC_EJECTED, MC_DROPPED, MC_DELIVERED_PKTS,
                      MC_LAT_SUM_ENQ, MC_LAT_COUNT, MC_LAT_SUM_NET,
                      MC_RETX_GRANTS, MC_DUPLICATES, MC_STALE, RETRY_HIST_LEN)

_PRIME = np.uint64(0x9E3779B97F4A7C15)


@njit(cache=True)
def flit_key(src, txn, seq):
    return (src << 48) | ((txn & 0xFFFFFFFFFF) << 8) | (seq & 0xFF)


@njit(cache=True)
def fold_event(ev_hash, tag, cycle, key):
    ev_hash[0] = mix64(ev_hash[0] ^ (np.uint64(key) + np.uint64(cycle + tag) * _PRIME))


@njit(cache=True)
def materialize_flit(pool, counters, ev_hash, gs,
                     node, dst, nf, seq, txn, enq, cycle):
    """Create the next flit of a packet as it enters the network."""
    fidx = pool_alloc(pool)
    if fidx < 0:
        return -1
    pool[PK_SRC][fidx] = node
    pool[PK_TXN][fidx] = txn
    pool[PK_SEQ][fidx] = seq
    pool[PK_NF][fidx] = nf
    pool[PK_FSRC][fidx] = node
    pool[PK_FDST][fidx] = dst
    pool[PK_ENQ][fidx] = enq
    pool[PK_INJ][fidx] = cycle
    pool[PK_DEFL][fidx] = 0
    pool[PK_RETRY][fidx] = 0
    counters[MC_INJECTED] += 1
    gs[0] -= 1  # queued flits
    fold_event(ev_hash, 1, cycle, flit_key(node, txn, seq))
    return fidx


@njit(cache=True)
def consume_flit(pool, ra, counters, lat_hist_enq, lat_hist_net, retry_hist,
                 ring_src_del, ev_hash, src_group, grant_buf, grant_count,
                 node, fidx, cycle, warmup):
    """Consume one flit arriving at its destination node.

    Returns the RX_* code.  The pool entry is always recycled: arrivals
    are consumed or dropped in their arrival cycle, never buffered.
    """
    fsrc = pool[PK_FSRC][fidx]
    txn = pool[PK_TXN][fidx]
    seq = pool[PK_SEQ][fidx]
    nf = pool[PK_NF][fidx]
    enq = pool[PK_ENQ][fidx]
    code = receive_flit(ra, node, fsrc, txn, seq, nf, enq, grant_buf, grant_count)
    if code < 0:
        return code

    if code == RX_DROPPED:
        counters[MC_DROPPED] += 1
    else:
        counters[MC_EJECTED] += 1
        if code == RX_DUPLICATE:
            counters[MC_DUPLICATES] += 1
        elif code == RX_STALE:
            counters[MC_STALE] += 1
        else:
            # first arrival of this flit: sample latency and attribution
            ring_src_del[src_group[fsrc]] += 1
            if enq >= warmup:
                lat = cycle - enq
                if lat >= lat_hist_enq.shape[0]:
                    lat = lat_hist_enq.shape[0] - 1
                lat_hist_enq[lat] += 1
                nlat = cycle - pool[PK_INJ][fidx]
                if nlat >= lat_hist_net.shape[0]:
                    nlat = lat_hist_net.shape[0] - 1
                lat_hist_net[nlat] += 1
                counters[MC_LAT_SUM_ENQ] += cycle - enq
                counters[MC_LAT_SUM_NET] += nlat
                counters[MC_LAT_COUNT] += 1
                r = pool[PK_RETRY][fidx]
                if r >= RETRY_HIST_LEN:
                    r = RETRY_HIST_LEN - 1
                retry_hist[r] += 1
            if code == RX_DELIVERED:
                counters[MC_DELIVERED_PKTS] += 1

    fold_event(ev_hash, 2, cycle, flit_key(fsrc, txn, seq))
    pool_free(pool, fidx)
    return code


@njit(cache=True)
def count_grants(counters, n):
    counters[MC_RETX_GRANTS] += n
