"""2D-mesh deflection router engine (permutation network + priorities).

Router pipeline per cycle: eject up to two locally-addressed flits,
side-buffer redirection when the buffered head is starved, re-inject one
buffered flit, inject one new flit, designate a silver flit, then route
through a two-stage permutation network of two-input arbiter blocks.
Deflected flits (output != preferred port) can be absorbed into the side
buffer (minbd mode); in chipper mode the side-buffer path is absent.

Priorities: the flits of the one currently-golden packet beat all
others (ties between golden flits by sequence number), the per-router
silver flit beats common flits, and common ties flip a fair coin.

Per-hop latency is two cycles: routers read their input registers and
write link registers; link registers feed neighbour inputs next cycle.
Edge ports loop back (a deflection into a wall bounces to own input).
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .state import (FlitPool, PacketQueues, q_push, q_push_retx,
                    PK_SRC, PK_TXN, PK_SEQ, PK_FDST, PK_DEFL,
                    ABORT_QUEUE, ABORT_PENDING, ABORT_STALE, ABORT_POOL,
                    ERR_CONSERVATION, PM_LIVE, PK_META)
from .reassembly import ReassemblyState
from .delivery import materialize_flit, consume_flit, count_grants
from .traffic import PAT_UNIFORM, PAT_STATIC_MAP, PAT_TRACE
from .rng import rng_next, rng_below, rng_coin
from .metrics import (MC_DEFLECTIONS, MC_OCC_SUM, MC_REDIRECTIONS,
                      MC_BUFFER_EJECTS, MC_TOP_PRIORITY_VIOLATIONS,
                      MC_MAX_SB_RESIDENCE, MC_GOLDEN_DEFLECTIONS,
                      MC_PERMUTE_IMBALANCE, MC_INJECTED, MC_EJECTED,
                      MC_DROPPED, MC_ERR_CYCLE, MC_ERR_WHERE)

PORT_N, PORT_E, PORT_S, PORT_W = 0, 1, 2, 3

# ip parameter slots (mesh kernel)
MIP_N_NODES = 0
MIP_WIDTH = 1
MIP_HEIGHT = 2
MIP_NUM_FLITS = 3
MIP_WARMUP = 4
MIP_PATTERN = 5
MIP_EJECT_CAP = 6
MIP_MODE = 7          # 0 = chipper (no side buffer), 1 = minbd
MIP_C_THRESH = 8
MIP_SB_DEPTH = 9
MIP_EPOCH = 10
MIP_TXN_WINDOW = 11
MIP_CHECK_INTERVAL = 12
MIP_INJECT_ENABLED = 13
MIP_LEN = 14


def golden_packet_id(cycle: int, epoch_length: int, id_space: int,
                     txn_window: int = 16) -> tuple[int, int]:
    """Rotating golden packet id for a given cycle: (src, txn mod window)."""
    g = (cycle // epoch_length) % id_space
    return g // txn_window, g % txn_window


def preferred_port_py(x: int, y: int, dx: int, dy: int) -> int:
    """Preferred output: productive port of the longer remaining dimension
    (ties go to the X dimension); -1 when already at the destination."""
    ddx = dx - x
    ddy = dy - y
    if ddx == 0 and ddy == 0:
        return -1
    if abs(ddx) >= abs(ddy) and ddx != 0:
        return PORT_E if ddx > 0 else PORT_W
    return PORT_S if ddy > 0 else PORT_N


@njit(cache=True)
def _preferred_port(x, y, dx, dy):
    ddx = dx - x
    ddy = dy - y
    if ddx == 0 and ddy == 0:
        return -1
    adx = ddx if ddx >= 0 else -ddx
    ady = ddy if ddy >= 0 else -ddy
    if adx >= ady and ddx != 0:
        return PORT_E if ddx > 0 else PORT_W
    return PORT_S if ddy > 0 else PORT_N


@njit(cache=True)
def _cls(pool, f, gsrc, gtx, window, silver_f):
    if f < 0:
        return -1
    if pool[PK_SRC][f] == gsrc and pool[PK_TXN][f] % window == gtx:
        return 2
    if f == silver_f:
        return 1
    return 0


@njit(cache=True)
def _beats(pool, rng, a, b, ca, cb):
    """True when flit a wins arbitration against b."""
    if ca != cb:
        return ca > cb
    if ca == 2:
        sa = pool[PK_SEQ][a]
        sb = pool[PK_SEQ][b]
        if sa != sb:
            return sa < sb
        return a < b  # original vs retransmitted copy of the same flit
    return rng_coin(rng) == 0


@njit(cache=True)
def _block(pool, rng, f0, f1, c0, c1, w0, w1):
    """One two-input arbiter block; wants are desired outputs (-1 = any).

    Returns (out0, out1).  The winner is steered toward its desired
    output; the loser must take the remaining one.
    """
    if f0 < 0 and f1 < 0:
        return -1, -1
    if f1 < 0:
        if w0 == 1:
            return -1, f0
        return f0, -1
    if f0 < 0:
        if w1 == 1:
            return -1, f1
        return f1, -1
    if _beats(pool, rng, f0, f1, c0, c1):
        win, lose, wwin, wlose = f0, f1, w0, w1
    else:
        win, lose, wwin, wlose = f1, f0, w1, w0
    if wwin >= 0:
        wo = wwin
    elif wlose >= 0:
        wo = 1 - wlose
    else:
        wo = 0
    if wo == 0:
        return win, lose
    return lose, win


@njit(cache=True)
def mesh_chunk(start_cycle, n_cycles, bern_thresh, ip, rng,
               neigh, xs, ys, input_regs, link_regs, in_scratch, out_scratch,
               sb_flit, sb_enq, sb_head, sb_size, sb_starve,
               q, pool, ra, grant_buf, grant_count, tr, met):
    (qdst, qnf, qenq, qtxn, qhead, qsize, qcursor, next_txn) = q
    (dst_map, adv_base, adv_size, adv_rr,
     trace_cycle, trace_src, trace_dst, trace_nf, trace_ptr) = tr
    (counters, lat_hist_enq, lat_hist_net, retry_hist, ring_src_del,
     ev_hash, gs) = met

    n_nodes = ip[MIP_N_NODES]
    num_flits = ip[MIP_NUM_FLITS]
    warmup = ip[MIP_WARMUP]
    pattern = ip[MIP_PATTERN]
    eject_cap = ip[MIP_EJECT_CAP]
    mode = ip[MIP_MODE]
    c_thresh = ip[MIP_C_THRESH]
    sb_depth = ip[MIP_SB_DEPTH]
    epoch = ip[MIP_EPOCH]
    window = ip[MIP_TXN_WINDOW]
    check_interval = ip[MIP_CHECK_INTERVAL]
    inject_enabled = ip[MIP_INJECT_ENABLED]
    id_space = n_nodes * window
    src_group = np.zeros(n_nodes, dtype=np.int64)  # single throughput group
    q_slack = 1 + 2 * n_nodes

    for k in range(n_cycles):
        cycle = start_cycle + k
        for qq in range(qsize.shape[0]):
            if qdst.shape[1] - qsize[qq] < q_slack:
                return k, ABORT_QUEUE
        for nn in range(n_nodes):
            if ra[6].shape[1] - ra[12][nn] < 2 * eject_cap:
                return k, ABORT_PENDING
            if ra[13].shape[1] - ra[16][nn] < 2 * eject_cap:
                return k, ABORT_STALE
        if pool[PK_SRC].shape[0] - pool[PK_META][PM_LIVE] < 2 * n_nodes + 4:
            return k, ABORT_POOL
        grant_count[0] = 0
        grant_count[1] = 0

        # traffic
        if inject_enabled == 1:
            if pattern == PAT_UNIFORM or pattern == PAT_STATIC_MAP:
                if bern_thresh > np.uint64(0):
                    for node in range(n_nodes):
                        if rng_next(rng) < bern_thresh:
                            if pattern == PAT_UNIFORM:
                                d = rng_below(rng, n_nodes - 1)
                                dst = d if d < node else d + 1
                            else:
                                dst = dst_map[node]
                            q_push(qdst, qnf, qenq, qtxn, qhead, qsize, node,
                                   dst, num_flits, cycle, next_txn[node])
                            next_txn[node] += 1
                            gs[0] += num_flits
            elif pattern == PAT_TRACE:
                while trace_ptr[0] < trace_cycle.shape[0] and \
                        trace_cycle[trace_ptr[0]] <= cycle:
                    i = trace_ptr[0]
                    if not q_push(qdst, qnf, qenq, qtxn, qhead, qsize,
                                  trace_src[i], trace_dst[i], trace_nf[i],
                                  cycle, next_txn[trace_src[i]]):
                        return k, ABORT_QUEUE
                    next_txn[trace_src[i]] += 1
                    gs[0] += trace_nf[i]
                    trace_ptr[0] += 1

        g = (cycle // epoch) % id_space
        gsrc = g // window
        gtx = g % window

        for node in range(n_nodes):
            # (1) ejection: up to eject_cap locally-addressed flits
            for _e in range(eject_cap):
                best = -1
                for p in range(4):
                    f = input_regs[node, p]
                    if f < 0 or pool[PK_FDST][f] != node:
                        continue
                    if best < 0:
                        best = p
                    else:
                        fb = input_regs[node, best]
                        cg = _cls(pool, f, gsrc, gtx, window, -1)
                        cb = _cls(pool, fb, gsrc, gtx, window, -1)
                        if cg > cb or (cg == 2 and cb == 2 and
                                       pool[PK_SEQ][f] < pool[PK_SEQ][fb]):
                            best = p
                if best < 0:
                    break
                f = input_regs[node, best]
                input_regs[node, best] = -1
                code = consume_flit(pool, ra, counters, lat_hist_enq,
                                    lat_hist_net, retry_hist, ring_src_del,
                                    ev_hash, src_group, grant_buf,
                                    grant_count, node, f, cycle, warmup)
                if code < 0:
                    return k, code

            # (2) side-buffer redirection when the head is starved
            reinjected = False
            if mode == 1 and sb_size[node] > 0 and sb_starve[node] > c_thresh:
                empty = -1
                for p in range(4):
                    if input_regs[node, p] < 0:
                        empty = p
                        break
                if empty < 0:
                    ncand = 0
                    for p in range(4):
                        f = input_regs[node, p]
                        if f >= 0 and _cls(pool, f, gsrc, gtx, window, -1) != 2:
                            ncand += 1
                    if ncand > 0:
                        pick = rng_below(rng, ncand)
                        seen = 0
                        for p in range(4):
                            f = input_regs[node, p]
                            if f >= 0 and _cls(pool, f, gsrc, gtx, window,
                                               -1) != 2:
                                if seen == pick:
                                    hp = sb_head[node]
                                    hf = sb_flit[node, hp]
                                    res = cycle - sb_enq[node, hp]
                                    if res > counters[MC_MAX_SB_RESIDENCE]:
                                        counters[MC_MAX_SB_RESIDENCE] = res
                                    sb_head[node] = (hp + 1) % sb_depth
                                    sb_size[node] -= 1
                                    tp = (sb_head[node] + sb_size[node]) % sb_depth
                                    sb_flit[node, tp] = f
                                    sb_enq[node, tp] = cycle
                                    sb_size[node] += 1
                                    input_regs[node, p] = hf
                                    counters[MC_REDIRECTIONS] += 1
                                    sb_starve[node] = 0
                                    reinjected = True
                                    break
                                seen += 1

            # (3) re-inject one side-buffered flit into an empty slot
            if mode == 1 and not reinjected and sb_size[node] > 0:
                placed = -1
                for p in range(4):
                    if input_regs[node, p] < 0:
                        placed = p
                        break
                if placed >= 0:
                    hp = sb_head[node]
                    hf = sb_flit[node, hp]
                    res = cycle - sb_enq[node, hp]
                    if res > counters[MC_MAX_SB_RESIDENCE]:
                        counters[MC_MAX_SB_RESIDENCE] = res
                    sb_head[node] = (hp + 1) % sb_depth
                    sb_size[node] -= 1
                    input_regs[node, placed] = hf
                    sb_starve[node] = 0
                    reinjected = True
                else:
                    sb_starve[node] += 1
            elif mode == 1 and sb_size[node] == 0:
                sb_starve[node] = 0

            # (4) inject one new flit from the local queue
            if inject_enabled == 1 and qsize[node] > 0:
                placed = -1
                for p in range(4):
                    if input_regs[node, p] < 0:
                        placed = p
                        break
                if placed >= 0:
                    h = qhead[node]
                    fidx = materialize_flit(pool, counters, ev_hash, gs,
                                            node, qdst[node, h],
                                            qnf[node, h], qcursor[node],
                                            qtxn[node, h], qenq[node, h],
                                            cycle)
                    if fidx < 0:
                        return k, ABORT_POOL
                    input_regs[node, placed] = fidx
                    qcursor[node] += 1
                    if qcursor[node] == qnf[node, h]:
                        qcursor[node] = 0
                        qhead[node] = (h + 1) % qdst.shape[1]
                        qsize[node] -= 1

            # (5) silver designation among the flits entering the pipeline
            n_in = 0
            ncand = 0
            for p in range(4):
                f = input_regs[node, p]
                if f >= 0:
                    n_in += 1
                    if _cls(pool, f, gsrc, gtx, window, -1) != 2:
                        ncand += 1
            silver_f = -1
            if ncand > 0:
                pick = rng_below(rng, ncand)
                seen = 0
                for p in range(4):
                    f = input_regs[node, p]
                    if f >= 0 and _cls(pool, f, gsrc, gtx, window, -1) != 2:
                        if seen == pick:
                            silver_f = f
                            break
                        seen += 1

            # top-priority flit (unique): golden with lowest seq, else silver
            top_f = -1
            n_golden = 0
            min_seq_dup = False
            for p in range(4):
                f = input_regs[node, p]
                if f >= 0 and _cls(pool, f, gsrc, gtx, window, -1) == 2:
                    n_golden += 1
                    if top_f < 0 or pool[PK_SEQ][f] < pool[PK_SEQ][top_f]:
                        top_f = f
                        min_seq_dup = False
                    elif pool[PK_SEQ][f] == pool[PK_SEQ][top_f]:
                        min_seq_dup = True
            if top_f < 0:
                top_f = silver_f
            elif min_seq_dup:
                top_f = -1  # retransmit copy ties the golden head: ambiguous

            # (6) two-stage permutation network
            x = xs[node]
            y = ys[node]
            fN, fE = input_regs[node, PORT_N], input_regs[node, PORT_E]
            fS, fW = input_regs[node, PORT_S], input_regs[node, PORT_W]
            cN = _cls(pool, fN, gsrc, gtx, window, silver_f)
            cE = _cls(pool, fE, gsrc, gtx, window, silver_f)
            cS = _cls(pool, fS, gsrc, gtx, window, silver_f)
            cW = _cls(pool, fW, gsrc, gtx, window, silver_f)
            wN = _stage1_want(_pref_of(pool, fN, xs, ys, x, y))
            wE = _stage1_want(_pref_of(pool, fE, xs, ys, x, y))
            wS = _stage1_want(_pref_of(pool, fS, xs, ys, x, y))
            wW = _stage1_want(_pref_of(pool, fW, xs, ys, x, y))
            a0, a1 = _block(pool, rng, fN, fE, cN, cE, wN, wE)
            b0, b1 = _block(pool, rng, fS, fW, cS, cW, wS, wW)

            out = out_scratch[node]
            for st2 in range(2):
                if st2 == 0:
                    g0, g1 = a0, b0
                    p0, p1 = PORT_N, PORT_E
                else:
                    g0, g1 = a1, b1
                    p0, p1 = PORT_S, PORT_W
                c0 = _cls(pool, g0, gsrc, gtx, window, silver_f)
                c1 = _cls(pool, g1, gsrc, gtx, window, silver_f)
                prefer0 = -3 if g0 < 0 else _pref_of(pool, g0, xs, ys, x, y)
                prefer1 = -3 if g1 < 0 else _pref_of(pool, g1, xs, ys, x, y)
                w0 = 0 if prefer0 == p0 else (1 if prefer0 == p1 else -1)
                w1 = 0 if prefer1 == p0 else (1 if prefer1 == p1 else -1)
                o0, o1 = _block(pool, rng, g0, g1, c0, c1, w0, w1)
                out[p0] = o0
                out[p1] = o1

            # conservation through the permutation network
            n_out = 0
            for p in range(4):
                if out[p] >= 0:
                    n_out += 1
            if n_out != n_in:
                counters[MC_PERMUTE_IMBALANCE] += 1

            # priority property: the unique top flit got its preferred port
            if top_f >= 0:
                for p in range(4):
                    if out[p] == top_f:
                        pref = _pref_of(pool, top_f, xs, ys, x, y)
                        if pref >= 0 and pref != p:
                            counters[MC_TOP_PRIORITY_VIOLATIONS] += 1

            # (7) buffer eject: absorb one random would-be-deflected flit,
            # avoiding that deflection entirely
            if mode == 1 and sb_size[node] < sb_depth:
                ncand = 0
                for p in range(4):
                    f = out[p]
                    if f < 0:
                        continue
                    pref = _pref_of(pool, f, xs, ys, x, y)
                    if pref >= 0 and pref != p and \
                            _cls(pool, f, gsrc, gtx, window, -1) != 2:
                        ncand += 1
                if ncand > 0:
                    pick = rng_below(rng, ncand)
                    seen = 0
                    for p in range(4):
                        f = out[p]
                        if f < 0:
                            continue
                        pref = _pref_of(pool, f, xs, ys, x, y)
                        if pref >= 0 and pref != p and \
                                _cls(pool, f, gsrc, gtx, window, -1) != 2:
                            if seen == pick:
                                tp = (sb_head[node] + sb_size[node]) % sb_depth
                                sb_flit[node, tp] = f
                                sb_enq[node, tp] = cycle
                                sb_size[node] += 1
                                out[p] = -1
                                counters[MC_BUFFER_EJECTS] += 1
                                break
                            seen += 1

            # deflection marking on the flits actually leaving the router
            for p in range(4):
                f = out[p]
                if f < 0:
                    continue
                pref = _pref_of(pool, f, xs, ys, x, y)
                if pref >= 0 and pref != p:
                    pool[PK_DEFL][f] += 1
                    counters[MC_DEFLECTIONS] += 1
                    fc = _cls(pool, f, gsrc, gtx, window, silver_f)
                    if fc == 2 and n_golden <= 1:
                        counters[MC_GOLDEN_DEFLECTIONS] += 1

        # link traversal: old link registers feed neighbour inputs
        for node in range(n_nodes):
            for p in range(4):
                in_scratch[node, p] = -1
        for node in range(n_nodes):
            for p in range(4):
                f = link_regs[node, p]
                if f < 0:
                    continue
                nb = neigh[node, p]
                ip_ = p if nb == node else _OPP[p]
                in_scratch[nb, ip_] = f
        for node in range(n_nodes):
            for p in range(4):
                input_regs[node, p] = in_scratch[node, p]
                link_regs[node, p] = out_scratch[node, p]

        # retransmit grants
        ng = grant_count[0]
        if ng > 0:
            count_grants(counters, ng)
            for gi in range(ng):
                if not q_push_retx(qdst, qnf, qenq, qtxn, qhead, qsize,
                                   qcursor, grant_buf[gi, 0],
                                   grant_buf[gi, 4], grant_buf[gi, 2],
                                   grant_buf[gi, 3], grant_buf[gi, 1]):
                    return k, ABORT_QUEUE
                gs[0] += grant_buf[gi, 2]
            grant_count[0] = 0

        counters[MC_OCC_SUM] += gs[0]

        live = pool[PK_META][PM_LIVE]
        if counters[MC_INJECTED] - counters[MC_EJECTED] - \
                counters[MC_DROPPED] != live:
            counters[MC_ERR_CYCLE] = cycle
            counters[MC_ERR_WHERE] = -1
            return k + 1, ERR_CONSERVATION
        if check_interval > 0 and (cycle + 1) % check_interval == 0:
            occupied = 0
            for node in range(n_nodes):
                occupied += sb_size[node]
                for p in range(4):
                    if input_regs[node, p] >= 0:
                        occupied += 1
                    if link_regs[node, p] >= 0:
                        occupied += 1
            if occupied != live:
                counters[MC_ERR_CYCLE] = cycle
                counters[MC_ERR_WHERE] = occupied - live
                return k + 1, ERR_CONSERVATION

    return n_cycles, 0


_OPP = np.array([PORT_S, PORT_W, PORT_N, PORT_E], dtype=np.int64)


@njit(cache=True)
def _pref_of(pool, f, xs, ys, x, y):
    if f < 0:
        return -3
    dst = pool[PK_FDST][f]
    return _preferred_port(x, y, xs[dst], ys[dst])


@njit(cache=True)
def _stage1_want(pref):
    """Stage-1 desired output: 0 reaches final ports {N,E}, 1 reaches {S,W}."""
    if pref < 0:
        return -1
    return 0 if pref <= PORT_E else 1


class MeshNetwork:
    """State and kernel bindings for one mesh simulation instance."""

    def __init__(self, width: int, height: int, *, mode: str = "minbd",
                 sb_depth: int = 4, eject_cap: int = 2,
                 reassembly_slots: int = 16, queue_capacity: int = 256):
        self.width = width
        self.height = height
        n = width * height
        self.n_nodes = n
        self.mode = mode
        self.xs = np.array([i % width for i in range(n)], dtype=np.int64)
        self.ys = np.array([i // width for i in range(n)], dtype=np.int64)
        self.neigh = np.zeros((n, 4), dtype=np.int64)
        for i in range(n):
            x, y = i % width, i // width
            self.neigh[i, PORT_N] = i - width if y > 0 else i
            self.neigh[i, PORT_E] = i + 1 if x < width - 1 else i
            self.neigh[i, PORT_S] = i + width if y < height - 1 else i
            self.neigh[i, PORT_W] = i - 1 if x > 0 else i
        self.input_regs = np.full((n, 4), -1, dtype=np.int64)
        self.link_regs = np.full((n, 4), -1, dtype=np.int64)
        self.in_scratch = np.full((n, 4), -1, dtype=np.int64)
        self.out_scratch = np.full((n, 4), -1, dtype=np.int64)
        self.sb_depth = sb_depth
        self.sb_flit = np.full((n, max(sb_depth, 1)), -1, dtype=np.int64)
        self.sb_enq = np.zeros((n, max(sb_depth, 1)), dtype=np.int64)
        self.sb_head = np.zeros(n, dtype=np.int64)
        self.sb_size = np.zeros(n, dtype=np.int64)
        self.sb_starve = np.zeros(n, dtype=np.int64)
        self.queues = PacketQueues(n, queue_capacity)
        self.next_txn = np.zeros(n, dtype=np.int64)
        self.reassembly = ReassemblyState(n, reassembly_slots)
        self.grant_buf = np.zeros((2 * n + 4, 5), dtype=np.int64)
        self.grant_count = np.zeros(2, dtype=np.int64)
        self.eject_cap = eject_cap
        pool_cap = 8 * n + n * max(sb_depth, 1) + 2 * n + 16
        self.pool = FlitPool(pool_cap)

    def mesh_args(self):
        return (self.neigh, self.xs, self.ys, self.input_regs, self.link_regs,
                self.in_scratch, self.out_scratch, self.sb_flit, self.sb_enq,
                self.sb_head, self.sb_size, self.sb_starve)

    def queue_args(self):
        return self.queues.kernel_view() + (self.next_txn,)

    def in_flight(self) -> int:
        n = int(np.sum(self.input_regs >= 0)) + int(np.sum(self.link_regs >= 0))
        n += int(self.sb_size.sum())
        return n

    MUTABLE = ("input_regs", "link_regs", "sb_flit", "sb_enq", "sb_head",
               "sb_size", "sb_starve", "next_txn", "grant_buf", "grant_count")

    def snapshot(self) -> dict:
        snap = {name: getattr(self, name).copy() for name in self.MUTABLE}
        snap["pool_arrays"] = [a.copy() for a in self.pool.arrays]
        snap["pool_free"] = self.pool.free_stack.copy()
        snap["pool_meta"] = self.pool.meta.copy()
        snap["queues"] = {k: getattr(self.queues, k).copy()
                          for k in ("dst", "nf", "enq", "txn", "head",
                                    "size", "cursor")}
        snap["reassembly"] = {k: getattr(self.reassembly, k).copy()
                              for k in ("r_src", "r_txn", "r_mask", "r_nf",
                                        "r_expected", "r_count", "p_src",
                                        "p_txn", "p_nf", "p_enq", "p_drops",
                                        "p_head", "p_size", "f_src", "f_txn",
                                        "f_rem", "f_size")}
        return snap

    def restore(self, snap: dict):
        for name in self.MUTABLE:
            getattr(self, name)[...] = snap[name]
        for a, b in zip(self.pool.arrays, snap["pool_arrays"]):
            a[...] = b
        self.pool.free_stack[...] = snap["pool_free"]
        self.pool.meta[...] = snap["pool_meta"]
        for k, v in snap["queues"].items():
            getattr(self.queues, k)[...] = v
        for k, v in snap["reassembly"].items():
            getattr(self.reassembly, k)[...] = v
