"""Ring-tree network engine: node routers, bridge routers, guarantees.

Every ring channel (ring, direction, lane) is a circular register file
that rotates one position per cycle; rotation is implicit (the content
at ring position p in cycle t lives at array slot (p - t) mod L), so a
cycle only touches the registers at the stops.  Routers act exactly on
their own arriving registers, which makes the fixed processing order
equivalent to a synchronous two-phase update.

Per cycle, in order: traffic enqueue, node routers (eject then inject),
bridge routers (swap rule, transfer-FIFO enqueue, FIFO head injection),
slot observers (transfer guarantee), retransmit grants, throttle
bookkeeping (injection guarantee), metrics and conservation checks.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .core import CW, CCW
from .state import (FlitPool, PacketQueues, q_push, q_push_retx,
                    PK_SRC, PK_FDST, PK_RETRY, PK_DEFL, PK_TXN, PK_SEQ,
                    ABORT_QUEUE, ABORT_PENDING, ABORT_STALE, ABORT_POOL,
                    ERR_CONSERVATION)
from .reassembly import ReassemblyState
from .delivery import (materialize_flit, consume_flit, flit_key, count_grants)
from .traffic import (PAT_UNIFORM, PAT_STATIC_MAP, PAT_ADVERSARIAL, PAT_TRACE,
                      PAT_NONE)
from .rng import rng_next, rng_below
from .metrics import (MC_DEFLECTIONS, MC_RING_RETRIES, MC_MAX_RING_RETRIES,
                      MC_SWAPS, MC_FIFO_WAIT_SUM, MC_FIFO_WAIT_COUNT,
                      MC_FIFO_WAIT_MAX, MC_FIFO_HEAD_WAIT_MAX, MC_OCC_SUM,
                      MC_THROTTLE_ACTIVATIONS, MC_EJECT_DENIALS,
                      MC_INJECTED, MC_EJECTED, MC_DROPPED,
                      MC_ERR_CYCLE, MC_ERR_WHERE)
from .state import PM_LIVE, PK_META

# ip parameter slots
IP_N_NODES = 0
IP_NUM_FLITS = 1
IP_WARMUP = 2
IP_PATTERN = 3
IP_EJECT_CAP = 4
IP_INJ_ON = 5
IP_TR_ON = 6
IP_INJ_THRESH = 7
IP_RETRY_THRESH = 8
IP_SIG_LAT = 9
IP_CHECK_INTERVAL = 10
IP_INJECT_ENABLED = 11
IP_LEN = 12

ACT_LOCAL = 0
ACT_UP = 1
ACT_DOWN = 2


@njit(cache=True)
def choose_direction(from_stop, to_stop, ring_size):
    """Shorter way around; exact tie goes clockwise."""
    dcw = (to_stop - from_stop) % ring_size
    dccw = (from_stop - to_stop) % ring_size
    return CW if dcw <= dccw else CCW


@njit(cache=True)
def _dir_on_ring(ring_level, node_ring_at_level, node_ring, node_stop,
                 ring_stops, ring_child_slot, first_up_cw, first_up_ccw,
                 first_down_cw, first_down_ccw, r, sg, stop_index, dst):
    """Travel direction on ring ``r`` from its stop toward the routing
    waypoint for ``dst``: the destination stop, or the nearest bridge
    that continues the route."""
    level = ring_level[r]
    if node_ring_at_level[dst, level] != r:
        dcw = first_up_cw[sg]
        dccw = first_up_ccw[sg]
    elif node_ring[dst] == r:
        t = node_stop[dst]
        s = ring_stops[r]
        dcw = (t - stop_index) % s
        dccw = (stop_index - t) % s
    else:
        slot = ring_child_slot[node_ring_at_level[dst, level + 1]]
        dcw = first_down_cw[sg, slot]
        dccw = first_down_ccw[sg, slot]
    return CW if dcw <= dccw else CCW


@njit(cache=True)
def ring_chunk(start_cycle, n_cycles, bern_thresh, ip, rng,
               topo, brf, obs, thr, regs, q, pool, ra,
               grant_buf, grant_count, tr, met):
    (ring_stops, ring_hop, ring_len, ring_lanes, ring_level,
     chan_base, chan_reg_start, ring_stop_base, stop_pos_cw, stop_pos_ccw,
     node_ring, node_stop, node_ring_at_level, ring_child_slot,
     first_up_cw, first_up_ccw, first_down_cw, first_down_ccw,
     ring_node_start, ring_node_list, ring_tree_dist) = topo
    (br_child_ring, br_parent_ring, br_child_stop, br_parent_stop,
     group_start, group_count, fifo_depth, fifo_base, fifo_into_ring,
     fifo_lane, buf_flit, buf_enq, fifo_head, fifo_size, fifo_head_since,
     fifo_size_start) = brf
    (obs_chan, obs_ring, obs_pos, obs_side, obs_lane, obs_bridge, obs_group,
     obs_due, obs_flit, obs_key, obs_circles, obs_resv_fid,
     resv_flit, resv_key) = obs
    (pt_counter, pt_ring, blocked_pts, ring_maxc, ring_argmax,
     ring_was_starved) = thr
    (qdst, qnf, qenq, qtxn, qhead, qsize, qcursor, next_txn) = q
    (dst_map, adv_base, adv_size, adv_rr,
     trace_cycle, trace_src, trace_dst, trace_nf, trace_ptr) = tr
    (counters, lat_hist_enq, lat_hist_net, retry_hist, ring_src_del,
     ev_hash, gs) = met

    n_nodes = ip[IP_N_NODES]
    num_flits = ip[IP_NUM_FLITS]
    warmup = ip[IP_WARMUP]
    pattern = ip[IP_PATTERN]
    eject_cap = ip[IP_EJECT_CAP]
    inj_on = ip[IP_INJ_ON]
    tr_on = ip[IP_TR_ON]
    inj_thresh = ip[IP_INJ_THRESH]
    retry_thresh = ip[IP_RETRY_THRESH]
    sig_lat = ip[IP_SIG_LAT]
    check_interval = ip[IP_CHECK_INTERVAL]
    inject_enabled = ip[IP_INJECT_ENABLED]

    n_bridges = br_child_ring.shape[0]
    n_fifos = fifo_depth.shape[0]
    n_rings = ring_stops.shape[0]
    n_obs = obs_chan.shape[0]
    q_slack = 1 + 2 * n_nodes

    for k in range(n_cycles):
        cycle = start_cycle + k

        # -- resource precheck (clean abort point) ------------------------
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

        # -- traffic enqueue ----------------------------------------------
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
                            r = node_ring[node]
                            sg = ring_stop_base[r] + node_stop[node]
                            dd = _dir_on_ring(ring_level, node_ring_at_level,
                                              node_ring, node_stop, ring_stops,
                                              ring_child_slot, first_up_cw,
                                              first_up_ccw, first_down_cw,
                                              first_down_ccw, r, sg,
                                              node_stop[node], dst)
                            qq = node * 2 + dd
                            q_push(qdst, qnf, qenq, qtxn, qhead, qsize, qq,
                                   dst, num_flits, cycle, next_txn[node])
                            next_txn[node] += 1
                            gs[0] += num_flits
            elif pattern == PAT_ADVERSARIAL:
                for node in range(n_nodes):
                    if adv_size[node] > 0 and \
                            qsize[node * 2] + qsize[node * 2 + 1] < 2:
                        dst = adv_base[node] + (adv_rr[node] % adv_size[node])
                        adv_rr[node] += 1
                        r = node_ring[node]
                        sg = ring_stop_base[r] + node_stop[node]
                        dd = _dir_on_ring(ring_level, node_ring_at_level,
                                          node_ring, node_stop, ring_stops,
                                          ring_child_slot, first_up_cw,
                                          first_up_ccw, first_down_cw,
                                          first_down_ccw, r, sg,
                                          node_stop[node], dst)
                        q_push(qdst, qnf, qenq, qtxn, qhead, qsize,
                               node * 2 + dd, dst, num_flits, cycle,
                               next_txn[node])
                        next_txn[node] += 1
                        gs[0] += num_flits
            elif pattern == PAT_TRACE:
                while trace_ptr[0] < trace_cycle.shape[0] and \
                        trace_cycle[trace_ptr[0]] <= cycle:
                    i = trace_ptr[0]
                    node = trace_src[i]
                    dst = trace_dst[i]
                    r = node_ring[node]
                    sg = ring_stop_base[r] + node_stop[node]
                    dd = _dir_on_ring(ring_level, node_ring_at_level,
                                      node_ring, node_stop, ring_stops,
                                      ring_child_slot, first_up_cw,
                                      first_up_ccw, first_down_cw,
                                      first_down_ccw, r, sg,
                                      node_stop[node], dst)
                    if not q_push(qdst, qnf, qenq, qtxn, qhead, qsize,
                                  node * 2 + dd, dst, trace_nf[i], cycle,
                                  next_txn[node]):
                        return k, ABORT_QUEUE
                    next_txn[node] += 1
                    gs[0] += trace_nf[i]
                    trace_ptr[0] += 1

        # -- FIFO occupancy snapshot (two-phase dequeue visibility) --------
        for f in range(n_fifos):
            fifo_size_start[f] = fifo_size[f]

        # -- node routers ---------------------------------------------------
        for node in range(n_nodes):
            r = node_ring[node]
            lanes = ring_lanes[r]
            length = ring_len[r]
            sg = ring_stop_base[r] + node_stop[node]
            ejected = 0
            for d in range(2):
                pos = stop_pos_cw[sg] if d == CW else stop_pos_ccw[sg]
                for l in range(lanes):
                    chan = chan_base[r] + d * lanes + l
                    idx = chan_reg_start[chan] + ((pos - cycle) % length)
                    f = regs[idx]
                    if f >= 0 and pool[PK_FDST][f] == node:
                        if ejected < eject_cap:
                            regs[idx] = -1
                            ejected += 1
                            code = consume_flit(pool, ra, counters,
                                                lat_hist_enq, lat_hist_net,
                                                retry_hist, ring_src_del,
                                                ev_hash, node_ring,
                                                grant_buf, grant_count,
                                                node, f, cycle, warmup)
                            if code < 0:
                                return k, code
                        else:
                            counters[MC_DEFLECTIONS] += 1
                            counters[MC_EJECT_DENIALS] += 1
                            pool[PK_DEFL][f] += 1
            # injection: in-ring traffic kept priority; only empty registers
            if inject_enabled == 1:
                for d in range(2):
                    pt = node * 2 + d
                    if qsize[pt] == 0:
                        pt_counter[pt] = 0
                        continue
                    if blocked_pts[pt] == 1:
                        pt_counter[pt] += 1  # throttled but starving: keep counting
                        continue
                    pos = stop_pos_cw[sg] if d == CW else stop_pos_ccw[sg]
                    placed = -1
                    for l in range(lanes):
                        chan = chan_base[r] + d * lanes + l
                        idx = chan_reg_start[chan] + ((pos - cycle) % length)
                        if regs[idx] < 0:
                            placed = idx
                            break
                    if placed < 0:
                        pt_counter[pt] += 1
                        continue
                    h = qhead[pt]
                    fidx = materialize_flit(pool, counters, ev_hash, gs,
                                            node, qdst[pt, h], qnf[pt, h],
                                            qcursor[pt], qtxn[pt, h],
                                            qenq[pt, h], cycle)
                    if fidx < 0:
                        return k, ABORT_POOL
                    regs[placed] = fidx
                    pt_counter[pt] = 0
                    qcursor[pt] += 1
                    if qcursor[pt] == qnf[pt, h]:
                        qcursor[pt] = 0
                        qhead[pt] = (h + 1) % qdst.shape[1]
                        qsize[pt] -= 1

        # -- bridge routers ---------------------------------------------------
        for b in range(n_bridges):
            cr = br_child_ring[b]
            pr = br_parent_ring[b]
            c_lanes = ring_lanes[cr]
            p_lanes = ring_lanes[pr]
            c_len = ring_len[cr]
            p_len = ring_len[pr]
            csg = ring_stop_base[cr] + br_child_stop[b]
            psg = ring_stop_base[pr] + br_parent_stop[b]
            c_level = ring_level[cr]
            p_level = ring_level[pr]

            # swap rule on the designated pair (clockwise, lane 0, each side)
            c_idx0 = chan_reg_start[chan_base[cr]] + \
                ((stop_pos_cw[csg] - cycle) % c_len)
            p_idx0 = chan_reg_start[chan_base[pr]] + \
                ((stop_pos_cw[psg] - cycle) % p_len)
            fc = regs[c_idx0]
            fp = regs[p_idx0]
            if fc >= 0 and fp >= 0:
                up_need = node_ring_at_level[pool[PK_FDST][fc], c_level] != cr
                dstp = pool[PK_FDST][fp]
                down_need = node_ring_at_level[dstp, p_level] == pr and \
                    node_ring_at_level[dstp, p_level + 1] == cr
                if up_need and down_need:
                    regs[c_idx0] = fp
                    regs[p_idx0] = fc
                    counters[MC_SWAPS] += 1

            # child-side arrivals -> local-to-global FIFO group
            g_up = 2 * b
            for d in range(2):
                pos = stop_pos_cw[csg] if d == CW else stop_pos_ccw[csg]
                for l in range(c_lanes):
                    chan = chan_base[cr] + d * c_lanes + l
                    idx = chan_reg_start[chan] + ((pos - cycle) % c_len)
                    f = regs[idx]
                    if f < 0:
                        continue
                    if node_ring_at_level[pool[PK_FDST][f], c_level] == cr:
                        continue  # staying on this ring
                    if _try_enqueue(g_up, f, cycle, group_start, group_count,
                                    fifo_depth, fifo_base, buf_flit, buf_enq,
                                    fifo_head, fifo_size, fifo_head_since,
                                    resv_flit, resv_key, pool):
                        regs[idx] = -1
                    else:
                        _count_retry(pool, counters, retry_hist, f)

            # parent-side arrivals -> global-to-local FIFO of their lane
            g_down = 2 * b + 1
            for d in range(2):
                pos = stop_pos_cw[psg] if d == CW else stop_pos_ccw[psg]
                for l in range(p_lanes):
                    chan = chan_base[pr] + d * p_lanes + l
                    idx = chan_reg_start[chan] + ((pos - cycle) % p_len)
                    f = regs[idx]
                    if f < 0:
                        continue
                    dstf = pool[PK_FDST][f]
                    if node_ring_at_level[dstf, p_level] != pr:
                        continue  # needs a level up; not via this bridge side
                    if node_ring_at_level[dstf, p_level + 1] != cr:
                        continue  # descends through a different bridge
                    if _try_enqueue_lane(g_down, l, f, cycle, group_start,
                                         fifo_depth, fifo_base, buf_flit,
                                         buf_enq, fifo_head, fifo_size,
                                         fifo_head_since, resv_flit, resv_key,
                                         pool):
                        regs[idx] = -1
                    else:
                        _count_retry(pool, counters, retry_hist, f)

            # FIFO head injections (heads visible at cycle start only)
            for side in range(2):
                g = 2 * b + side
                into = pr if side == 0 else cr
                i_lanes = ring_lanes[into]
                i_len = ring_len[into]
                isg = psg if side == 0 else csg
                istop = br_parent_stop[b] if side == 0 else br_child_stop[b]
                for fo in range(group_count[g]):
                    fid = group_start[g] + fo
                    if fifo_size_start[fid] == 0 or fifo_size[fid] == 0:
                        continue
                    hpos = fifo_base[fid] + fifo_head[fid]
                    f = buf_flit[hpos]
                    dd = _dir_on_ring(ring_level, node_ring_at_level,
                                      node_ring, node_stop, ring_stops,
                                      ring_child_slot, first_up_cw,
                                      first_up_ccw, first_down_cw,
                                      first_down_ccw, into, isg, istop,
                                      pool[PK_FDST][f])
                    pos = stop_pos_cw[isg] if dd == CW else stop_pos_ccw[isg]
                    placed = -1
                    if side == 0:
                        # an up FIFO is the interface of one parent lane
                        chan = chan_base[into] + dd * i_lanes + fifo_lane[fid]
                        idx = chan_reg_start[chan] + ((pos - cycle) % i_len)
                        if regs[idx] < 0:
                            placed = idx
                    else:
                        for l in range(i_lanes):
                            chan = chan_base[into] + dd * i_lanes + l
                            idx = chan_reg_start[chan] + ((pos - cycle) % i_len)
                            if regs[idx] < 0:
                                placed = idx
                                break
                    pt = 2 * n_nodes + fid
                    if placed >= 0:
                        regs[placed] = f
                        wait = cycle - buf_enq[hpos]
                        counters[MC_FIFO_WAIT_SUM] += wait
                        counters[MC_FIFO_WAIT_COUNT] += 1
                        if wait > counters[MC_FIFO_WAIT_MAX]:
                            counters[MC_FIFO_WAIT_MAX] = wait
                        hw = cycle - fifo_head_since[fid]
                        if hw > counters[MC_FIFO_HEAD_WAIT_MAX]:
                            counters[MC_FIFO_HEAD_WAIT_MAX] = hw
                        fifo_head[fid] = (fifo_head[fid] + 1) % fifo_depth[fid]
                        fifo_size[fid] -= 1
                        fifo_head_since[fid] = cycle
                        pt_counter[pt] = 0
                    else:
                        pt_counter[pt] += 1

        # -- slot observers (transfer guarantee) ---------------------------
        if tr_on == 1:
            for o in range(n_obs):
                if cycle != obs_due[o]:
                    continue
                r = obs_ring[o]
                length = ring_len[r]
                sigma = (obs_pos[o] - cycle) % length
                idx = chan_reg_start[obs_chan[o]] + sigma
                f = regs[idx]
                g = obs_group[o]
                watched = obs_flit[o]
                if watched >= 0 and f == watched and \
                        obs_key[o] == flit_key(pool[PK_SRC][f],
                                               pool[PK_TXN][f],
                                               pool[PK_SEQ][f]):
                    obs_circles[o] += 1
                    b = obs_bridge[o]
                    dstf = pool[PK_FDST][f]
                    if obs_side[o] == 0:
                        qual = node_ring_at_level[dstf, ring_level[r]] != r
                    else:
                        qual = node_ring_at_level[dstf, ring_level[r]] == r and \
                            node_ring_at_level[dstf, ring_level[r] + 1] == \
                            br_child_ring[b]
                    if qual and obs_circles[o] > retry_thresh and \
                            obs_resv_fid[o] < 0:
                        if obs_side[o] == 1:
                            # the lane interface the flit is circling on
                            fid = group_start[g] + obs_lane[o]
                            if resv_flit[fid] < 0:
                                resv_flit[fid] = f
                                resv_key[fid] = obs_key[o]
                                obs_resv_fid[o] = fid
                        else:
                            for fo in range(group_count[g]):
                                fid = group_start[g] + fo
                                if resv_flit[fid] < 0:
                                    resv_flit[fid] = f
                                    resv_key[fid] = obs_key[o]
                                    obs_resv_fid[o] = fid
                                    break
                    obs_due[o] = cycle + length
                else:
                    if obs_resv_fid[o] >= 0:
                        fid = obs_resv_fid[o]
                        if resv_flit[fid] == watched and \
                                resv_key[fid] == obs_key[o]:
                            resv_flit[fid] = -1  # left by another path
                            resv_key[fid] = -1
                        obs_resv_fid[o] = -1
                    if f >= 0:
                        obs_flit[o] = f
                        obs_key[o] = flit_key(pool[PK_SRC][f],
                                              pool[PK_TXN][f],
                                              pool[PK_SEQ][f])
                        obs_circles[o] = 0
                        obs_due[o] = cycle + length
                    else:
                        obs_flit[o] = -1
                        obs_circles[o] = 0
                        obs_due[o] = cycle + 1  # slot empty: observe the next one

        # -- retransmit grants (zero-latency out-of-band) -------------------
        ng = grant_count[0]
        if ng > 0:
            count_grants(counters, ng)
            for gi in range(ng):
                sender = grant_buf[gi, 0]
                dst = grant_buf[gi, 4]
                r = node_ring[sender]
                sg = ring_stop_base[r] + node_stop[sender]
                dd = _dir_on_ring(ring_level, node_ring_at_level, node_ring,
                                  node_stop, ring_stops, ring_child_slot,
                                  first_up_cw, first_up_ccw, first_down_cw,
                                  first_down_ccw, r, sg, node_stop[sender],
                                  dst)
                qq = sender * 2 + dd
                if not q_push_retx(qdst, qnf, qenq, qtxn, qhead, qsize,
                                   qcursor, qq, dst, grant_buf[gi, 2],
                                   grant_buf[gi, 3], grant_buf[gi, 1]):
                    return k, ABORT_QUEUE
                gs[0] += grant_buf[gi, 2]
            grant_count[0] = 0

        # -- injection guarantee bookkeeping --------------------------------
        if inj_on == 1 and inject_enabled == 1:
            for r in range(n_rings):
                ring_maxc[r] = 0
                ring_argmax[r] = -1
            for pt in range(pt_counter.shape[0]):
                c = pt_counter[pt]
                if c > ring_maxc[pt_ring[pt]]:
                    ring_maxc[pt_ring[pt]] = c
                    ring_argmax[pt_ring[pt]] = pt
            for pt in range(blocked_pts.shape[0]):
                blocked_pts[pt] = 0
            exempt_pt = -1
            exempt_c = 0
            for s in range(n_rings):
                starved = ring_maxc[s] >= inj_thresh
                if starved and ring_was_starved[s] == 0:
                    counters[MC_THROTTLE_ACTIVATIONS] += 1
                ring_was_starved[s] = 1 if starved else 0
                if not starved:
                    continue
                if ring_maxc[s] > exempt_c:
                    exempt_c = ring_maxc[s]
                    exempt_pt = ring_argmax[s]
                for r2 in range(n_rings):
                    d = ring_tree_dist[s, r2]
                    if ring_maxc[s] >= (d + 1) * inj_thresh + d * sig_lat:
                        for ni in range(ring_node_start[r2],
                                        ring_node_start[r2 + 1]):
                            node = ring_node_list[ni]
                            blocked_pts[node * 2] = 1
                            blocked_pts[node * 2 + 1] = 1
            # the single most-starved point always makes progress
            if exempt_pt >= 0 and exempt_pt < 2 * n_nodes:
                blocked_pts[exempt_pt] = 0

        # -- per-cycle metrics ----------------------------------------------
        counters[MC_OCC_SUM] += gs[0]
        for fid in range(n_fifos):
            if fifo_size[fid] > 0:
                hw = cycle - fifo_head_since[fid]
                if hw > counters[MC_FIFO_HEAD_WAIT_MAX]:
                    counters[MC_FIFO_HEAD_WAIT_MAX] = hw
                fw = cycle - buf_enq[fifo_base[fid] + fifo_head[fid]]
                if fw > counters[MC_FIFO_WAIT_MAX]:
                    counters[MC_FIFO_WAIT_MAX] = fw

        # -- conservation ----------------------------------------------------
        live = pool[PK_META][PM_LIVE]
        if counters[MC_INJECTED] - counters[MC_EJECTED] - \
                counters[MC_DROPPED] != live:
            counters[MC_ERR_CYCLE] = cycle
            counters[MC_ERR_WHERE] = -1
            return k + 1, ERR_CONSERVATION
        if check_interval > 0 and (cycle + 1) % check_interval == 0:
            occupied = 0
            for i in range(regs.shape[0]):
                if regs[i] >= 0:
                    occupied += 1
            for fid in range(n_fifos):
                occupied += fifo_size[fid]
            if occupied != live:
                counters[MC_ERR_CYCLE] = cycle
                counters[MC_ERR_WHERE] = occupied - live
                return k + 1, ERR_CONSERVATION

    return n_cycles, 0


@njit(cache=True)
def _count_retry(pool, counters, retry_hist, f):
    """A transfer was denied: the flit keeps circling (a deflection)."""
    pool[PK_RETRY][f] += 1
    pool[PK_DEFL][f] += 1
    counters[MC_RING_RETRIES] += 1
    counters[MC_DEFLECTIONS] += 1
    if pool[PK_RETRY][f] > counters[MC_MAX_RING_RETRIES]:
        counters[MC_MAX_RING_RETRIES] = pool[PK_RETRY][f]


@njit(cache=True)
def _try_enqueue(group, f, cycle, group_start, group_count, fifo_depth,
                 fifo_base, buf_flit, buf_enq, fifo_head, fifo_size,
                 fifo_head_since, resv_flit, resv_key, pool):
    """Enqueue into a transfer-group FIFO: a FIFO reserved for this flit
    first, else the lowest unreserved FIFO with space."""
    key = flit_key(pool[PK_SRC][f], pool[PK_TXN][f], pool[PK_SEQ][f])
    for fo in range(group_count[group]):
        fid = group_start[group] + fo
        if resv_flit[fid] == f and resv_key[fid] == key and \
                fifo_size[fid] < fifo_depth[fid]:
            _fifo_put(fid, f, cycle, fifo_depth, fifo_base, buf_flit, buf_enq,
                      fifo_head, fifo_size, fifo_head_since)
            resv_flit[fid] = -1
            resv_key[fid] = -1
            return True
    for fo in range(group_count[group]):
        fid = group_start[group] + fo
        if resv_flit[fid] < 0 and fifo_size[fid] < fifo_depth[fid]:
            _fifo_put(fid, f, cycle, fifo_depth, fifo_base, buf_flit, buf_enq,
                      fifo_head, fifo_size, fifo_head_since)
            return True
    return False


@njit(cache=True)
def _try_enqueue_lane(group, lane, f, cycle, group_start, fifo_depth,
                      fifo_base, buf_flit, buf_enq, fifo_head, fifo_size,
                      fifo_head_since, resv_flit, resv_key, pool):
    """Enqueue into the FIFO belonging to one lane interface."""
    fid = group_start[group] + lane
    if resv_flit[fid] >= 0:
        if resv_flit[fid] != f or resv_key[fid] != \
                flit_key(pool[PK_SRC][f], pool[PK_TXN][f], pool[PK_SEQ][f]):
            return False
    if fifo_size[fid] < fifo_depth[fid]:
        _fifo_put(fid, f, cycle, fifo_depth, fifo_base, buf_flit, buf_enq,
                  fifo_head, fifo_size, fifo_head_since)
        if resv_flit[fid] == f:
            resv_flit[fid] = -1
            resv_key[fid] = -1
        return True
    return False


@njit(cache=True)
def _fifo_put(fid, f, cycle, fifo_depth, fifo_base, buf_flit, buf_enq,
              fifo_head, fifo_size, fifo_head_since):
    pos = fifo_base[fid] + (fifo_head[fid] + fifo_size[fid]) % fifo_depth[fid]
    buf_flit[pos] = f
    buf_enq[pos] = cycle
    if fifo_size[fid] == 0:
        fifo_head_since[fid] = cycle
    fifo_size[fid] += 1


class RingNetwork:
    """State and kernel bindings for one ring-tree simulation instance."""

    def __init__(self, layout, *, fifo_up: int = 1, fifo_down: int = 4,
                 eject_cap: int = 2, reassembly_slots: int = 16,
                 queue_capacity: int = 256):
        self.layout = layout
        n = layout.n_nodes
        self.regs = np.full(layout.total_regs, -1, dtype=np.int64)
        self.queues = PacketQueues(2 * n, queue_capacity)
        self.next_txn = np.zeros(n, dtype=np.int64)
        self.reassembly = ReassemblyState(n, reassembly_slots)
        self.grant_buf = np.zeros((2 * n + 4, 5), dtype=np.int64)
        self.grant_count = np.zeros(2, dtype=np.int64)
        self.eject_cap = eject_cap

        # transfer FIFO tables: per bridge, one up/down FIFO pair per
        # parent-ring lane (the wide-ring lane interfaces)
        gstart, gcount, fdepth, fbase, finto, flane = [], [], [], [], [], []
        total = 0
        fid = 0
        for b in range(layout.n_bridges):
            pr = int(layout.br_parent_ring[b])
            cr = int(layout.br_child_ring[b])
            lanes = int(layout.ring_lanes[pr])
            for side, depth, into in ((0, fifo_up, pr), (1, fifo_down, cr)):
                gstart.append(fid)
                gcount.append(lanes)
                for l in range(lanes):
                    fdepth.append(depth)
                    fbase.append(total)
                    finto.append(into)
                    flane.append(l)
                    total += depth
                    fid += 1
        self.n_fifos = fid
        self.group_start = np.array(gstart or [0], dtype=np.int64)
        self.group_count = np.array(gcount or [0], dtype=np.int64)
        self.fifo_depth = np.array(fdepth or [0], dtype=np.int64)
        self.fifo_base = np.array(fbase or [0], dtype=np.int64)
        self.fifo_into_ring = np.array(finto or [0], dtype=np.int64)
        self.fifo_lane = np.array(flane or [0], dtype=np.int64)
        self.buf_flit = np.full(max(total, 1), -1, dtype=np.int64)
        self.buf_enq = np.zeros(max(total, 1), dtype=np.int64)
        self.fifo_head = np.zeros(max(fid, 1), dtype=np.int64)
        self.fifo_size = np.zeros(max(fid, 1), dtype=np.int64)
        self.fifo_head_since = np.zeros(max(fid, 1), dtype=np.int64)
        self.fifo_size_start = np.zeros(max(fid, 1), dtype=np.int64)
        self.resv_flit = np.full(max(fid, 1), -1, dtype=np.int64)
        self.resv_key = np.full(max(fid, 1), -1, dtype=np.int64)

        # observers: one per (bridge side, direction, lane) ring interface
        oc, orr, op, osd, ola, ob, og = [], [], [], [], [], [], []
        for b in range(layout.n_bridges):
            for side, r, stop in ((0, int(layout.br_child_ring[b]),
                                   int(layout.br_child_stop[b])),
                                  (1, int(layout.br_parent_ring[b]),
                                   int(layout.br_parent_stop[b]))):
                sg = int(layout.ring_stop_base[r]) + stop
                lanes = int(layout.ring_lanes[r])
                for d in range(2):
                    pos = int(layout.stop_pos_cw[sg]) if d == CW \
                        else int(layout.stop_pos_ccw[sg])
                    for l in range(lanes):
                        oc.append(int(layout.chan_base[r]) + d * lanes + l)
                        orr.append(r)
                        op.append(pos)
                        osd.append(side)
                        ola.append(l)
                        ob.append(b)
                        og.append(2 * b + side)
        self.n_obs = len(oc)
        self.obs_chan = np.array(oc or [0], dtype=np.int64)
        self.obs_ring = np.array(orr or [0], dtype=np.int64)
        self.obs_pos = np.array(op or [0], dtype=np.int64)
        self.obs_side = np.array(osd or [0], dtype=np.int64)
        self.obs_lane = np.array(ola or [0], dtype=np.int64)
        self.obs_bridge = np.array(ob or [0], dtype=np.int64)
        self.obs_group = np.array(og or [0], dtype=np.int64)
        self.obs_due = np.ones(max(self.n_obs, 1), dtype=np.int64)
        self.obs_flit = np.full(max(self.n_obs, 1), -1, dtype=np.int64)
        self.obs_key = np.full(max(self.n_obs, 1), -1, dtype=np.int64)
        self.obs_circles = np.zeros(max(self.n_obs, 1), dtype=np.int64)
        self.obs_resv_fid = np.full(max(self.n_obs, 1), -1, dtype=np.int64)

        # throttle points: node direction queues then FIFO heads
        n_points = 2 * n + self.n_fifos
        self.pt_counter = np.zeros(n_points, dtype=np.int64)
        self.pt_ring = np.zeros(n_points, dtype=np.int64)
        for node in range(n):
            self.pt_ring[node * 2] = layout.node_ring[node]
            self.pt_ring[node * 2 + 1] = layout.node_ring[node]
        for f in range(self.n_fifos):
            self.pt_ring[2 * n + f] = self.fifo_into_ring[f]
        self.blocked_pts = np.zeros(n_points, dtype=np.int64)
        self.ring_maxc = np.zeros(layout.n_rings, dtype=np.int64)
        self.ring_argmax = np.full(layout.n_rings, -1, dtype=np.int64)
        self.ring_was_starved = np.zeros(layout.n_rings, dtype=np.int64)

        pool_cap = layout.total_regs + total + 2 * n + 16
        self.pool = FlitPool(pool_cap)

    # -- kernel argument groups -------------------------------------------
    def topo_args(self):
        lo = self.layout
        return (lo.ring_stops, lo.ring_hop, lo.ring_len, lo.ring_lanes,
                lo.ring_level, lo.chan_base, lo.chan_reg_start,
                lo.ring_stop_base, lo.stop_pos_cw, lo.stop_pos_ccw,
                lo.node_ring, lo.node_stop, lo.node_ring_at_level,
                lo.ring_child_slot, lo.first_up_cw, lo.first_up_ccw,
                lo.first_down_cw, lo.first_down_ccw, lo.ring_node_start,
                lo.ring_node_list, lo.ring_tree_dist)

    def bridge_args(self):
        lo = self.layout
        return (lo.br_child_ring, lo.br_parent_ring, lo.br_child_stop,
                lo.br_parent_stop, self.group_start, self.group_count,
                self.fifo_depth, self.fifo_base, self.fifo_into_ring,
                self.fifo_lane, self.buf_flit, self.buf_enq, self.fifo_head,
                self.fifo_size, self.fifo_head_since, self.fifo_size_start)

    def obs_args(self):
        return (self.obs_chan, self.obs_ring, self.obs_pos, self.obs_side,
                self.obs_lane, self.obs_bridge, self.obs_group, self.obs_due,
                self.obs_flit, self.obs_key, self.obs_circles,
                self.obs_resv_fid, self.resv_flit, self.resv_key)

    def throttle_args(self):
        return (self.pt_counter, self.pt_ring, self.blocked_pts,
                self.ring_maxc, self.ring_argmax, self.ring_was_starved)

    def queue_args(self):
        return self.queues.kernel_view() + (self.next_txn,)

    # -- inspection ---------------------------------------------------------
    def in_flight(self) -> int:
        """Direct enumeration of flits held anywhere in the network."""
        n = int(np.sum(self.regs >= 0))
        n += int(self.fifo_size.sum())
        return n

    def fifo_occupancy(self) -> int:
        return int(self.fifo_size.sum())

    MUTABLE = ("regs", "next_txn", "buf_flit", "buf_enq", "fifo_head",
               "fifo_size", "fifo_head_since", "fifo_size_start",
               "resv_flit", "resv_key", "obs_due", "obs_flit", "obs_key",
               "obs_circles", "obs_resv_fid", "pt_counter", "blocked_pts", "ring_maxc",
               "ring_argmax", "ring_was_starved", "grant_buf", "grant_count")

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
