"""Ring-tree topology construction.

A network is a tree of bidirectional rings.  Every ring is a circular
pipeline: each stop owns ``hop`` registers (router register + link
register(s)), so one full turn takes ``stops * hop`` cycles and one hop
takes ``hop`` cycles.  Wider rings are modelled as independent parallel
lanes, each one flit wide.

Stops are either node stops (a node router: eject/inject) or a bridge
stop (one side of a bridge router joining this ring to an adjacent
ring in the hierarchy).  The single-ring network is the degenerate
one-ring tree with no bridges.

Addressing follows the tree: a node's digits name the ring at each
level, most-global first; e.g. in a two-level 16-node network, node
(2, 1) is position 1 on local ring 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import ConfigError, NodeId


@dataclass
class RingTreeLayout:
    """Compiled ring-tree: flat arrays consumed by the ring engine."""

    n_nodes: int
    n_rings: int
    levels: int
    digit_radix: tuple[int, ...]

    # per ring
    ring_stops: np.ndarray      # stop count
    ring_hop: np.ndarray        # registers (cycles) per hop
    ring_len: np.ndarray        # stops * hop
    ring_lanes: np.ndarray
    ring_level: np.ndarray
    ring_parent: np.ndarray     # -1 for root
    ring_child_slot: np.ndarray # index among parent's children, -1 for root
    ring_children: np.ndarray   # [R, 4], -1 padded
    ring_child_count: np.ndarray
    ring_tree_dist: np.ndarray  # [R, R] hops in the ring tree

    # channels: one circular register array per (ring, dir, lane)
    chan_base: np.ndarray       # first channel id of ring
    chan_reg_start: np.ndarray  # per channel, offset into the reg array
    total_regs: int
    n_channels: int

    # stops (global ids: ring_stop_base[r] + stop_index)
    ring_stop_base: np.ndarray
    stop_pos_cw: np.ndarray     # register position of the stop, CW channel
    stop_pos_ccw: np.ndarray    # register position, CCW channel
    n_stops: int

    # nodes
    node_ring: np.ndarray
    node_stop: np.ndarray           # stop index on its ring
    node_ring_at_level: np.ndarray  # [N, levels] ancestor ring id per level

    # bridges
    n_bridges: int
    br_child_ring: np.ndarray
    br_parent_ring: np.ndarray
    br_child_stop: np.ndarray   # stop index on child ring
    br_parent_stop: np.ndarray  # stop index on parent ring

    # waypoint tables (stop hops to nearest qualifying stop, scanning 1..S)
    first_up_cw: np.ndarray     # [n_stops]
    first_up_ccw: np.ndarray
    first_down_cw: np.ndarray   # [n_stops, 4] per child slot
    first_down_ccw: np.ndarray

    # throttle support: node ids grouped by ring
    ring_node_start: np.ndarray
    ring_node_list: np.ndarray

    # python-side conveniences (not used by kernels)
    stop_owner: list = field(default_factory=list)  # per global stop: ("node", id) / ("bridge", id, side)

    def node_id(self, flat: int) -> NodeId:
        digits = []
        rest = flat
        for radix in reversed(self.digit_radix):
            digits.append(rest % radix)
            rest //= radix
        return NodeId(tuple(reversed(digits)), flat)

    def flat_of_digits(self, digits: tuple[int, ...]) -> int:
        flat = 0
        for d, radix in zip(digits, self.digit_radix):
            flat = flat * radix + d
        return flat

    @property
    def network_capacity(self) -> int:
        """Total flit-holding register count (all channels)."""
        return int(sum(int(self.ring_len[r]) * int(self.ring_lanes[r]) * 2
                       for r in range(self.n_rings)))


def _local_stop_layout(bridges_per_ring: int) -> list:
    """Stop sequence of a 4-node leaf ring: 'n' node slots, 'b' bridge slots.

    Bridges sit at evenly spread positions so two bridges land on
    opposite corners of the ring.
    """
    if bridges_per_ring == 1:
        return ["n", "n", "n", "n", "b"]
    if bridges_per_ring == 2:
        return ["n", "n", "b", "n", "n", "b"]
    if bridges_per_ring == 4:
        return ["n", "b", "n", "b", "n", "b", "n", "b"]
    raise ConfigError(f"unsupported bridges per leaf ring: {bridges_per_ring}")


def _mid_stop_layout(locals_per_group: int, bridges_per_local: int,
                     up_bridges: int) -> list:
    """Stop sequence of an intermediate ring.

    'd<i>' entries face down toward local ring i (parent-side stops, in
    local-ring order); 'u' entries face up toward the next level, spread
    evenly around the ring.
    """
    downs = []
    for i in range(locals_per_group):
        downs.extend([f"d{i}"] * bridges_per_local)
    if up_bridges == 0:
        return downs
    layout = []
    gap = len(downs) // up_bridges
    di = 0
    for u in range(up_bridges):
        layout.extend(downs[di:di + gap])
        di += gap
        layout.append("u")
    layout.extend(downs[di:])
    return layout


class _Builder:
    """Accumulates rings/stops/bridges, then compiles to arrays."""

    def __init__(self, n_nodes, levels, digit_radix):
        self.n_nodes = n_nodes
        self.levels = levels
        self.digit_radix = digit_radix
        self.rings = []   # dict(level, lanes, hop, stops=[("node", id)|("bridge", bid, side)])
        self.bridges = []  # dict(child_ring, parent_ring, child_stop, parent_stop)

    def add_ring(self, level, lanes, hop):
        self.rings.append({"level": level, "lanes": lanes, "hop": hop, "stops": []})
        return len(self.rings) - 1

    def add_stop(self, ring, owner):
        self.rings[ring]["stops"].append(owner)
        return len(self.rings[ring]["stops"]) - 1

    def add_bridge(self, child_ring, parent_ring):
        self.bridges.append({"child_ring": child_ring, "parent_ring": parent_ring,
                             "child_stop": -1, "parent_stop": -1})
        return len(self.bridges) - 1

    def compile(self) -> RingTreeLayout:
        R = len(self.rings)
        N = self.n_nodes
        B = len(self.bridges)

        ring_stops = np.array([len(r["stops"]) for r in self.rings], dtype=np.int64)
        ring_hop = np.array([r["hop"] for r in self.rings], dtype=np.int64)
        ring_len = ring_stops * ring_hop
        ring_lanes = np.array([r["lanes"] for r in self.rings], dtype=np.int64)
        ring_level = np.array([r["level"] for r in self.rings], dtype=np.int64)

        ring_parent = np.full(R, -1, dtype=np.int64)
        for b in self.bridges:
            ring_parent[b["child_ring"]] = b["parent_ring"]

        ring_children = np.full((R, 4), -1, dtype=np.int64)
        ring_child_count = np.zeros(R, dtype=np.int64)
        ring_child_slot = np.full(R, -1, dtype=np.int64)
        for r in range(R):
            p = ring_parent[r]
            if p >= 0 and ring_child_slot[r] < 0:
                slot = ring_child_count[p]
                ring_children[p, slot] = r
                ring_child_slot[r] = slot
                ring_child_count[p] += 1

        # channels, ordered ring-major / dir-major / lane
        chan_base = np.zeros(R, dtype=np.int64)
        chan_reg_start_list = []
        total = 0
        cid = 0
        for r in range(R):
            chan_base[r] = cid
            for _d in range(2):
                for _l in range(int(ring_lanes[r])):
                    chan_reg_start_list.append(total)
                    total += int(ring_len[r])
                    cid += 1
        chan_reg_start = np.array(chan_reg_start_list, dtype=np.int64)

        ring_stop_base = np.zeros(R, dtype=np.int64)
        acc = 0
        for r in range(R):
            ring_stop_base[r] = acc
            acc += int(ring_stops[r])
        n_stops = acc

        stop_pos_cw = np.zeros(n_stops, dtype=np.int64)
        stop_pos_ccw = np.zeros(n_stops, dtype=np.int64)
        stop_owner = [None] * n_stops
        for r in range(R):
            S = int(ring_stops[r])
            h = int(ring_hop[r])
            for i, owner in enumerate(self.rings[r]["stops"]):
                sg = int(ring_stop_base[r]) + i
                stop_pos_cw[sg] = i * h
                stop_pos_ccw[sg] = ((S - i) % S) * h
                stop_owner[sg] = owner

        node_ring = np.full(N, -1, dtype=np.int64)
        node_stop = np.full(N, -1, dtype=np.int64)
        for sg, owner in enumerate(stop_owner):
            if owner[0] == "node":
                nid = owner[1]
                r = int(np.searchsorted(ring_stop_base, sg, side="right") - 1)
                node_ring[nid] = r
                node_stop[nid] = sg - int(ring_stop_base[r])

        node_ring_at_level = np.full((N, self.levels), -1, dtype=np.int64)
        for n in range(N):
            r = int(node_ring[n])
            while r >= 0:
                node_ring_at_level[n, int(ring_level[r])] = r
                r = int(ring_parent[r])

        br_child_ring = np.array([b["child_ring"] for b in self.bridges], dtype=np.int64)
        br_parent_ring = np.array([b["parent_ring"] for b in self.bridges], dtype=np.int64)
        br_child_stop = np.full(B, -1, dtype=np.int64)
        br_parent_stop = np.full(B, -1, dtype=np.int64)
        for sg, owner in enumerate(stop_owner):
            if owner[0] == "bridge":
                bid, side = owner[1], owner[2]
                r = int(np.searchsorted(ring_stop_base, sg, side="right") - 1)
                idx = sg - int(ring_stop_base[r])
                if side == "child":
                    br_child_stop[bid] = idx
                else:
                    br_parent_stop[bid] = idx

        # waypoint tables
        first_up_cw = np.full(n_stops, -1, dtype=np.int64)
        first_up_ccw = np.full(n_stops, -1, dtype=np.int64)
        first_down_cw = np.full((n_stops, 4), -1, dtype=np.int64)
        first_down_ccw = np.full((n_stops, 4), -1, dtype=np.int64)
        for r in range(R):
            S = int(ring_stops[r])
            base = int(ring_stop_base[r])
            is_up = [False] * S
            down_slot = [-1] * S
            for i in range(S):
                owner = stop_owner[base + i]
                if owner[0] == "bridge":
                    bid, side = owner[1], owner[2]
                    if side == "child":
                        is_up[i] = True
                    else:
                        down_slot[i] = int(ring_child_slot[br_child_ring[bid]])
            for i in range(S):
                for k in range(1, S + 1):
                    if is_up[(i + k) % S] and first_up_cw[base + i] < 0:
                        first_up_cw[base + i] = k
                    if is_up[(i - k) % S] and first_up_ccw[base + i] < 0:
                        first_up_ccw[base + i] = k
                for slot in range(4):
                    for k in range(1, S + 1):
                        if down_slot[(i + k) % S] == slot:
                            first_down_cw[base + i, slot] = k
                            break
                    for k in range(1, S + 1):
                        if down_slot[(i - k) % S] == slot:
                            first_down_ccw[base + i, slot] = k
                            break

        # tree distances between rings (BFS; R is tiny)
        ring_tree_dist = np.full((R, R), 10 ** 6, dtype=np.int64)
        adj = [[] for _ in range(R)]
        for r in range(R):
            p = int(ring_parent[r])
            if p >= 0:
                adj[r].append(p)
                adj[p].append(r)
        for s in range(R):
            ring_tree_dist[s, s] = 0
            frontier = [s]
            while frontier:
                nxt = []
                for u in frontier:
                    for v in adj[u]:
                        if ring_tree_dist[s, v] > ring_tree_dist[s, u] + 1:
                            ring_tree_dist[s, v] = ring_tree_dist[s, u] + 1
                            nxt.append(v)
                frontier = nxt

        order = np.argsort(node_ring, kind="stable")
        ring_node_list = order.astype(np.int64)
        ring_node_start = np.zeros(R + 1, dtype=np.int64)
        for r in range(R):
            ring_node_start[r + 1] = ring_node_start[r] + int(np.sum(node_ring == r))

        return RingTreeLayout(
            n_nodes=N, n_rings=R, levels=self.levels, digit_radix=self.digit_radix,
            ring_stops=ring_stops, ring_hop=ring_hop, ring_len=ring_len,
            ring_lanes=ring_lanes, ring_level=ring_level, ring_parent=ring_parent,
            ring_child_slot=ring_child_slot, ring_children=ring_children,
            ring_child_count=ring_child_count, ring_tree_dist=ring_tree_dist,
            chan_base=chan_base, chan_reg_start=chan_reg_start,
            total_regs=total, n_channels=cid,
            ring_stop_base=ring_stop_base, stop_pos_cw=stop_pos_cw,
            stop_pos_ccw=stop_pos_ccw, n_stops=n_stops,
            node_ring=node_ring, node_stop=node_stop,
            node_ring_at_level=node_ring_at_level,
            n_bridges=B, br_child_ring=br_child_ring, br_parent_ring=br_parent_ring,
            br_child_stop=br_child_stop, br_parent_stop=br_parent_stop,
            first_up_cw=first_up_cw, first_up_ccw=first_up_ccw,
            first_down_cw=first_down_cw, first_down_ccw=first_down_ccw,
            ring_node_start=ring_node_start, ring_node_list=ring_node_list,
            stop_owner=stop_owner,
        )


def build_single_ring(n: int, lanes: int = 1, hop_cycles: int = 2) -> RingTreeLayout:
    """One bidirectional ring of ``n`` node routers with ``lanes`` lanes."""
    if n < 2:
        raise ConfigError("single ring needs at least 2 nodes")
    if lanes < 1:
        raise ConfigError("lanes must be >= 1")
    if hop_cycles not in (1, 2):
        raise ConfigError("per-hop pipeline depth must be 1 or 2 registers")
    b = _Builder(n, levels=1, digit_radix=(n,))
    r = b.add_ring(level=0, lanes=lanes, hop=hop_cycles)
    for i in range(n):
        b.add_stop(r, ("node", i))
    return b.compile()


def build_hird(nodes: int = 16, bridges: int = 8, lane_ratio: int = 2,
               local_hop: int = 2, global_hop: int = 3) -> RingTreeLayout:
    """Hierarchical ring network: 16 nodes (2 levels) or 64 nodes (3 levels).

    ``bridges`` is the bridge count joining each group of four rings to
    its parent ring (4, 8 or 16 total, i.e. 1, 2 or 4 per child ring).
    ``lane_ratio`` widens each more-global level by that factor.
    """
    if nodes not in (16, 64):
        raise ConfigError(f"unsupported hierarchical ring size: {nodes}")
    if bridges not in (4, 8, 16):
        raise ConfigError(f"unsupported bridge count: {bridges}")
    if lane_ratio < 1:
        raise ConfigError("lane_ratio must be >= 1")
    bpl = bridges // 4  # bridges per child ring

    if nodes == 16:
        b = _Builder(16, levels=2, digit_radix=(4, 4))
        root = b.add_ring(level=0, lanes=lane_ratio, hop=global_hop)
        local_layout = _local_stop_layout(bpl)
        for lr in range(4):
            ring = b.add_ring(level=1, lanes=1, hop=local_hop)
            node_pos = 0
            for kind in local_layout:
                if kind == "n":
                    b.add_stop(ring, ("node", lr * 4 + node_pos))
                    node_pos += 1
                else:
                    bid = b.add_bridge(ring, root)
                    b.add_stop(ring, ("bridge", bid, "child"))
                    b.add_stop(root, ("bridge", bid, "parent"))
        return b.compile()

    # 64 nodes, 3 levels: 1 root + 4 mid + 16 leaf rings
    b = _Builder(64, levels=3, digit_radix=(4, 4, 4))
    root = b.add_ring(level=0, lanes=lane_ratio * lane_ratio, hop=global_hop)
    local_layout = _local_stop_layout(bpl)
    mid_layout = _mid_stop_layout(4, bpl, bpl)
    for q in range(4):
        mid = b.add_ring(level=1, lanes=lane_ratio, hop=global_hop)
        leaf_rings = []
        leaf_bridges = [[] for _ in range(4)]
        for lr in range(4):
            ring = b.add_ring(level=2, lanes=1, hop=local_hop)
            leaf_rings.append(ring)
            node_pos = 0
            for kind in local_layout:
                if kind == "n":
                    b.add_stop(ring, ("node", q * 16 + lr * 4 + node_pos))
                    node_pos += 1
                else:
                    bid = b.add_bridge(ring, mid)
                    b.add_stop(ring, ("bridge", bid, "child"))
                    leaf_bridges[lr].append(bid)
        used = [0] * 4
        for kind in mid_layout:
            if kind == "u":
                bid = b.add_bridge(mid, root)
                b.add_stop(mid, ("bridge", bid, "child"))
                b.add_stop(root, ("bridge", bid, "parent"))
            else:
                lr = int(kind[1:])
                bid = leaf_bridges[lr][used[lr]]
                used[lr] += 1
                b.add_stop(mid, ("bridge", bid, "parent"))
    return b.compile()
