"""Per-node clustering state machine.

Pure transition functions mapping (state, input) to (state, outbound
messages, timer requests). Nodes know only their own id, their 1-hop
neighbors (from beaconing), and the protocol parameters; they have no
clock or channel knowledge. The engine owns all states and serializes
event application; functions mutate the passed state in place and return
it for convenience.

Protocol sketch: each node elects itself cluster head (CH) with
probability p and floods a CH_AD advertisement at most k hops. Non-heads
collect advertisements for k*t_hop + delta, then either join every heard
cluster with unicast JREQ messages routed along recorded `prev` pointers,
or, having heard nothing, become a late cluster head themselves. Heads
collect joins for c*k*t_hop (+ delta when set at bootstrap) and terminate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .config import SimConfig

__all__ = [
    "NodeStatus",
    "ChTableEntry",
    "NodeState",
    "ChAd",
    "Jreq",
    "TimerKind",
    "TimerRequest",
    "ProtocolError",
    "init_node",
    "handle_ch_ad",
    "on_ch_ad_wait_expired",
    "handle_jreq",
    "on_jreq_wait_expired",
    "is_boundary",
]

_NO_OUTPUT: tuple = ()


class ProtocolError(RuntimeError):
    """An engine drove a transition that the state machine forbids."""


class NodeStatus(Enum):
    NCH = "nch"
    CH = "ch"
    TERMINATED_CH = "terminated_ch"
    TERMINATED_MEMBER = "terminated_member"


class TimerKind(Enum):
    CH_AD_WAIT = "ch_ad_wait"
    JREQ_WAIT = "jreq_wait"


@dataclass(frozen=True, slots=True)
class TimerRequest:
    kind: TimerKind
    duration: float


@dataclass(frozen=True, slots=True)
class ChAd:
    """Cluster-head advertisement: sender, advertised head, hops so far."""

    sid: int
    chid: int
    hc: int


@dataclass(frozen=True, slots=True)
class Jreq:
    """Join request unicast hop-by-hop toward a cluster head.

    rid addresses the next relay; sid is the joining node. The payload
    carries the joiner's 1-hop adjacency (for the head's cluster graph)
    and every cluster the joiner heard with its hop cost (for the head's
    adjacent-cluster bookkeeping).
    """

    rid: int
    sid: int
    chid: int
    neighbor_edges: tuple[tuple[int, int], ...]
    heard_clusters: tuple[tuple[int, int], ...]


@dataclass(slots=True)
class ChTableEntry:
    """Known cluster: hop count to its head and next hop toward it."""

    hc: int
    prev: int


@dataclass(slots=True)
class NodeState:
    nid: int
    neighbors: tuple[int, ...]
    status: NodeStatus = NodeStatus.NCH
    ch_table: dict[int, ChTableEntry] = field(default_factory=dict)
    # head only: adjacent cluster id -> {boundary node id: hop cost}
    ac_table: dict[int, dict[int, int]] = field(default_factory=dict)
    # head only: local cluster graph accumulated from join requests
    lcg_vertices: set[int] = field(default_factory=set)
    lcg_edges: set[tuple[int, int]] = field(default_factory=set)
    chad_sent: int = 0
    jreq_sent: int = 0
    late_ch: bool = False
    violations: int = 0  # malformed messages dropped
    orphan_jreq: int = 0  # relay requests with no route entry
    late_jreq: int = 0  # joins arriving after the head froze


def is_boundary(state: NodeState) -> bool:
    """A node sitting in two or more clusters is a boundary node."""
    return len(state.ch_table) >= 2


def init_node(
    nid: int,
    coin: float,
    config: SimConfig,
    neighbors: tuple[int, ...],
) -> tuple[NodeState, tuple[ChAd, ...], tuple[TimerRequest, ...]]:
    """Bootstrap a node: elect with probability p or start listening.

    Heads immediately advertise themselves (hop count 1) and arm the join
    window; everyone else arms the advertisement window.
    """
    state = NodeState(nid=nid, neighbors=tuple(neighbors))
    if coin < config.p:
        state.status = NodeStatus.CH
        state.chad_sent += 1
        out = (ChAd(sid=nid, chid=nid, hc=1),)
        timers = (TimerRequest(TimerKind.JREQ_WAIT, config.jreq_wait),)
        return state, out, timers
    state.status = NodeStatus.NCH
    return state, _NO_OUTPUT, (TimerRequest(TimerKind.CH_AD_WAIT, config.ch_ad_wait),)


def handle_ch_ad(
    state: NodeState, msg: ChAd, config: SimConfig
) -> tuple[NodeState, tuple[ChAd, ...]]:
    """Record an advertisement and extend the bounded flood.

    Non-heads (including members whose listening window already closed,
    which still relay late floods) store new clusters and forward with
    hc+1 while hc < k; a strictly shorter path updates hc/prev without
    re-forwarding. Heads discard their own echo, and file a newly heard
    cluster as adjacent with themselves as the boundary node. A frozen
    head ignores everything.
    """
    if msg.hc < 1 or msg.hc > config.k:
        state.violations += 1
        return state, _NO_OUTPUT

    status = state.status
    if status is NodeStatus.TERMINATED_CH:
        return state, _NO_OUTPUT

    if status is NodeStatus.CH:
        if msg.chid == state.nid:
            return state, _NO_OUTPUT  # echo of our own advertisement
        if msg.chid in state.ac_table:
            return state, _NO_OUTPUT
        state.ac_table[msg.chid] = {state.nid: msg.hc}
        state.ch_table[msg.chid] = ChTableEntry(msg.hc, msg.sid)
        if msg.hc < config.k:
            state.chad_sent += 1
            return state, (ChAd(sid=state.nid, chid=msg.chid, hc=msg.hc + 1),)
        return state, _NO_OUTPUT

    entry = state.ch_table.get(msg.chid)
    if entry is None:
        state.ch_table[msg.chid] = ChTableEntry(msg.hc, msg.sid)
        if msg.hc < config.k:
            state.chad_sent += 1
            return state, (ChAd(sid=state.nid, chid=msg.chid, hc=msg.hc + 1),)
    elif msg.hc < entry.hc:
        entry.hc = msg.hc
        entry.prev = msg.sid
    return state, _NO_OUTPUT


def on_ch_ad_wait_expired(
    state: NodeState, config: SimConfig
) -> tuple[NodeState, tuple, tuple[TimerRequest, ...]]:
    """Close the listening window: join every heard cluster or become a head.

    With an empty table the node converts to a late head and advertises;
    its join window is c*k*t_hop (the bootstrap slack is already spent).
    Otherwise the node unicasts one join request per known cluster toward
    the recorded next hop and terminates as a member.
    """
    if state.status is not NodeStatus.NCH:
        raise ProtocolError(f"node {state.nid}: listening window on status {state.status}")

    if not state.ch_table:
        state.status = NodeStatus.CH
        state.late_ch = True
        state.chad_sent += 1
        out = (ChAd(sid=state.nid, chid=state.nid, hc=1),)
        timers = (TimerRequest(TimerKind.JREQ_WAIT, config.jreq_wait_on_conversion),)
        return state, out, timers

    edges = tuple((state.nid, nb) for nb in state.neighbors)
    heard = tuple((chid, e.hc) for chid, e in state.ch_table.items())
    out = []
    for chid, entry in state.ch_table.items():
        state.jreq_sent += 1
        out.append(
            Jreq(
                rid=entry.prev,
                sid=state.nid,
                chid=chid,
                neighbor_edges=edges,
                heard_clusters=heard,
            )
        )
    state.status = NodeStatus.TERMINATED_MEMBER
    return state, tuple(out), _NO_OUTPUT


def _relay_jreq(state: NodeState, msg: Jreq) -> tuple[NodeState, tuple[Jreq, ...]]:
    entry = state.ch_table.get(msg.chid)
    if entry is None:
        state.orphan_jreq += 1
        return state, _NO_OUTPUT
    state.jreq_sent += 1
    return state, (
        Jreq(
            rid=entry.prev,
            sid=msg.sid,
            chid=msg.chid,
            neighbor_edges=msg.neighbor_edges,
            heard_clusters=msg.heard_clusters,
        ),
    )


def handle_jreq(
    state: NodeState, msg: Jreq, config: SimConfig
) -> tuple[NodeState, tuple[Jreq, ...]]:
    """Register a join at its destination head or relay it one hop closer.

    Non-addressees ignore the message (unicast discipline keeps the join
    phase off the flooding path). The destination head records the joiner
    in its cluster graph and files every other cluster the joiner heard as
    adjacent, with the joiner as boundary node. Any other recipient
    rewrites rid to its own next hop for that cluster and re-emits.
    """
    if msg.rid != state.nid:
        return state, _NO_OUTPUT

    status = state.status
    if status is NodeStatus.CH or status is NodeStatus.TERMINATED_CH:
        if msg.chid == state.nid:
            if status is NodeStatus.TERMINATED_CH:
                state.late_jreq += 1  # join arrived after the freeze
                return state, _NO_OUTPUT
            state.lcg_vertices.add(msg.sid)
            for a, b in msg.neighbor_edges:
                state.lcg_edges.add((a, b) if a <= b else (b, a))
            for chid, cost in msg.heard_clusters:
                if chid != state.nid:
                    state.ac_table.setdefault(chid, {})[msg.sid] = cost
            return state, _NO_OUTPUT
        return _relay_jreq(state, msg)

    return _relay_jreq(state, msg)


def on_jreq_wait_expired(state: NodeState) -> NodeState:
    """Freeze the head: membership and adjacency become final."""
    if state.status is NodeStatus.TERMINATED_CH:
        return state  # duplicate expiry is a no-op
    if state.status is not NodeStatus.CH:
        raise ProtocolError(f"node {state.nid}: join window on status {state.status}")
    state.status = NodeStatus.TERMINATED_CH
    return state
