"""Deterministic discrete-event loop driving the clustering protocol.

Broadcasts fan out as one delivery event per neighbor after one hop
latency; join requests travel as true unicasts to their addressee only,
while still being counted once per hop. The lossy channel drops each
receiver copy independently with probability `per`; the contention
channel additionally delays each transmission by a uniform jitter.

Events are ordered by (time, priority, sequence). Deliveries sort before
timer expiries at the same instant, so a join that arrives exactly when
the head's window closes is still registered; without this the entire
outermost hop ring of every cluster would be lost.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from heapq import heappop, heappush

from .config import SimConfig, Streams, rep_streams
from .protocol import (
    ChAd,
    Jreq,
    NodeState,
    NodeStatus,
    TimerKind,
    handle_ch_ad,
    handle_jreq,
    init_node,
    on_ch_ad_wait_expired,
    on_jreq_wait_expired,
)
from .topology import Topology, generate_topology

__all__ = [
    "EngineError",
    "Event",
    "SimResult",
    "MessageCounts",
    "run_simulation",
    "run_replication",
    "count_messages",
]

# event kinds; deliveries take queue priority 0, timers 1
_DELIVER_CHAD = 0
_DELIVER_JREQ = 1
_TIMER_CHAD_WAIT = 2
_TIMER_JREQ_WAIT = 3

EVENT_BUDGET = 10**9  # exceeding this signals a forwarding loop


class EngineError(RuntimeError):
    pass


@dataclass(frozen=True, slots=True)
class Event:
    """One observable occurrence, recorded when tracing is enabled."""

    time: float
    kind: str  # rx-chad | rx-jreq | timer-chadwait | timer-jreqwait
    node: int


@dataclass
class SimResult:
    """Complete outcome of one replication."""

    config: SimConfig
    topology: Topology
    states: list[NodeState]
    chad_total: int
    jreq_total: int
    termination_time: float  # last processed event time
    node_termination_times: list[float]  # instant each node reached a final status
    coverage_at_first_wave: float
    drop_count: int

    @property
    def n(self) -> int:
        return len(self.states)

    @property
    def violations(self) -> int:
        return sum(s.violations for s in self.states)

    @property
    def orphan_jreq(self) -> int:
        return sum(s.orphan_jreq for s in self.states)

    @property
    def late_jreq(self) -> int:
        return sum(s.late_jreq for s in self.states)

    def head_ids(self, include_late: bool = True) -> list[int]:
        """Cluster heads at quiescence, optionally restricted to the first wave."""
        return [
            s.nid
            for s in self.states
            if s.status in (NodeStatus.CH, NodeStatus.TERMINATED_CH)
            and (include_late or not s.late_ch)
        ]


@dataclass(frozen=True, slots=True)
class MessageCounts:
    chad_total: int
    jreq_total: int
    per_node_mean: float


def count_messages(result: SimResult) -> MessageCounts:
    """Total advertisement broadcasts, join-request hops, and per-node mean.

    A broadcast counts once regardless of neighbor count; a join request
    counts once per hop it travels.
    """
    return MessageCounts(
        chad_total=result.chad_total,
        jreq_total=result.jreq_total,
        per_node_mean=(result.chad_total + result.jreq_total) / result.n,
    )


def run_simulation(
    config: SimConfig,
    topology: Topology,
    streams: Streams,
    trace: list[Event] | None = None,
) -> SimResult:
    """Run one replication to quiescence.

    All nodes bootstrap at time 0 with election coins drawn in node-id
    order from `streams.coins`. Channel randomness (jitter first, then one
    drop draw per receiver copy in neighbor order) comes exclusively from
    `streams.channel`, so noise never perturbs the election.
    """
    n = config.n
    adjacency = topology.adjacency
    channel = config.channel
    per = channel.per
    jitter_max = channel.jitter_max if channel.kind == "contention" else 0.0
    t_hop = config.t_hop
    chan_random = streams.channel.random

    heap: list = []
    seq = itertools.count()
    drops = 0

    def broadcast(sender: int, msg: ChAd, now: float) -> None:
        nonlocal drops
        t = now + t_hop + (chan_random() * jitter_max if jitter_max else 0.0)
        for v in adjacency[sender]:
            if per and chan_random() < per:
                drops += 1
                continue
            heappush(heap, (t, 0, next(seq), _DELIVER_CHAD, v, msg))

    def unicast(msg: Jreq, now: float) -> None:
        nonlocal drops
        t = now + t_hop + (chan_random() * jitter_max if jitter_max else 0.0)
        if per and chan_random() < per:
            drops += 1
            return
        heappush(heap, (t, 0, next(seq), _DELIVER_JREQ, msg.rid, msg))

    states: list[NodeState] = []
    term_time = [0.0] * n
    initial_ch = 0
    covered_nch = 0

    coin_random = streams.coins.random
    for nid in range(n):
        state, out, timers = init_node(nid, coin_random(), config, adjacency[nid])
        states.append(state)
        if state.status is NodeStatus.CH:
            initial_ch += 1
        for msg in out:
            broadcast(nid, msg, 0.0)
        for req in timers:
            kind = _TIMER_CHAD_WAIT if req.kind is TimerKind.CH_AD_WAIT else _TIMER_JREQ_WAIT
            heappush(heap, (req.duration, 1, next(seq), kind, nid, None))

    last_time = 0.0
    processed = 0
    while heap:
        time, _prio, _s, kind, node, payload = heappop(heap)
        processed += 1
        if processed > EVENT_BUDGET:
            raise EngineError(
                f"event budget exceeded at t={time}: likely forwarding loop"
            )
        last_time = time
        state = states[node]

        if kind == _DELIVER_CHAD:
            if trace is not None:
                trace.append(Event(time, "rx-chad", node))
            _, out = handle_ch_ad(state, payload, config)
            for msg in out:
                broadcast(node, msg, time)
        elif kind == _DELIVER_JREQ:
            if trace is not None:
                trace.append(Event(time, "rx-jreq", node))
            _, out = handle_jreq(state, payload, config)
            for msg in out:
                unicast(msg, time)
        elif kind == _TIMER_CHAD_WAIT:
            if trace is not None:
                trace.append(Event(time, "timer-chadwait", node))
            if state.ch_table:
                covered_nch += 1  # first-wave coverage sampled before conversion
            _, out, timers = on_ch_ad_wait_expired(state, config)
            if state.status is NodeStatus.TERMINATED_MEMBER:
                term_time[node] = time
                for msg in out:
                    unicast(msg, time)
            else:  # converted to a late head
                for msg in out:
                    broadcast(node, msg, time)
            for req in timers:
                heappush(heap, (time + req.duration, 1, next(seq), _TIMER_JREQ_WAIT, node, None))
        else:  # _TIMER_JREQ_WAIT
            if trace is not None:
                trace.append(Event(time, "timer-jreqwait", node))
            on_jreq_wait_expired(state)
            term_time[node] = time

    for state in states:  # quiescence sanity: nobody left mid-protocol
        if state.status not in (NodeStatus.TERMINATED_CH, NodeStatus.TERMINATED_MEMBER):
            raise EngineError(f"node {state.nid} never terminated ({state.status})")

    return SimResult(
        config=config,
        topology=topology,
        states=states,
        chad_total=sum(s.chad_sent for s in states),
        jreq_total=sum(s.jreq_sent for s in states),
        termination_time=last_time,
        node_termination_times=term_time,
        coverage_at_first_wave=(initial_ch + covered_nch) / n,
        drop_count=drops,
    )


def run_replication(config: SimConfig, rep: int = 0, trace: list[Event] | None = None) -> SimResult:
    """Generate the topology for replication `rep` and run it."""
    streams = rep_streams(config.seed, rep)
    topo = generate_topology(config, streams.topology)
    return run_simulation(config, topo, streams, trace=trace)
