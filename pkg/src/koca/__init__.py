"""Discrete-event simulator and analysis toolkit for randomized k-hop
overlapping clustering in stationary wireless sensor networks."""

from .config import Channel, ConfigError, SimConfig, Streams, derive_seed, rep_streams
from .engine import EngineError, Event, MessageCounts, SimResult, count_messages, run_replication, run_simulation
from .metrics import (
    ClusterView,
    MetricsReport,
    NoOverlapError,
    aod,
    build_cluster_view,
    cluster_size_stats,
    compute_report,
    connectivity_ratio,
    coverage,
    induced_overlap_graph,
    overlap_degrees,
    summarize,
)
from .protocol import (
    ChAd,
    ChTableEntry,
    Jreq,
    NodeState,
    NodeStatus,
    ProtocolError,
    TimerKind,
    TimerRequest,
)
from .topology import Topology, avg_node_degree, bfs_hops, generate_topology, topology_from_positions, tx_range_for_degree

__all__ = [
    "Channel",
    "ConfigError",
    "SimConfig",
    "Streams",
    "derive_seed",
    "rep_streams",
    "EngineError",
    "Event",
    "MessageCounts",
    "SimResult",
    "count_messages",
    "run_replication",
    "run_simulation",
    "ClusterView",
    "MetricsReport",
    "NoOverlapError",
    "aod",
    "build_cluster_view",
    "cluster_size_stats",
    "compute_report",
    "connectivity_ratio",
    "coverage",
    "induced_overlap_graph",
    "overlap_degrees",
    "summarize",
    "ChAd",
    "ChTableEntry",
    "Jreq",
    "NodeState",
    "NodeStatus",
    "ProtocolError",
    "TimerKind",
    "TimerRequest",
    "Topology",
    "avg_node_degree",
    "bfs_hops",
    "generate_topology",
    "topology_from_positions",
    "tx_range_for_degree",
]

__version__ = "0.1.0"
