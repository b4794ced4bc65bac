"""Evaluation metrics computed from a finished run.

Membership for the cluster-level metrics (size, overlap, connectivity) is
"heard" membership: node v belongs to cluster A iff A appears in v's
cluster table at quiescence, plus the head itself. Under an ideal channel
this equals the closed k-hop neighborhood of the head, which is what makes
overlap and cluster size independent of the election probability p: the
member sets are a property of the topology, not of which nodes won the
coin flip. The registered-join view ("joined": the head's accumulated
cluster graph) is also available; it excludes heads that overheard the
cluster and therefore shrinks with p.

Coverage, by contrast, is about hearing at the node side and is sampled
by the engine at each node's listening-window expiry, before uncovered
nodes convert themselves to late heads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from .engine import SimResult, count_messages
from .protocol import NodeStatus

__all__ = [
    "ClusterView",
    "MetricsReport",
    "NoOverlapError",
    "build_cluster_view",
    "coverage",
    "overlap_degrees",
    "aod",
    "induced_overlap_graph",
    "connectivity_ratio",
    "cluster_size_stats",
    "compute_report",
    "summarize",
    "nan_mean",
]


class NoOverlapError(ValueError):
    """No pair of clusters shares a member."""


@dataclass
class ClusterView:
    """Per-head membership and adjacency snapshot.

    members maps head id -> frozenset of member ids (head included).
    boundary maps head id -> {adjacent head id: {boundary node: hop cost}}.
    """

    heads: list[int]
    members: dict[int, frozenset[int]]
    boundary: dict[int, dict[int, dict[int, int]]]
    membership: str  # "heard" or "joined"


def build_cluster_view(result: SimResult, membership: str = "heard") -> ClusterView:
    """Collect cluster membership from final node states."""
    if membership not in ("heard", "joined"):
        raise ValueError(f"unknown membership {membership!r}")
    heads = result.head_ids()
    head_set = set(heads)
    raw: dict[int, set[int]] = {h: {h} for h in heads}
    if membership == "heard":
        for st in result.states:
            for chid in st.ch_table:
                if chid in raw:
                    raw[chid].add(st.nid)
    else:
        for h in heads:
            raw[h].update(result.states[h].lcg_vertices)
    members = {h: frozenset(v) for h, v in raw.items()}

    for h, mem in members.items():  # every member heard the head or is the head
        for v in mem:
            assert v == h or h in result.states[v].ch_table, (
                f"node {v} in cluster {h} without a table entry"
            )

    boundary = {h: dict(result.states[h].ac_table) for h in heads}
    return ClusterView(heads=heads, members=members, boundary=boundary, membership=membership)


def coverage(result: SimResult) -> float:
    """Fraction of nodes that were heads or heard a head in the first wave."""
    return result.coverage_at_first_wave


def overlap_degrees(view: ClusterView) -> list[tuple[int, int, int]]:
    """Shared-member count per unordered head pair; disjoint pairs omitted."""
    heads = sorted(view.heads)
    out = []
    for i, a in enumerate(heads):
        ma = view.members[a]
        for b in heads[i + 1 :]:
            deg = len(ma & view.members[b])
            if deg >= 1:
                out.append((a, b, deg))
    return out


def aod(view: ClusterView) -> tuple[float, float]:
    """Mean overlap degree over overlapping pairs and its stdev/mean."""
    degrees = [d for _, _, d in overlap_degrees(view)]
    if not degrees:
        raise NoOverlapError("no overlapping cluster pair")
    mean = sum(degrees) / len(degrees)
    var = sum((d - mean) ** 2 for d in degrees) / len(degrees)
    return mean, math.sqrt(var) / mean


def induced_overlap_graph(view: ClusterView) -> dict[int, set[int]]:
    """Graph on heads with an edge wherever member sets intersect."""
    graph: dict[int, set[int]] = {h: set() for h in view.heads}
    for a, b, _ in overlap_degrees(view):
        graph[a].add(b)
        graph[b].add(a)
    return graph


def connectivity_ratio(graph: dict[int, set[int]]) -> float:
    """Largest connected component size over head count."""
    if not graph:
        raise ValueError("no cluster heads")
    seen: set[int] = set()
    best = 0
    for start in graph:
        if start in seen:
            continue
        stack = [start]
        seen.add(start)
        size = 0
        while stack:
            u = stack.pop()
            size += 1
            for v in graph[u]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        best = max(best, size)
    return best / len(graph)


def cluster_size_stats(view: ClusterView) -> tuple[float, float]:
    """Mean cluster size (head + members) and its stdev/mean."""
    sizes = [len(m) for m in view.members.values()]
    if not sizes:
        raise ValueError("no clusters")
    mean = sum(sizes) / len(sizes)
    var = sum((s - mean) ** 2 for s in sizes) / len(sizes)
    return mean, (math.sqrt(var) / mean if mean else 0.0)


@dataclass
class MetricsReport:
    """The per-run metric row; field order matches the CSV columns."""

    cn: float
    aod_mean: float
    aod_normstd: float
    cr: float
    csize_mean: float
    csize_normstd: float
    nclusters: int
    msg_chad: int
    msg_jreq: int
    msg_per_node: float
    term_time: float


def compute_report(result: SimResult, view: ClusterView | None = None) -> MetricsReport:
    """Assemble all metrics for one run; overlap fields are NaN when undefined."""
    if view is None:
        view = build_cluster_view(result)
    try:
        aod_mean, aod_normstd = aod(view)
    except NoOverlapError:
        aod_mean = aod_normstd = math.nan
    cr = connectivity_ratio(induced_overlap_graph(view))
    csize_mean, csize_normstd = cluster_size_stats(view)
    counts = count_messages(result)
    report = MetricsReport(
        cn=coverage(result),
        aod_mean=aod_mean,
        aod_normstd=aod_normstd,
        cr=cr,
        csize_mean=csize_mean,
        csize_normstd=csize_normstd,
        nclusters=len(view.heads),
        msg_chad=counts.chad_total,
        msg_jreq=counts.jreq_total,
        msg_per_node=counts.per_node_mean,
        term_time=result.termination_time,
    )
    assert 0.0 <= report.cn <= 1.0 and 0.0 < report.cr <= 1.0
    return report


def nan_mean(values: list[float]) -> float:
    vals = [v for v in values if not math.isnan(v)]
    return sum(vals) / len(vals) if vals else math.nan


def _nan_normstd(values: list[float]) -> float:
    vals = [v for v in values if not math.isnan(v)]
    if not vals:
        return math.nan
    mean = sum(vals) / len(vals)
    if mean == 0:
        return 0.0
    var = sum((v - mean) ** 2 for v in vals) / len(vals)
    return math.sqrt(var) / mean

def summarize(reports: list[MetricsReport]) -> MetricsReport:
    """Aggregate per-run rows into one summary row.

    Plain columns average across replications. The two normstd columns
    instead report the across-replication dispersion of the per-run means
    (stdev/mean of aod_mean and csize_mean); the within-run dispersion
    stays available in the individual rows, so both readings are emitted.
    """
    return MetricsReport(
        cn=nan_mean([r.cn for r in reports]),
        aod_mean=nan_mean([r.aod_mean for r in reports]),
        aod_normstd=_nan_normstd([r.aod_mean for r in reports]),
        cr=nan_mean([r.cr for r in reports]),
        csize_mean=nan_mean([r.csize_mean for r in reports]),
        csize_normstd=_nan_normstd([r.csize_mean for r in reports]),
        nclusters=nan_mean([float(r.nclusters) for r in reports]),
        msg_chad=nan_mean([float(r.msg_chad) for r in reports]),
        msg_jreq=nan_mean([float(r.msg_jreq) for r in reports]),
        msg_per_node=nan_mean([r.msg_per_node for r in reports]),
        term_time=nan_mean([r.term_time for r in reports]),
    )


def report_fields() -> list[str]:
    return [f.name for f in fields(MetricsReport)]
