"""Brute-force verifiers independent of the protocol and metrics code.

These work only from the topology and final membership, re-deriving hop
distances with their own breadth-first searches, so they can referee the
simulator without sharing its code paths.
"""

from __future__ import annotations

import math
from collections import deque
from itertools import combinations
from typing import Iterable

import numpy as np

from .metrics import ClusterView
from .topology import Topology

__all__ = [
    "SizeLimit",
    "verify_coverage",
    "verify_overlap_condition",
    "verify_connectivity",
    "exhaustive_mkds",
    "monte_carlo_intersection",
    "khop_members",
]

MKDS_MAX_NODES = 15


class SizeLimit(ValueError):
    """Instance too large for exhaustive search."""


def _multi_source_hops(topology: Topology, sources: Iterable[int]) -> dict[int, int]:
    dist = {s: 0 for s in sources}
    queue = deque(dist)
    adjacency = topology.adjacency
    while queue:
        u = queue.popleft()
        d = dist[u] + 1
        for v in adjacency[u]:
            if v not in dist:
                dist[v] = d
                queue.append(v)
    return dist


def verify_coverage(
    topology: Topology, ch_set: Iterable[int], k: int
) -> tuple[bool, int | None]:
    """Is every node within k hops of some head? Returns (ok, witness).

    The witness is the lowest-id uncovered node when coverage fails.
    """
    heads = set(ch_set)
    if not heads:
        return (topology.n == 0, 0 if topology.n else None)
    dist = _multi_source_hops(topology, heads)
    for v in range(topology.n):
        if dist.get(v, math.inf) > k:
            return False, v
    return True, None


def verify_overlap_condition(view: ClusterView, o: int) -> bool:
    """Every head has at least one partner sharing >= o members.

    Vacuously true with a single cluster.
    """
    heads = view.heads
    if len(heads) <= 1:
        return True
    for a in heads:
        ma = view.members[a]
        if not any(len(ma & view.members[b]) >= o for b in heads if b != a):
            return False
    return True


def verify_connectivity(view: ClusterView) -> bool:
    """Is the overlap graph on heads a single connected component?"""
    heads = view.heads
    if not heads:
        return False
    member_sets = view.members
    seen = {heads[0]}
    stack = [heads[0]]
    while stack:
        u = stack.pop()
        mu = member_sets[u]
        for v in heads:
            if v not in seen and mu & member_sets[v]:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(heads)


def exhaustive_mkds(topology: Topology, k: int) -> int:
    """Smallest k-dominating set size by subset enumeration.

    Guarded to n <= 15; candidates are tried in increasing cardinality,
    lexicographic order, stopping at the first cover.
    """
    n = topology.n
    if n > MKDS_MAX_NODES:
        raise SizeLimit(f"exhaustive search limited to {MKDS_MAX_NODES} nodes, got {n}")
    balls = []  # bitmask of nodes within k hops of each node
    for u in range(n):
        mask = 0
        for v in _ball(topology, u, k):
            mask |= 1 << v
        balls.append(mask)
    full = (1 << n) - 1
    for size in range(1, n + 1):
        for subset in combinations(range(n), size):
            cover = 0
            for u in subset:
                cover |= balls[u]
            if cover == full:
                return size
    return n  # unreachable: the full vertex set always covers


def _ball(topology: Topology, source: int, k: int) -> list[int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        if dist[u] >= k:
            continue
        for v in topology.adjacency[u]:
            if v not in dist:
                dist[v] = dist[u] + 1
                queue.append(v)
    return list(dist)


def khop_members(topology: Topology, head: int, k: int) -> frozenset[int]:
    """Closed k-hop neighborhood of a head, recomputed by plain BFS."""
    return frozenset(_ball(topology, head, k))


def monte_carlo_intersection(
    R: float, w: float, samples: int, rng: np.random.Generator
) -> tuple[float, float]:
    """Two-circle lens area by rejection sampling; returns (estimate, stderr).

    Samples the bounding box of the two radius-R disks centered at (0, 0)
    and (w, 0).
    """
    if R <= 0 or w < 0 or samples < 1:
        raise ValueError("need R > 0, w >= 0, samples >= 1")
    x = rng.uniform(-R, w + R, size=samples)
    y = rng.uniform(-R, R, size=samples)
    r2 = R * R
    inside = (x * x + y * y < r2) & ((x - w) ** 2 + y * y < r2)
    box = (w + 2 * R) * (2 * R)
    phat = inside.mean()
    estimate = phat * box
    stderr = box * math.sqrt(phat * (1.0 - phat) / samples)
    return estimate, stderr
