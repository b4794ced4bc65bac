"""Random geometric (unit-disk) network graphs and hop-distance queries."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .config import SimConfig, avg_node_degree, tx_range_for_degree  # noqa: F401

__all__ = [
    "Topology",
    "generate_topology",
    "topology_from_positions",
    "bfs_hops",
    "tx_range_for_degree",
    "avg_node_degree",
]


@dataclass(frozen=True, eq=False)
class Topology:
    """Immutable unit-disk graph over node positions in [0, side]^2.

    Nodes u != v are neighbors iff their euclidean distance is <= tx_range
    (ties at exactly tx_range count as connected). Links are bidirectional
    by construction.
    """

    positions: np.ndarray  # shape (n, 2)
    adjacency: tuple[tuple[int, ...], ...]  # sorted neighbor ids per node
    tx_range: float
    side: float
    wrap: bool = False

    @property
    def n(self) -> int:
        return len(self.adjacency)

    @property
    def avg_degree(self) -> float:
        """Measured mean neighbor count."""
        return sum(len(a) for a in self.adjacency) / self.n

    def degree(self, node: int) -> int:
        return len(self.adjacency[node])

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        return len(bfs_hops(self, 0, self.n)) == self.n


def topology_from_positions(
    positions: np.ndarray, tx_range: float, side: float, wrap: bool = False
) -> Topology:
    """Build the unit-disk adjacency for explicit node positions."""
    pos = np.asarray(positions, dtype=float)
    n = len(pos)
    neighbors: list[list[int]] = [[] for _ in range(n)]
    if n > 1:
        tree = cKDTree(pos, boxsize=side if wrap else None)
        pairs = sorted(map(tuple, tree.query_pairs(tx_range, output_type="ndarray").tolist()))
        for u, v in pairs:
            neighbors[u].append(v)
            neighbors[v].append(u)
    adjacency = tuple(tuple(sorted(a)) for a in neighbors)
    return Topology(pos, adjacency, float(tx_range), float(side), wrap)


def generate_topology(config: SimConfig, rng: np.random.Generator) -> Topology:
    """Place n nodes i.i.d. uniform on the square and wire the unit-disk graph.

    Deterministic given the generator state. When `wrap_area` is set the
    distance metric is toroidal; default is a bounded square, so boundary
    truncation lowers the measured degree below the target.
    """
    positions = rng.uniform(0.0, config.l, size=(config.n, 2))
    return topology_from_positions(positions, config.tx_range, config.l, config.wrap_area)


def bfs_hops(topology: Topology, source: int, max_hops: int) -> dict[int, int]:
    """Hop distances from `source`, restricted to nodes within `max_hops`.

    The source maps to 0; unreachable or too-distant nodes are absent.
    """
    if not 0 <= source < topology.n:
        raise ValueError(f"source {source} out of range")
    dist = {source: 0}
    queue = deque([source])
    adjacency = topology.adjacency
    while queue:
        u = queue.popleft()
        d = dist[u]
        if d >= max_hops:
            continue
        for v in adjacency[u]:
            if v not in dist:
                dist[v] = d + 1
                queue.append(v)
    return dist
