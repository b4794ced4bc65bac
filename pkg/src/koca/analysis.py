"""Closed-form predictors for cluster size, overlap, and message overhead.

All formulas model a cluster as a disk of radius R = k*Tr centered on its
head over a uniform deployment, so they are upper bounds on the simulated
quantities: real clusters are hop-limited balls clipped by the area
boundary.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from scipy.integrate import quad

from .config import avg_node_degree, tx_range_for_degree  # noqa: F401  (re-export)

__all__ = [
    "avg_node_degree",
    "tx_range_for_degree",
    "cluster_inclusion_prob",
    "expected_cluster_size",
    "cluster_size_cov",
    "ring_population",
    "expected_chad_msgs",
    "expected_jreq_msgs",
    "overhead",
    "intersection_area",
    "expected_intersection_area",
    "aod_predicted",
    "expected_adjacent_clusters",
    "AnalyticalReport",
    "analytical_report",
]


def cluster_inclusion_prob(d: float, k: int, n: int) -> float:
    """Probability a uniform node falls inside one cluster disk: d*k^2/n."""
    if d <= 0 or k < 1 or n < 1:
        raise ValueError("need d > 0, k >= 1, n >= 1")
    pc = d * k * k / n
    if pc > 1.0:
        warnings.warn(
            f"inclusion probability d*k^2/n = {pc:.3f} clamped to 1", RuntimeWarning
        )
        return 1.0
    return pc


def expected_cluster_size(d: float, k: int) -> float:
    """Expected nodes per cluster: d*k^2."""
    if d <= 0 or k < 1:
        raise ValueError("need d > 0, k >= 1")
    return d * k * k


def cluster_size_cov(d: float, k: int, n: int) -> float:
    """Coefficient of variation of the binomial cluster-size model."""
    pc = cluster_inclusion_prob(d, k, n)
    return math.sqrt((1.0 - pc) / (n * pc))


def ring_population(d: float, k: int) -> float:
    """Expected nodes exactly k hops from the head: d*(2k - 1)."""
    if k < 1:
        raise ValueError("need k >= 1")
    return d * (2 * k - 1)


def expected_chad_msgs(d: float, k: int) -> float:
    """Advertisement broadcasts per cluster: the non-leaf nodes of the
    flood tree, 1 + d*(k-1)^2."""
    if k < 1:
        raise ValueError("need k >= 1")
    return 1.0 + d * (k - 1) ** 2


def expected_jreq_msgs(d: float, k: int) -> float:
    """Join-request hops per cluster without aggregation: d*k*(4k-1)*(k+1)/6.

    Also computed as the explicit sum of i * ring_population(d, i); the two
    must agree, which guards the closed form.
    """
    if k < 1:
        raise ValueError("need k >= 1")
    closed = d * k * (4 * k - 1) * (k + 1) / 6.0
    explicit = sum(i * ring_population(d, i) for i in range(1, k + 1))
    assert math.isclose(closed, explicit, rel_tol=0, abs_tol=1e-9 * max(1.0, closed))
    return closed


def overhead(d: float, p: float, k: int, n: int) -> dict[str, float]:
    """Message totals per cluster, for the network, and per node."""
    per_cluster = expected_chad_msgs(d, k) + expected_jreq_msgs(d, k)
    network = per_cluster * n * p
    return {
        "per_cluster": per_cluster,
        "network": network,
        "per_node": network / n,
    }


def intersection_area(R: float, w: float) -> float:
    """Area of the lens between two radius-R circles with centers w apart."""
    if R <= 0:
        raise ValueError("need R > 0")
    if w < 0:
        raise ValueError("center distance cannot be negative")
    if w >= 2 * R:
        return 0.0
    theta = math.acos(w / (2 * R))
    return (2 * theta - math.sin(2 * theta)) * R * R


def expected_intersection_area(R: float) -> float:
    """Mean lens area over center distances distributed as w/(2R^2) on [0, 2R].

    Evaluated by adaptive quadrature rather than a closed form so the
    pi*R^2/4 identity check stays meaningful.
    """
    if R <= 0:
        raise ValueError("need R > 0")
    value, _err = quad(
        lambda w: intersection_area(R, w) * w / (2 * R * R),
        0.0,
        2 * R,
        epsabs=1e-9,
        epsrel=1e-12,
        limit=200,
    )
    return value


def aod_predicted(d: float, k: int) -> float:
    """Expected overlap degree between two overlapping clusters: d*k^2/4."""
    return expected_cluster_size(d, k) / 4.0


def expected_adjacent_clusters(n: int, p: float, d: float, k: int) -> dict[str, float]:
    """Expected count of clusters adjacent to a given one.

    exact      P_2R * (n*p - 1) with P_2R = pi*(2R)^2/l^2 = 4*d*k^2/n
    simplified n*p*P_2R = 4*p*d*k^2
    """
    if n < 1 or d <= 0 or k < 1 or not 0 <= p <= 1:
        raise ValueError("invalid inputs")
    p2r = 4.0 * d * k * k / n
    if p2r > 1.0:
        warnings.warn(f"adjacency probability {p2r:.3f} clamped to 1", RuntimeWarning)
        p2r = 1.0
    return {
        "exact": p2r * (n * p - 1),
        "simplified": 4.0 * p * d * k * k,
    }


@dataclass(frozen=True)
class AnalyticalReport:
    """All predictors for one parameter point."""

    p_c: float
    expected_cluster_size: float
    ring_pop_k: float
    m_chad: float
    m_jreq: float
    m_cluster: float
    m_network: float
    m_node: float
    aod: float
    expected_adjacent: float


def analytical_report(n: int, p: float, d: float, k: int) -> AnalyticalReport:
    m_chad = expected_chad_msgs(d, k)
    m_jreq = expected_jreq_msgs(d, k)
    oh = overhead(d, p, k, n)
    return AnalyticalReport(
        p_c=cluster_inclusion_prob(d, k, n),
        expected_cluster_size=expected_cluster_size(d, k),
        ring_pop_k=ring_population(d, k),
        m_chad=m_chad,
        m_jreq=m_jreq,
        m_cluster=m_chad + m_jreq,
        m_network=oh["network"],
        m_node=oh["per_node"],
        aod=aod_predicted(d, k),
        expected_adjacent=expected_adjacent_clusters(n, p, d, k)["exact"],
    )
