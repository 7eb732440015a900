"""Max-min fair sharing of each backhaul cluster's capacity.

Per cluster, the wireless access capacities are turned into actual capacities
by maximizing sum(ln(1 + c_i)) subject to c_i <= access_i and sum(c_i) <= C_z.
The solution is the max-min fair allocation, computed by a single pass over
the demands in nondecreasing order: each position gets its demand or an equal
share of what is left, whichever is smaller.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

__all__ = ["ClusterDemand", "AllocationResult", "allocate_cluster", "allocate_all"]


@dataclass(frozen=True)
class ClusterDemand:
    """Positive access-capacity demands of one cluster."""

    cluster_id: int
    entries: tuple[tuple[int, int, float], ...]  # (user, node, access_capacity_mbps)
    capacity_mbps: float

    def __post_init__(self) -> None:
        if self.capacity_mbps <= 0:
            raise ValueError("cluster capacity must be positive")
        if any(cap <= 0 for _, _, cap in self.entries):
            raise ValueError("demand entries must have positive access capacity")


@dataclass(frozen=True)
class AllocationResult:
    actual: tuple[float, ...]           # per user, 0 for unserved/blocked users
    cluster_totals: dict[int, float]    # allocated Mbps per cluster id


def allocate_sorted(caps_sorted: Sequence[float], capacity: float) -> list[float]:
    """Water-fill over demands already sorted nondecreasing."""
    n = len(caps_sorted)
    out = []
    used = 0.0
    for k in range(n):
        share = max(0.0, (capacity - used) / (n - k))
        c = min(caps_sorted[k], share)
        out.append(c)
        used += c
    return out


def allocate_sorted_batch(caps_sorted: np.ndarray, capacity) -> np.ndarray:
    """Row-wise water-fill; ``caps_sorted`` is (batch, n) sorted along axis 1.

    ``capacity`` may be a scalar or a (batch,) vector.  Zero-demand entries are
    neutral: they receive 0 and leave every other allocation unchanged.
    """
    batch, n = caps_sorted.shape
    out = np.empty_like(caps_sorted)
    used = np.zeros(batch, dtype=np.float64)
    for k in range(n):
        share = np.maximum(0.0, (capacity - used) / (n - k))
        c = np.minimum(caps_sorted[:, k], share)
        out[:, k] = c
        used += c
    return out


def allocate_cluster(access_caps: Sequence[float], capacity: float) -> list[float]:
    """Actual capacities for one cluster, in the caller's original order.

    Ties between equal demands are broken by input position (stable sort), but
    the result is the same multiset either way.
    """
    if capacity <= 0:
        raise ValueError("capacity must be positive")
    caps = [float(c) for c in access_caps]
    if any(c < 0 for c in caps):
        raise ValueError("access capacities must be nonnegative")
    order = sorted(range(len(caps)), key=lambda k: caps[k])
    alloc_sorted = allocate_sorted([caps[k] for k in order], capacity)
    out = [0.0] * len(caps)
    for pos, k in enumerate(order):
        out[k] = alloc_sorted[pos]
    return out


def allocate_all(scenario, serving_nodes: Sequence[Optional[int]],
                 access_caps: Sequence[float]) -> AllocationResult:
    """Apply the per-cluster allocation across the whole network.

    ``serving_nodes[i]`` is user i's serving node (None if unserved) and
    ``access_caps[i]`` its wireless access capacity.  Users with zero access
    capacity get zero actual capacity.  Clusters are independent.
    """
    if len(serving_nodes) != scenario.n_users or len(access_caps) != scenario.n_users:
        raise ValueError("need one serving node and one access capacity per user")
    by_cluster: dict[int, list[int]] = {}
    for i, node in enumerate(serving_nodes):
        if node is None:
            continue
        if not 0 <= node < scenario.n_nodes:
            raise ValueError(f"user {i} mapped to unknown node {node}")
        if access_caps[i] < 0:
            raise ValueError("access capacities must be nonnegative")
        if access_caps[i] > 0:
            by_cluster.setdefault(scenario.nodes[node].cluster, []).append(i)

    actual = [0.0] * scenario.n_users
    totals = {c.id: 0.0 for c in scenario.clusters}
    for cluster_id, members in by_cluster.items():
        capacity = scenario.cluster_by_id(cluster_id).capacity_mbps
        alloc = allocate_cluster([access_caps[i] for i in members], capacity)
        for i, c in zip(members, alloc):
            actual[i] = c
        totals[cluster_id] = float(sum(alloc))
    return AllocationResult(actual=tuple(actual), cluster_totals=totals)
