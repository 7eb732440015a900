"""Evaluation quantities: network utility, fairness, blocking, complexity bounds."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

__all__ = [
    "MetricRecord",
    "network_utility",
    "total_capacity",
    "jain_index",
    "blocking_probability",
    "complexity_bound",
]


@dataclass(frozen=True)
class MetricRecord:
    nu: float                   # sum of ln(1 + c_i), c_i in Mbps
    total_capacity_mbps: float
    blocking_prob: float        # fraction of users with zero actual capacity
    jain: float                 # NaN when no user carries traffic
    rounds: int
    converged: bool


def _check_caps(caps: Sequence[float]) -> None:
    if any(c < 0 for c in caps):
        raise ValueError("capacities must be nonnegative")


def network_utility(actual_caps: Sequence[float]) -> float:
    """Proportional-fairness objective: sum of ln(1 + c_i)."""
    _check_caps(actual_caps)
    return sum(math.log1p(c) for c in actual_caps)


def total_capacity(actual_caps: Sequence[float]) -> float:
    _check_caps(actual_caps)
    return float(sum(actual_caps))


def jain_index(caps: Sequence[float]) -> float:
    """Fairness index (sum c)^2 / (n * sum c^2); 1 means perfectly even.

    Blocked users count in n.  With no traffic at all the index is undefined
    and NaN is returned as the distinguished no-traffic value.
    """
    if not caps:
        raise ValueError("jain_index needs at least one user")
    _check_caps(caps)
    square_sum = sum(c * c for c in caps)
    if square_sum == 0.0:
        return float("nan")
    total = sum(caps)
    return (total * total) / (len(caps) * square_sum)


def blocking_probability(caps: Sequence[float]) -> float:
    """Fraction of users whose capacity is exactly zero."""
    if not caps:
        raise ValueError("blocking_probability needs at least one user")
    _check_caps(caps)
    return sum(1 for c in caps if c == 0.0) / len(caps)


def complexity_bound(game_kind: str, m_max_nodes: int, n_users: int,
                     n_channels: int, q_levels: int) -> int:
    """Worst-case per-round operation count of one game.

    User game: m * N**2 * R * Q**R; channel game: m * N**2 * R**2 * Q, where m
    is the largest candidate-node set, N the user count, R the channel count
    and Q the number of nonzero power levels.  Exact integer arithmetic.
    """
    if min(m_max_nodes, n_users, n_channels, q_levels) < 1:
        raise ValueError("all arguments must be >= 1")
    kind = game_kind.lower()
    if kind == "u":
        return m_max_nodes * n_users**2 * n_channels * q_levels**n_channels
    if kind == "c":
        return m_max_nodes * n_users**2 * n_channels**2 * q_levels
    raise ValueError(f"unknown game kind {game_kind!r}")
