"""SINR, stepwise per-channel capacity, and per-user wireless access capacity.

Reference implementations over immutable inputs; pure functions, safe for
parallel evaluation.  The game engine keeps its own vectorized fast path and
is tested against these.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Iterable, Optional

__all__ = [
    "EfficiencyTable",
    "StrategyProfile",
    "InfeasibleProfileError",
    "build_efficiency_table",
    "sinr",
    "channel_capacity",
    "access_capacity",
    "interference_free_range_m",
]


class InfeasibleProfileError(ValueError):
    """A strategy profile violates single-serving or channel exclusivity."""


@dataclass(frozen=True)
class EfficiencyTable:
    """Stepwise SINR -> spectral-efficiency map.

    ``thresholds[m]`` is the linear SINR above which ``efficiencies[m]`` is
    achieved; a value exactly equal to a threshold takes the lower step.
    """

    thresholds: tuple[float, ...]
    efficiencies: tuple[float, ...]
    bandwidth_mhz: float = 1.0

    def __post_init__(self) -> None:
        if len(self.thresholds) != len(self.efficiencies) or not self.thresholds:
            raise ValueError("thresholds and efficiencies must be nonempty and aligned")
        if any(b <= a for a, b in zip(self.thresholds, self.thresholds[1:])):
            raise ValueError("thresholds must be strictly increasing")

    def efficiency_for(self, sinr_linear: float) -> float:
        """Spectral efficiency (bit/s/Hz) at the given linear SINR; 0 below the first step."""
        idx = bisect_left(self.thresholds, sinr_linear)
        return 0.0 if idx == 0 else self.efficiencies[idx - 1]


def build_efficiency_table(efficiencies: Iterable[float], bandwidth_mhz: float = 1.0) -> EfficiencyTable:
    """Invert the AWGN capacity law: threshold for efficiency eta is 2**eta - 1."""
    effs = tuple(float(e) for e in efficiencies)
    if not effs or effs[0] <= 0 or any(b <= a for a, b in zip(effs, effs[1:])):
        raise ValueError("efficiencies must be positive and strictly ascending")
    thresholds = tuple(2.0 ** e - 1.0 for e in effs)
    return EfficiencyTable(thresholds=thresholds, efficiencies=effs, bandwidth_mhz=bandwidth_mhz)


def interference_free_range_m(radio, efficiency: Optional[float] = None) -> float:
    """Distance at which full power reaches an efficiency step with no interference.

    Defaults to the top step; this is the coverage limit used by the
    all-in-range association policy.
    """
    eta = radio.efficiency_steps[-1] if efficiency is None else efficiency
    target = 2.0 ** eta - 1.0
    return (radio.max_power_mw / (radio.noise_mw * target)) ** (1.0 / radio.path_loss_gamma)


@dataclass
class StrategyProfile:
    """Sparse per-(user, node, channel) integer power levels.

    Only positive levels are stored.  A feasible profile satisfies
    single-serving (each user powered at no more than one node) and channel
    exclusivity (each (node, channel) powered by at most one user).
    """

    levels: dict[tuple[int, int, int], int] = field(default_factory=dict)

    @classmethod
    def empty(cls) -> "StrategyProfile":
        return cls(levels={})

    def level(self, user: int, node: int, channel: int) -> int:
        return self.levels.get((user, node, channel), 0)

    def set_level(self, user: int, node: int, channel: int, level: int) -> None:
        key = (user, node, channel)
        if level:
            self.levels[key] = level
        else:
            self.levels.pop(key, None)

    def node_power_level(self, node: int, channel: int) -> int:
        return sum(q for (i, j, r), q in self.levels.items() if j == node and r == channel)

    def serving_node(self, user: int) -> Optional[int]:
        nodes = {j for (i, j, r), q in self.levels.items() if i == user and q > 0}
        if len(nodes) > 1:
            raise InfeasibleProfileError(f"user {user} powered at nodes {sorted(nodes)}")
        return next(iter(nodes)) if nodes else None

    def user_channels(self, user: int, node: int) -> tuple[int, ...]:
        return tuple(sorted(r for (i, j, r), q in self.levels.items() if i == user and j == node))

    def total_level(self) -> int:
        return sum(self.levels.values())

    def copy(self) -> "StrategyProfile":
        return StrategyProfile(levels=dict(self.levels))

    def validate(self, scenario) -> None:
        """Raise InfeasibleProfileError / ValueError on any invariant violation."""
        q_max = scenario.radio.power_levels_q
        owners: dict[tuple[int, int], int] = {}
        for (i, j, r), q in self.levels.items():
            if not (0 <= i < scenario.n_users and 0 <= j < scenario.n_nodes):
                raise ValueError(f"profile entry ({i}, {j}, {r}) out of range")
            if not 1 <= q <= q_max:
                raise ValueError(f"level {q} at ({i}, {j}, {r}) outside 1..{q_max}")
            if j not in scenario.candidate_nodes[i]:
                raise InfeasibleProfileError(f"node {j} not a candidate for user {i}")
            if r not in scenario.nodes[j].channels:
                raise InfeasibleProfileError(f"channel {r} not available at node {j}")
            held = owners.setdefault((j, r), i)
            if held != i:
                raise InfeasibleProfileError(f"channel {r} at node {j} shared by users {held} and {i}")
        for i in range(scenario.n_users):
            self.serving_node(i)


def sinr(profile: StrategyProfile, scenario, user: int, node: int, channel: int) -> float:
    """Linear SINR of (user, node, channel) under the given profile; 0 if unpowered."""
    if not (0 <= user < scenario.n_users and 0 <= node < scenario.n_nodes):
        raise IndexError("user or node index out of range")
    if node not in scenario.candidate_nodes[user]:
        raise ValueError(f"node {node} not a candidate for user {user}")
    if channel not in scenario.nodes[node].channels:
        raise ValueError(f"channel {channel} not available at node {node}")
    if profile.level(user, node, channel) == 0:
        return 0.0
    radio = scenario.radio
    scale = radio.max_power_mw / radio.power_levels_q
    gains = scenario.gains[user]
    signal = profile.node_power_level(node, channel) * scale * gains[node]
    interference = sum(
        profile.node_power_level(k, channel) * scale * gains[k]
        for k in range(scenario.n_nodes)
        if k != node
    )
    return signal / (radio.noise_mw + interference)


def channel_capacity(sinr_linear: float, table: EfficiencyTable,
                     bandwidth_mhz: Optional[float] = None) -> float:
    """Capacity in Mbps of one channel: stepwise efficiency times bandwidth."""
    w = table.bandwidth_mhz if bandwidth_mhz is None else bandwidth_mhz
    return table.efficiency_for(sinr_linear) * w


def access_capacity(profile: StrategyProfile, scenario, user: int, node: int,
                    table: Optional[EfficiencyTable] = None) -> float:
    """Wireless access capacity of a user at a node: sum over the node's channels."""
    radio = scenario.radio
    if table is None:
        table = build_efficiency_table(radio.efficiency_steps, radio.channel_bandwidth_mhz)
    return sum(
        channel_capacity(sinr(profile, scenario, user, node, r), table)
        for r in scenario.nodes[node].channels
    )
