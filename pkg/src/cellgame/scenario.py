"""World model: access nodes, users, channels, backhaul clusters, radio constants.

A :class:`Scenario` is an immutable description of one network instance.  It can
be sampled randomly (reproducibly, from a :class:`ScenarioSpec` and a seed) or
loaded from a JSON file.  All units are fixed network-wide: mW for power,
meters for distance, MHz for channel bandwidth, Mbps for capacity, and linear
ratios for gains and SINR.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .radio import interference_free_range_m

__all__ = [
    "RadioConfig",
    "AccessNode",
    "BackhaulCluster",
    "Scenario",
    "ScenarioSpec",
    "ScenarioFormatError",
    "ScenarioValidationError",
    "NODE_PRESET_GRID",
    "NODE_PRESET_OFFSET",
    "dbm_to_milliwatts",
    "channel_gain",
    "candidate_nodes",
    "sample_scenario",
    "scenario_1_spec",
    "scenario_2_spec",
    "save_scenario",
    "load_scenario",
]


class ScenarioFormatError(ValueError):
    """A scenario file does not match the expected document structure."""


class ScenarioValidationError(ValueError):
    """Scenario contents violate a model invariant (e.g. stale gains)."""


def dbm_to_milliwatts(dbm: float) -> float:
    return 10.0 ** (dbm / 10.0)


# Four-node layouts for a 200 x 200 m area.  GRID is the equispaced square;
# OFFSET is an alternate layout with the second node pulled to the center of
# the lower edge.
NODE_PRESET_GRID = ((50.0, 50.0), (150.0, 50.0), (50.0, 150.0), (150.0, 150.0))
NODE_PRESET_OFFSET = ((50.0, 50.0), (100.0, 50.0), (50.0, 150.0), (150.0, 150.0))


@dataclass(frozen=True)
class RadioConfig:
    """Physical-layer constants shared by every node in a scenario.

    max_power_mw:          per-channel transmit power at the top level (mW)
    power_levels_q:        number Q of nonzero power levels; levels are
                           {0, 1, ..., Q} scaled by max_power_mw / Q
    noise_mw:              background noise power (mW)
    path_loss_gamma:       path loss exponent
    channel_bandwidth_mhz: bandwidth of one channel (MHz)
    efficiency_steps:      ascending spectral efficiencies (bit/s/Hz)
    sinr_alpha:            minimum linear SINR for a successful transmission
    min_distance_m:        distances are clamped to this before the gain law
    """

    max_power_mw: float = 100.0  # 20 dBm
    power_levels_q: int = 4
    noise_mw: float = dbm_to_milliwatts(-105.0)
    path_loss_gamma: float = 4.5
    channel_bandwidth_mhz: float = 1.0
    efficiency_steps: tuple[float, ...] = (1.0, 1.5, 2.0, 3.0, 4.0, 4.5, 6.0)
    sinr_alpha: float = 1.0  # 0 dB
    min_distance_m: float = 1.0

    def __post_init__(self) -> None:
        if self.power_levels_q < 1:
            raise ValueError("power_levels_q must be >= 1")
        if self.max_power_mw <= 0 or self.noise_mw <= 0:
            raise ValueError("powers must be positive")
        if self.path_loss_gamma <= 0:
            raise ValueError("path_loss_gamma must be positive")
        if self.min_distance_m <= 0:
            raise ValueError("min_distance_m must be positive")
        if not self.efficiency_steps:
            raise ValueError("efficiency_steps must be nonempty")
        steps = self.efficiency_steps
        if steps[0] <= 0 or any(b <= a for a, b in zip(steps, steps[1:])):
            raise ValueError("efficiency_steps must be positive and strictly increasing")

    def alpha_matches_lowest_efficiency(self, rel_tol: float = 1e-9) -> bool:
        """Consistency check (not enforced): alpha == 2**eta_1 - 1."""
        return math.isclose(self.sinr_alpha, 2.0 ** self.efficiency_steps[0] - 1.0, rel_tol=rel_tol)


@dataclass(frozen=True)
class AccessNode:
    position: tuple[float, float]
    channels: tuple[int, ...]
    cluster: int


@dataclass(frozen=True)
class BackhaulCluster:
    id: int
    capacity_mbps: float


def channel_gain(distance_m: float, gamma: float, min_distance_m: float) -> float:
    """Linear channel gain max(d, d_min)**(-gamma) at distance d."""
    if not (math.isfinite(distance_m) and math.isfinite(gamma) and math.isfinite(min_distance_m)):
        raise ValueError("channel_gain inputs must be finite")
    if distance_m < 0:
        raise ValueError("distance_m must be nonnegative")
    if gamma <= 0 or min_distance_m <= 0:
        raise ValueError("gamma and min_distance_m must be positive")
    return max(distance_m, min_distance_m) ** (-gamma)


@dataclass(frozen=True)
class Scenario:
    """Immutable network instance.

    ``gains[i][j]`` is the linear gain from node j to user i and must equal
    ``channel_gain(distance(i, j), gamma, min_distance)``; ``candidate_nodes[i]``
    is the set M_i of nodes allowed to serve user i under ``candidate_policy``.
    Safe to share read-only across parallel workers.
    """

    nodes: tuple[AccessNode, ...]
    users: tuple[tuple[float, float], ...]
    channels: tuple[int, ...]
    clusters: tuple[BackhaulCluster, ...]
    gains: tuple[tuple[float, ...], ...]
    candidate_nodes: tuple[tuple[int, ...], ...]
    radio: RadioConfig
    candidate_policy: str = "all-in-range"
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        cluster_ids = [c.id for c in self.clusters]
        if len(set(cluster_ids)) != len(cluster_ids):
            raise ScenarioValidationError("duplicate cluster ids")
        for c in self.clusters:
            if c.capacity_mbps <= 0:
                raise ScenarioValidationError(f"cluster {c.id} capacity must be positive")
        chan_set = set(self.channels)
        id_set = set(cluster_ids)
        for j, node in enumerate(self.nodes):
            if node.cluster not in id_set:
                raise ScenarioValidationError(f"node {j} references unknown cluster {node.cluster}")
            if not set(node.channels) <= chan_set:
                raise ScenarioValidationError(f"node {j} channels not a subset of the global set")
        if len(self.gains) != len(self.users):
            raise ScenarioValidationError("gains must have one row per user")
        for i, row in enumerate(self.gains):
            if len(row) != len(self.nodes):
                raise ScenarioValidationError(f"gains[{i}] must have one column per node")
        if len(self.candidate_nodes) != len(self.users):
            raise ScenarioValidationError("candidate_nodes must have one entry per user")
        for i, cand in enumerate(self.candidate_nodes):
            if any(j < 0 or j >= len(self.nodes) for j in cand):
                raise ScenarioValidationError(f"candidate_nodes[{i}] out of range")

    @property
    def n_users(self) -> int:
        return len(self.users)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def distance(self, user: int, node: int) -> float:
        ux, uy = self.users[user]
        nx, ny = self.nodes[node].position
        return math.hypot(ux - nx, uy - ny)

    def cluster_by_id(self, cluster_id: int) -> BackhaulCluster:
        for c in self.clusters:
            if c.id == cluster_id:
                return c
        raise KeyError(cluster_id)

    def recomputed_gains(self) -> tuple[tuple[float, ...], ...]:
        r = self.radio
        return tuple(
            tuple(
                channel_gain(self.distance(i, j), r.path_loss_gamma, r.min_distance_m)
                for j in range(self.n_nodes)
            )
            for i in range(self.n_users)
        )

    def validate_gains(self, rel_tol: float = 1e-12) -> None:
        """Raise if the stored gain matrix disagrees with the positions."""
        for i, (row, ref_row) in enumerate(zip(self.gains, self.recomputed_gains())):
            for j, (g, ref) in enumerate(zip(row, ref_row)):
                if not math.isclose(g, ref, rel_tol=rel_tol, abs_tol=0.0):
                    raise ScenarioValidationError(
                        f"gains[{i}][{j}] = {g!r} inconsistent with positions (expected {ref!r})"
                    )


def candidate_nodes(scenario: Scenario, user: int, policy: str) -> tuple[int, ...]:
    """Candidate serving set M_i for one user.

    ``nearest-1`` returns the single closest node (lowest index on ties);
    ``all-in-range`` returns every node within the full-power interference-free
    coverage range (the distance at which the top efficiency step is still
    reachable).  May be empty for out-of-coverage users.
    """
    if policy == "nearest-1":
        dists = [scenario.distance(user, j) for j in range(scenario.n_nodes)]
        if not dists:
            return ()
        return (min(range(len(dists)), key=lambda j: (dists[j], j)),)
    if policy == "all-in-range":
        limit = interference_free_range_m(scenario.radio)
        return tuple(j for j in range(scenario.n_nodes) if scenario.distance(user, j) <= limit)
    raise ValueError(f"unknown association policy {policy!r}")


@dataclass(frozen=True)
class ScenarioSpec:
    """Recipe for random instances: area, node layout, channel pool, backhaul."""

    n_users: int
    area_m: tuple[float, float] = (200.0, 200.0)
    node_positions: tuple[tuple[float, float], ...] = NODE_PRESET_GRID
    n_channels: int = 8
    node_channel_range: tuple[int, int] = (3, 7)
    cluster_capacity_choices: tuple[float, ...] = (10.0, 20.0, 30.0)
    radio: RadioConfig = RadioConfig()
    association_policy: str = "all-in-range"

    def __post_init__(self) -> None:
        if self.n_users < 0:
            raise ValueError("n_users must be nonnegative")
        if not self.cluster_capacity_choices:
            raise ValueError("cluster_capacity_choices must be nonempty")
        lo, hi = self.node_channel_range
        if not (1 <= lo <= hi <= self.n_channels):
            raise ValueError("node_channel_range must satisfy 1 <= lo <= hi <= n_channels")
        if not self.node_positions:
            raise ValueError("node_positions must be nonempty")


def scenario_1_spec(n_users: int, policy: str = "all-in-range", **overrides) -> ScenarioSpec:
    """Dense preset: 8 channels, per-node subsets of 3..7, Q=4, 7 efficiency steps."""
    spec = ScenarioSpec(n_users=n_users, association_policy=policy)
    return replace(spec, **overrides) if overrides else spec


def scenario_2_spec(n_users: int, policy: str = "all-in-range", **overrides) -> ScenarioSpec:
    """Reduced preset for optimum comparisons: 3 channels at every node, Q=2."""
    spec = ScenarioSpec(
        n_users=n_users,
        n_channels=3,
        node_channel_range=(3, 3),
        radio=RadioConfig(power_levels_q=2),
        association_policy=policy,
    )
    return replace(spec, **overrides) if overrides else spec


def sample_scenario(spec: ScenarioSpec, seed: int) -> Scenario:
    """Draw one random instance; bit-identical for identical (spec, seed).

    Draw order (part of the reproducibility contract): user positions, then
    per node its channel-subset size and subset, then one capacity per cluster.
    Clusters are one per node (node j belongs to cluster j).
    """
    rng = np.random.default_rng(seed)
    w, h = spec.area_m
    users_arr = rng.uniform(low=(0.0, 0.0), high=(w, h), size=(spec.n_users, 2))
    users = tuple((float(x), float(y)) for x, y in users_arr)

    lo, hi = spec.node_channel_range
    nodes = []
    for j, pos in enumerate(spec.node_positions):
        size = int(rng.integers(lo, hi + 1))
        chans = tuple(sorted(int(c) for c in rng.choice(spec.n_channels, size=size, replace=False)))
        nodes.append(AccessNode(position=(float(pos[0]), float(pos[1])), channels=chans, cluster=j))

    clusters = tuple(
        BackhaulCluster(id=j, capacity_mbps=float(rng.choice(spec.cluster_capacity_choices)))
        for j in range(len(spec.node_positions))
    )

    r = spec.radio
    gains = tuple(
        tuple(
            channel_gain(math.hypot(u[0] - n.position[0], u[1] - n.position[1]),
                         r.path_loss_gamma, r.min_distance_m)
            for n in nodes
        )
        for u in users
    )

    scenario = Scenario(
        nodes=tuple(nodes),
        users=users,
        channels=tuple(range(spec.n_channels)),
        clusters=clusters,
        gains=gains,
        candidate_nodes=tuple(() for _ in users),
        radio=r,
        candidate_policy=spec.association_policy,
        seed=seed,
    )
    cands = tuple(candidate_nodes(scenario, i, spec.association_policy) for i in range(len(users)))
    return replace(scenario, candidate_nodes=cands)


# --- file round trip ---------------------------------------------------------

_RADIO_FIELDS = (
    "max_power_mw",
    "power_levels_q",
    "noise_mw",
    "path_loss_gamma",
    "channel_bandwidth_mhz",
    "efficiency_steps",
    "sinr_alpha",
    "min_distance_m",
)


def save_scenario(scenario: Scenario, path: str) -> None:
    doc = {
        "radio": {name: getattr(scenario.radio, name) for name in _RADIO_FIELDS},
        "nodes": [
            {"position": list(n.position), "channels": list(n.channels), "cluster": n.cluster}
            for n in scenario.nodes
        ],
        "users": [list(u) for u in scenario.users],
        "clusters": [{"id": c.id, "capacity_mbps": c.capacity_mbps} for c in scenario.clusters],
        "seed": scenario.seed,
        "channels": list(scenario.channels),
        "gains": [list(row) for row in scenario.gains],
        "candidate_policy": scenario.candidate_policy,
    }
    doc["radio"]["efficiency_steps"] = list(scenario.radio.efficiency_steps)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def _require(doc: dict, key: str, kind, where: str):
    if key not in doc:
        raise ScenarioFormatError(f"{where}: missing {key!r}")
    value = doc[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise ScenarioFormatError(f"{where}.{key}: expected a number")
        return float(value)
    if kind is int:
        if not isinstance(value, int) or isinstance(value, bool):
            raise ScenarioFormatError(f"{where}.{key}: expected an integer")
        return value
    if not isinstance(value, kind):
        raise ScenarioFormatError(f"{where}.{key}: expected {kind.__name__}")
    return value


def _number_list(values, where: str) -> list[float]:
    if not isinstance(values, list):
        raise ScenarioFormatError(f"{where}: expected a list")
    out = []
    for k, v in enumerate(values):
        if not isinstance(v, (int, float)) or isinstance(v, bool):
            raise ScenarioFormatError(f"{where}[{k}]: expected a number")
        out.append(float(v))
    return out


def load_scenario(path: str) -> Scenario:
    """Load and validate a scenario file; see ``save_scenario`` for the layout.

    Required top-level keys: radio, nodes, users, clusters, seed.  Optional:
    gains (validated against positions when present, recomputed otherwise) and
    candidate_policy.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioFormatError(f"$: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ScenarioFormatError("$: top level must be an object")

    radio_doc = _require(doc, "radio", dict, "$")
    radio_kwargs = {}
    for name in _RADIO_FIELDS:
        if name == "efficiency_steps":
            radio_kwargs[name] = tuple(_number_list(
                _require(radio_doc, name, list, "$.radio"), "$.radio.efficiency_steps"))
        elif name == "power_levels_q":
            radio_kwargs[name] = _require(radio_doc, name, int, "$.radio")
        else:
            radio_kwargs[name] = _require(radio_doc, name, float, "$.radio")
    try:
        radio = RadioConfig(**radio_kwargs)
    except ValueError as exc:
        raise ScenarioFormatError(f"$.radio: {exc}") from exc

    nodes_doc = _require(doc, "nodes", list, "$")
    nodes = []
    for j, nd in enumerate(nodes_doc):
        where = f"$.nodes[{j}]"
        if not isinstance(nd, dict):
            raise ScenarioFormatError(f"{where}: expected an object")
        pos = _number_list(_require(nd, "position", list, where), f"{where}.position")
        if len(pos) != 2:
            raise ScenarioFormatError(f"{where}.position: expected [x, y]")
        chans = _require(nd, "channels", list, where)
        if not all(isinstance(c, int) and not isinstance(c, bool) for c in chans):
            raise ScenarioFormatError(f"{where}.channels: expected integers")
        cluster = _require(nd, "cluster", int, where)
        nodes.append(AccessNode(position=(pos[0], pos[1]), channels=tuple(sorted(chans)), cluster=cluster))

    users_doc = _require(doc, "users", list, "$")
    users = []
    for i, ud in enumerate(users_doc):
        pos = _number_list(ud, f"$.users[{i}]")
        if len(pos) != 2:
            raise ScenarioFormatError(f"$.users[{i}]: expected [x, y]")
        users.append((pos[0], pos[1]))

    clusters_doc = _require(doc, "clusters", list, "$")
    clusters = []
    for k, cd in enumerate(clusters_doc):
        where = f"$.clusters[{k}]"
        if not isinstance(cd, dict):
            raise ScenarioFormatError(f"{where}: expected an object")
        clusters.append(BackhaulCluster(
            id=_require(cd, "id", int, where),
            capacity_mbps=_require(cd, "capacity_mbps", float, where),
        ))

    if "seed" not in doc:
        raise ScenarioFormatError("$: missing 'seed'")
    seed = doc["seed"]
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
        raise ScenarioFormatError("$.seed: expected an integer or null")

    policy = doc.get("candidate_policy", "all-in-range")
    if policy not in ("all-in-range", "nearest-1"):
        raise ScenarioFormatError(f"$.candidate_policy: unknown policy {policy!r}")

    if "channels" in doc:
        chan_list = _require(doc, "channels", list, "$")
        if not all(isinstance(c, int) and not isinstance(c, bool) for c in chan_list):
            raise ScenarioFormatError("$.channels: expected integers")
        channels = tuple(sorted(chan_list))
    else:
        used = sorted({c for n in nodes for c in n.channels})
        channels = tuple(range(max(used) + 1)) if used else ()

    ref_gains = tuple(
        tuple(
            channel_gain(
                math.hypot(u[0] - n.position[0], u[1] - n.position[1]),
                radio.path_loss_gamma, radio.min_distance_m,
            )
            for n in nodes
        )
        for u in users
    )
    if "gains" in doc:
        gains_doc = _require(doc, "gains", list, "$")
        if len(gains_doc) != len(users):
            raise ScenarioFormatError("$.gains: expected one row per user")
        gains = tuple(tuple(_number_list(row, f"$.gains[{i}]")) for i, row in enumerate(gains_doc))
        for i, row in enumerate(gains):
            if len(row) != len(nodes):
                raise ScenarioFormatError(f"$.gains[{i}]: expected one entry per node")
            for j, (g, ref) in enumerate(zip(row, ref_gains[i])):
                if not math.isclose(g, ref, rel_tol=1e-12, abs_tol=0.0):
                    raise ScenarioValidationError(
                        f"gains[{i}][{j}] = {g!r} inconsistent with positions (expected {ref!r})"
                    )
    else:
        gains = ref_gains

    scenario = Scenario(
        nodes=tuple(nodes),
        users=tuple(users),
        channels=channels,
        clusters=tuple(clusters),
        gains=gains,
        candidate_nodes=tuple(() for _ in users),
        radio=radio,
        candidate_policy=policy,
        seed=seed,
    )
    cands = tuple(candidate_nodes(scenario, i, policy) for i in range(len(users)))
    return replace(scenario, candidate_nodes=cands)
