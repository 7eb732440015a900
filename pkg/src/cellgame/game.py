"""Better-response play of the user game and the channel game.

Both games repeat sequential better responses until a pure Nash equilibrium:
players adopt the first strictly improving strategy in ascending total
transmit power.  In the user game a player is a user and a strategy is a
serving node plus a power-level vector over that node's channels.  In the
channel game a player is a (user, node, channel) triple choosing one power
level; node switches are decided in a second arbitration step that compares
full-network utility with the candidate group active against the incumbent
configuration.

The hot path (scanning a player's strategy list) is vectorized over all
candidate strategies at once: only the channels the player can touch are
re-evaluated, and only the backhaul clusters containing affected users are
re-allocated.  ``evaluate_utility`` is the plain reference pipeline through
the radio and backhaul modules; tests hold the two paths together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from . import backhaul, metrics as metrics_mod, radio
from .radio import InfeasibleProfileError, StrategyProfile

__all__ = [
    "GameConfig",
    "GameOutcome",
    "MoveRecord",
    "GameState",
    "play",
    "evaluate_utility",
    "enumerate_strategies",
    "better_response_step",
    "arbitrate_node_switch",
    "verify_equilibrium",
]

PlayerId = Union[int, tuple[int, int, int]]
MaskEntry = Union[tuple[int, int], tuple[int, int, int]]

# Guard against accidentally enormous user-game strategy spaces.
_MAX_STRATEGIES_PER_NODE = 4_000_000


@dataclass(frozen=True)
class GameConfig:
    kind: str = "c"                    # "u" (user game) or "c" (channel game)
    utility: str = "log"               # "log" (proportional fairness) or "cap" (total capacity)
    max_rounds: int = 1000
    scan_order: str = "ascending-power"
    track_moves: bool = False

    def __post_init__(self) -> None:
        if self.kind not in ("u", "c"):
            raise ValueError("kind must be 'u' or 'c'")
        if self.utility not in ("log", "cap"):
            raise ValueError("utility must be 'log' or 'cap'")
        if self.max_rounds < 1:
            raise ValueError("max_rounds must be >= 1")
        if self.scan_order != "ascending-power":
            raise ValueError("only ascending-power scan order is supported")


@dataclass(frozen=True)
class MoveRecord:
    kind: str                       # "move" or "arbitration"
    player: PlayerId
    delta_utility: float            # strict improvement seen by the mover (0 for kept arbitration)
    mask_vacuous: bool              # True when the step-1 mask zeroed nothing (always for the user game)
    potential_before: Optional[float]   # configured utility at the surrounding feasible
    potential_after: Optional[float]    # checkpoints; None for masked transient moves
    nu_before: Optional[float] = None   # reference-path configured utility, when the raw
    nu_after: Optional[float] = None    # profile is feasible before and after the move


@dataclass(frozen=True)
class GameOutcome:
    profile: StrategyProfile
    rounds: int
    converged: bool
    metrics: metrics_mod.MetricRecord
    moves: tuple[MoveRecord, ...] = ()
    potential_trace: tuple[float, ...] = ()


# --- cached level matrices ----------------------------------------------------

_LEVEL_CACHE: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}


def _level_matrix(q: int, k: int) -> tuple[np.ndarray, np.ndarray]:
    """All level vectors over k channels in {0..q}, product order, plus row sums."""
    key = (q, k)
    cached = _LEVEL_CACHE.get(key)
    if cached is not None:
        return cached
    size = (q + 1) ** k
    if size > _MAX_STRATEGIES_PER_NODE:
        raise ValueError(
            f"strategy space of {size} vectors per node is beyond desk scale; "
            "reduce the channel count or the number of power levels"
        )
    if k == 0:
        mat = np.zeros((1, 0), dtype=np.int16)
    else:
        idx = np.arange(size)
        cols = [(idx // (q + 1) ** (k - 1 - c)) % (q + 1) for c in range(k)]
        mat = np.stack(cols, axis=1).astype(np.int16)
    totals = mat.sum(axis=1).astype(np.int64) if k else np.zeros(1, dtype=np.int64)
    _LEVEL_CACHE[key] = (mat, totals)
    return mat, totals


# --- in-play network state ----------------------------------------------------

class GameState:
    """Mutable per-game network state with precomputed scenario arrays.

    ``owner[j, r]`` is the user holding channel index r at node j (-1 free) and
    ``qlev[j, r]`` its power level.  During the channel game's two-step node
    arbitration a user may transiently hold channels at two nodes; every
    utility evaluation applies a mask that restores single-serving first.
    """

    def __init__(self, scenario):
        self.scenario = scenario
        rc = scenario.radio
        self.n_users = scenario.n_users
        self.n_nodes = scenario.n_nodes
        self.channel_values = tuple(scenario.channels)
        self.chan_index = {value: idx for idx, value in enumerate(self.channel_values)}
        self.n_channels = len(self.channel_values)
        self.G = np.asarray(scenario.gains, dtype=np.float64).reshape(self.n_users, self.n_nodes)
        self.node_chans = [
            np.array([self.chan_index[r] for r in node.channels], dtype=np.int64)
            for node in scenario.nodes
        ]
        cluster_ids = [c.id for c in scenario.clusters]
        cluster_pos = {cid: z for z, cid in enumerate(cluster_ids)}
        self.cluster_caps = np.array([c.capacity_mbps for c in scenario.clusters], dtype=np.float64)
        self.cluster_of_node = np.array(
            [cluster_pos[node.cluster] for node in scenario.nodes], dtype=np.int64
        )
        self.n_clusters = len(cluster_ids)
        table = radio.build_efficiency_table(rc.efficiency_steps, rc.channel_bandwidth_mhz)
        self.thresholds = np.asarray(table.thresholds, dtype=np.float64)
        self.pad_rates = np.concatenate(
            ([0.0], np.asarray(table.efficiencies, dtype=np.float64) * rc.channel_bandwidth_mhz)
        )
        self.scale = rc.max_power_mw / rc.power_levels_q
        self.noise = rc.noise_mw
        self.q_max = rc.power_levels_q
        self.cand_idx = tuple(tuple(scenario.candidate_nodes[i]) for i in range(self.n_users))
        self.owner = np.full((self.n_nodes, self.n_channels), -1, dtype=np.int32)
        self.qlev = np.zeros((self.n_nodes, self.n_channels), dtype=np.int16)

    @classmethod
    def from_profile(cls, scenario, profile: StrategyProfile) -> "GameState":
        profile.validate(scenario)
        state = cls(scenario)
        for (i, j, r), q in profile.levels.items():
            r_idx = state.chan_index[r]
            state.owner[j, r_idx] = i
            state.qlev[j, r_idx] = q
        return state

    def copy(self) -> "GameState":
        clone = GameState.__new__(GameState)
        clone.__dict__.update(self.__dict__)
        clone.owner = self.owner.copy()
        clone.qlev = self.qlev.copy()
        return clone

    def to_profile(self) -> StrategyProfile:
        levels = {}
        for j in range(self.n_nodes):
            for r_idx in np.nonzero(self.qlev[j] > 0)[0]:
                levels[(int(self.owner[j, r_idx]), j, self.channel_values[r_idx])] = int(
                    self.qlev[j, r_idx]
                )
        return StrategyProfile(levels=levels)

    def user_footprint(self, user: int) -> tuple:
        out = []
        for j in range(self.n_nodes):
            mask = (self.owner[j] == user) & (self.qlev[j] > 0)
            for r_idx in np.nonzero(mask)[0]:
                out.append((j, int(r_idx), int(self.qlev[j, r_idx])))
        return tuple(out)

    def clear_user_at(self, user: int, nodes: Iterable[int]) -> None:
        for j in nodes:
            held = self.owner[j] == user
            self.qlev[j, held] = 0
            self.owner[j, held] = -1


@dataclass
class _EvalResult:
    access: np.ndarray
    actual: np.ndarray

    def utility(self, kind: str) -> float:
        if kind == "log":
            return float(np.log1p(self.actual).sum())
        return float(self.actual.sum())


def _masked_levels(state: GameState, mask: Optional[Iterable[tuple[int, int]]]) -> np.ndarray:
    q = state.qlev.astype(np.float64)
    if mask:
        for user, j in mask:
            q[j, state.owner[j] == user] = 0.0
    return q


def _evaluate_state(state: GameState, mask: Optional[Iterable[tuple[int, int]]] = None) -> _EvalResult:
    """Exact utility evaluation of the (masked) state through radio + backhaul."""
    q = _masked_levels(state, mask)
    p = q * state.scale
    received = state.G @ p  # (N, R): total received power per user per channel
    access = np.zeros(state.n_users)
    serving = np.full(state.n_users, -1, dtype=np.int64)
    powered = q > 0
    for j in range(state.n_nodes):
        for r_idx in np.nonzero(powered[j])[0]:
            i = int(state.owner[j, r_idx])
            if serving[i] not in (-1, j):
                raise InfeasibleProfileError(f"user {i} powered at nodes {serving[i]} and {j}")
            serving[i] = j
            num = p[j, r_idx] * state.G[i, j]
            s = num / (state.noise + received[i, r_idx] - num)
            access[i] += state.pad_rates[int(np.searchsorted(state.thresholds, s, side="left"))]

    actual = np.zeros(state.n_users)
    for z in range(state.n_clusters):
        members = [
            i for i in range(state.n_users)
            if serving[i] >= 0 and state.cluster_of_node[serving[i]] == z and access[i] > 0
        ]
        if not members:
            continue
        alloc = backhaul.allocate_cluster([access[i] for i in members], float(state.cluster_caps[z]))
        for i, c in zip(members, alloc):
            actual[i] = c
    return _EvalResult(access=access, actual=actual)


# --- batched candidate scan ----------------------------------------------------

class _ScanBase:
    """State with the scanned player's variable slots (and the mask) zeroed."""

    __slots__ = ("I0", "access0", "holders", "serving0", "members", "contrib", "const")

    def __init__(self, state: GameState, user: int, utility: str,
                 zero_all_of_user: bool,
                 extra_zero_slots: tuple[tuple[int, int], ...] = (),
                 mask: tuple[tuple[int, int], ...] = ()):
        q0 = state.qlev.astype(np.float64)
        owner = state.owner
        if zero_all_of_user:
            for j in range(state.n_nodes):
                q0[j, owner[j] == user] = 0.0
        for j, r_idx in extra_zero_slots:
            if owner[j, r_idx] == user:
                q0[j, r_idx] = 0.0
        for mu, mj in mask:
            q0[mj, owner[mj] == mu] = 0.0

        p0 = q0 * state.scale
        self.I0 = state.G @ p0  # (N, R)
        self.access0 = np.zeros(state.n_users)
        self.serving0 = np.full(state.n_users, -1, dtype=np.int64)
        # holders[r] lists (user, signal, base denominator, base capacity) for
        # every powered slot on channel r whose capacity is currently positive.
        self.holders: dict[int, list[tuple[int, float, float, float]]] = {}
        per_user_slots: dict[int, tuple[int, np.ndarray]] = {}
        powered = q0 > 0
        for j in range(state.n_nodes):
            idxs = np.nonzero(powered[j])[0]
            if idxs.size == 0:
                continue
            owners_here = owner[j, idxs]
            for k in np.unique(owners_here):
                k = int(k)
                if k in per_user_slots:
                    raise InfeasibleProfileError(f"user {k} powered at two nodes in scan base")
                per_user_slots[k] = (j, idxs[owners_here == k])

        for k, (l, rs) in per_user_slots.items():
            num = p0[l, rs] * state.G[k, l]
            denom0 = state.noise + self.I0[k, rs] - num
            caps = state.pad_rates[np.searchsorted(state.thresholds, num / denom0, side="left")]
            self.access0[k] = caps.sum()
            self.serving0[k] = l
            for c_i, r_idx in enumerate(rs):
                if caps[c_i] > 0.0:
                    self.holders.setdefault(int(r_idx), []).append(
                        (k, float(num[c_i]), float(denom0[c_i]), float(caps[c_i]))
                    )

        self.members: dict[int, list[int]] = {}
        for k in range(state.n_users):
            if k != user and self.serving0[k] >= 0 and self.access0[k] > 0:
                z = int(state.cluster_of_node[self.serving0[k]])
                self.members.setdefault(z, []).append(k)

        # Per-cluster utility contributions of the base state, scanned user excluded.
        self.contrib: dict[int, float] = {}
        self.const = 0.0
        for z, mem in self.members.items():
            alloc = backhaul.allocate_sorted(
                sorted(self.access0[k] for k in mem), float(state.cluster_caps[z])
            )
            value = (
                float(sum(math.log1p(c) for c in alloc)) if utility == "log" else float(sum(alloc))
            )
            self.contrib[z] = value
            self.const += value


def _cluster_reduce(caps_matrix: np.ndarray, capacity: float, utility: str) -> np.ndarray:
    caps_sorted = np.sort(caps_matrix, axis=1)
    alloc = backhaul.allocate_sorted_batch(caps_sorted, capacity)
    if utility == "log":
        return np.log1p(alloc).sum(axis=1)
    return alloc.sum(axis=1)


def _scan_node(state: GameState, base: _ScanBase, user: int, j: int,
               free: Sequence[int], utility: str) -> tuple[np.ndarray, np.ndarray]:
    """Utilities and total levels of every candidate level vector at node j."""
    levels, totals = _level_matrix(state.q_max, len(free))
    free_arr = np.asarray(free, dtype=np.int64)
    own_gain = float(state.G[user, j])
    own_sig = levels * (state.scale * own_gain)
    own_denom = state.noise + base.I0[user, free_arr]
    own_caps = state.pad_rates[
        np.searchsorted(state.thresholds, own_sig / own_denom, side="left")
    ]
    own_access = own_caps.sum(axis=1) + base.access0[user]

    deltas: dict[int, np.ndarray] = {}
    for c, r_idx in enumerate(free):
        for k, num, denom0, basecap in base.holders.get(int(r_idx), ()):
            add = levels[:, c] * (state.scale * float(state.G[k, j]))
            caps = state.pad_rates[
                np.searchsorted(state.thresholds, num / (denom0 + add), side="left")
            ]
            prev = deltas.get(k)
            deltas[k] = (caps - basecap) if prev is None else prev + (caps - basecap)

    z_own = int(state.cluster_of_node[j])
    affected = {z_own}
    affected.update(int(state.cluster_of_node[base.serving0[k]]) for k in deltas)

    n_candidates = levels.shape[0]
    util = np.full(n_candidates, base.const, dtype=np.float64)
    for z in affected:
        util -= base.contrib.get(z, 0.0)
        rows = []
        for k in base.members.get(z, []):
            d = deltas.get(k)
            rows.append(
                np.full(n_candidates, base.access0[k]) if d is None else base.access0[k] + d
            )
        if z == z_own:
            rows.append(own_access)
        if rows:
            util += _cluster_reduce(np.stack(rows, axis=1), float(state.cluster_caps[z]), utility)
    return util, totals


def _free_channels(state: GameState, user: int, j: int) -> list[int]:
    return [int(r) for r in state.node_chans[j]
            if state.owner[j, r] == -1 or state.owner[j, r] == user]


def _current_assignment(state: GameState, user: int) -> tuple[Optional[int], dict[int, int]]:
    for j in range(state.n_nodes):
        held = (state.owner[j] == user) & (state.qlev[j] > 0)
        idxs = np.nonzero(held)[0]
        if idxs.size:
            return j, {int(r): int(state.qlev[j, r]) for r in idxs}
    return None, {}


# --- trace plumbing -------------------------------------------------------------

class _Trace:
    def __init__(self, config: GameConfig, scenario):
        self.config = config
        self.scenario = scenario
        self.moves: list[MoveRecord] = []
        self.potential: list[float] = [0.0]

    def reference_utility(self, state: GameState) -> float:
        return evaluate_utility(state.to_profile(), self.scenario, self.config.utility)

    def record(self, state: GameState, kind: str, player: PlayerId, delta: float,
               mask_vacuous: bool, nu_before: Optional[float], nu_after: Optional[float],
               feasible: bool = True) -> None:
        # Masked channel-game moves can leave a user transiently powered at two
        # nodes; the potential checkpoint is only taken at feasible states.
        if feasible:
            before: Optional[float] = self.potential[-1]
            after: Optional[float] = _evaluate_state(state).utility(self.config.utility)
            self.potential.append(after)
        else:
            before = after = None
        self.moves.append(MoveRecord(
            kind=kind, player=player, delta_utility=delta, mask_vacuous=mask_vacuous,
            potential_before=before, potential_after=after,
            nu_before=nu_before, nu_after=nu_after,
        ))


# --- better-response steps -------------------------------------------------------

def _better_response_user(state: GameState, user: int, config: GameConfig,
                          trace: Optional[_Trace]) -> bool:
    cands = state.cand_idx[user]
    if not cands:
        return False
    base = _ScanBase(state, user, config.utility, zero_all_of_user=True)
    utils_parts, totals_parts, node_parts, row_parts = [], [], [], []
    free_by_node: dict[int, list[int]] = {}
    offsets: dict[int, int] = {}
    offset = 0
    for j in cands:
        free = _free_channels(state, user, j)
        free_by_node[j] = free
        utils, totals = _scan_node(state, base, user, j, free, config.utility)
        utils_parts.append(utils)
        totals_parts.append(totals)
        node_parts.append(np.full(len(utils), j, dtype=np.int64))
        row_parts.append(np.arange(len(utils), dtype=np.int64))
        offsets[j] = offset
        offset += len(utils)

    utils_all = np.concatenate(utils_parts)
    totals_all = np.concatenate(totals_parts)
    nodes_all = np.concatenate(node_parts)
    rows_all = np.concatenate(row_parts)

    j_cur, held = _current_assignment(state, user)
    if j_cur is None:
        cur_idx = 0  # the all-zero vector at the first candidate node
    else:
        free = free_by_node[j_cur]
        qn = state.q_max + 1
        row = 0
        for r_idx in free:
            row = row * qn + held.get(r_idx, 0)
        cur_idx = offsets[j_cur] + row
    u_cur = utils_all[cur_idx]

    order = np.argsort(totals_all, kind="stable")
    better = utils_all[order] > u_cur
    if not better.any():
        return False
    pick = int(order[int(np.argmax(better))])
    j_new = int(nodes_all[pick])
    free_new = free_by_node[j_new]
    vec = _level_matrix(state.q_max, len(free_new))[0][int(rows_all[pick])]

    nu_before = trace.reference_utility(state) if trace else None
    state.clear_user_at(user, range(state.n_nodes))
    for c, r_idx in enumerate(free_new):
        if vec[c]:
            state.owner[j_new, r_idx] = user
            state.qlev[j_new, r_idx] = vec[c]
    if trace:
        trace.record(state, "move", user, float(utils_all[pick] - u_cur), True,
                     nu_before, trace.reference_utility(state))
    return True


def _other_node_power(state: GameState, user: int, j: int) -> bool:
    for j2 in range(state.n_nodes):
        if j2 == j:
            continue
        if (((state.owner[j2] == user) & (state.qlev[j2] > 0)).any()):
            return True
    return False


def _better_response_channel(state: GameState, user: int, j: int, r_idx: int,
                             config: GameConfig, trace: Optional[_Trace]) -> bool:
    owner = state.owner[j, r_idx]
    if owner != -1 and owner != user:
        return False  # channel exclusivity: the only strategy is level 0
    mask = tuple((user, j2) for j2 in state.cand_idx[user] if j2 != j)
    mask_vacuous = not _other_node_power(state, user, j)
    base = _ScanBase(state, user, config.utility, zero_all_of_user=False,
                     extra_zero_slots=((j, r_idx),), mask=mask)
    utils, _totals = _scan_node(state, base, user, j, [r_idx], config.utility)
    cur_level = int(state.qlev[j, r_idx]) if owner == user else 0
    u_cur = utils[cur_level]
    better = utils > u_cur
    if not better.any():
        return False
    new_level = int(np.argmax(better))  # rows are levels 0..Q in ascending power order

    nu_before = None
    if trace and mask_vacuous:
        nu_before = trace.reference_utility(state)
    if new_level:
        state.owner[j, r_idx] = user
        state.qlev[j, r_idx] = new_level
    else:
        state.owner[j, r_idx] = -1
        state.qlev[j, r_idx] = 0
    if trace:
        nu_after = trace.reference_utility(state) if mask_vacuous else None
        trace.record(state, "move", (user, j, state.channel_values[r_idx]),
                     float(utils[new_level] - u_cur), mask_vacuous, nu_before, nu_after,
                     feasible=mask_vacuous)
    return True


def _arbitrate(state: GameState, user: int, j: int, config: GameConfig,
               trace: Optional[_Trace]) -> None:
    mask_candidate = tuple((user, j2) for j2 in state.cand_idx[user] if j2 != j)
    candidate_value = _evaluate_state(state, mask_candidate).utility(config.utility)
    incumbent_value = _evaluate_state(state, ((user, j),)).utility(config.utility)
    if candidate_value > incumbent_value:
        state.clear_user_at(user, [j2 for j2 in range(state.n_nodes) if j2 != j])
        delta = candidate_value - incumbent_value
    else:
        state.clear_user_at(user, [j])
        delta = 0.0
    if trace:
        trace.record(state, "arbitration", (user, j, -1), delta, True, None, None)


# --- rounds and play -------------------------------------------------------------

def _play_round(state: GameState, config: GameConfig, trace: Optional[_Trace]) -> bool:
    changed = False
    if config.kind == "u":
        for user in range(state.n_users):
            changed |= _better_response_user(state, user, config, trace)
        return changed
    for user in range(state.n_users):
        for j in state.cand_idx[user]:
            before = state.user_footprint(user)
            for r_idx in state.node_chans[j]:
                _better_response_channel(state, user, j, int(r_idx), config, trace)
            _arbitrate(state, user, j, config, trace)
            changed |= state.user_footprint(user) != before
    return changed


def play(scenario, config: GameConfig = GameConfig()) -> GameOutcome:
    """Run one game from the all-zero profile to a NE (or the round limit).

    A round is one full round-robin pass; the game stops after the first round
    that changes nothing.  ``rounds`` counts completed passes including that
    final quiet one.
    """
    state = GameState(scenario)
    trace = _Trace(config, scenario) if config.track_moves else None
    converged = False
    rounds = 0
    for rounds in range(1, config.max_rounds + 1):
        if not _play_round(state, config, trace):
            converged = True
            break

    ev = _evaluate_state(state)
    caps = [float(c) for c in ev.actual]
    if caps:
        record = metrics_mod.MetricRecord(
            nu=metrics_mod.network_utility(caps),
            total_capacity_mbps=metrics_mod.total_capacity(caps),
            blocking_prob=metrics_mod.blocking_probability(caps),
            jain=metrics_mod.jain_index(caps),
            rounds=rounds,
            converged=converged,
        )
    else:
        record = metrics_mod.MetricRecord(0.0, 0.0, 0.0, float("nan"), rounds, converged)
    return GameOutcome(
        profile=state.to_profile(),
        rounds=rounds,
        converged=converged,
        metrics=record,
        moves=tuple(trace.moves) if trace else (),
        potential_trace=tuple(trace.potential) if trace else (),
    )


def verify_equilibrium(profile: StrategyProfile, scenario, config: GameConfig) -> bool:
    """Exhaustive unilateral check: one extra full round must change nothing."""
    state = GameState.from_profile(scenario, profile)
    return not _play_round(state, GameConfig(kind=config.kind, utility=config.utility,
                                             max_rounds=config.max_rounds), None)


# --- public spec operations -------------------------------------------------------

def evaluate_utility(profile: StrategyProfile, scenario, utility: str = "log",
                     mask: Optional[Iterable[MaskEntry]] = None) -> float:
    """Reference utility of a profile: radio capacities, backhaul, then sum.

    ``mask`` lists players to treat as silent before evaluation: a
    (user, node) pair zeroes all of that pair's powers network-wide, a
    (user, node, channel) triple zeroes one channel.  The masked profile must
    satisfy single-serving and channel exclusivity.
    """
    if utility not in ("log", "cap"):
        raise ValueError("utility must be 'log' or 'cap'")
    masked = profile.copy()
    for entry in mask or ():
        if len(entry) == 2:
            user, node = entry
            for r in scenario.nodes[node].channels:
                masked.set_level(user, node, r, 0)
        elif len(entry) == 3:
            masked.set_level(entry[0], entry[1], entry[2], 0)
        else:
            raise ValueError("mask entries must be (user, node) or (user, node, channel)")
    masked.validate(scenario)

    table = radio.build_efficiency_table(
        scenario.radio.efficiency_steps, scenario.radio.channel_bandwidth_mhz
    )
    serving: list[Optional[int]] = []
    access: list[float] = []
    for i in range(scenario.n_users):
        j = masked.serving_node(i)
        serving.append(j)
        access.append(0.0 if j is None else radio.access_capacity(masked, scenario, i, j, table))
    actual = backhaul.allocate_all(scenario, serving, access).actual
    if utility == "log":
        return metrics_mod.network_utility(actual)
    return metrics_mod.total_capacity(actual)


def enumerate_strategies(player: PlayerId, profile: StrategyProfile, scenario,
                         kind: str) -> list:
    """Ordered strategy list of one player under the current profile.

    User game: (node, level vector over that node's channels) for every
    candidate node, channels held by other users forced to zero, sorted by
    ascending total power (stable by node then generation order).  Channel
    game: the feasible levels for the (user, node, channel) triple.
    """
    state = GameState.from_profile(scenario, profile)
    if kind == "c":
        user, node, channel = player  # type: ignore[misc]
        r_idx = state.chan_index[channel]
        owner = state.owner[node, r_idx]
        if owner != -1 and owner != user:
            return [0]
        return list(range(state.q_max + 1))
    if kind != "u":
        raise ValueError("kind must be 'u' or 'c'")
    user = int(player)  # type: ignore[arg-type]
    entries = []
    for j in state.cand_idx[user]:
        all_chans = [int(r) for r in state.node_chans[j]]
        free = set(_free_channels(state, user, j))
        free_list = [r for r in all_chans if r in free]
        levels, totals = _level_matrix(state.q_max, len(free_list))
        for row in range(levels.shape[0]):
            vec = {r: int(levels[row, c]) for c, r in enumerate(free_list)}
            full = tuple(vec.get(r, 0) for r in all_chans)
            entries.append((int(totals[row]), len(entries), j, full))
    entries.sort(key=lambda e: (e[0], e[1]))
    return [(j, full) for _, _, j, full in entries]


def better_response_step(player: PlayerId, state: GameState,
                         config: GameConfig) -> tuple[GameState, bool]:
    """One better-response step of one player; mutates and returns the state."""
    if config.kind == "u":
        changed = _better_response_user(state, int(player), config, None)  # type: ignore[arg-type]
    else:
        user, node, channel = player  # type: ignore[misc]
        changed = _better_response_channel(state, user, node, state.chan_index[channel],
                                           config, None)
    return state, changed


def arbitrate_node_switch(user: int, node: int, state: GameState,
                          config: GameConfig) -> GameState:
    """Channel-game step 2: adopt the candidate node group or keep the incumbent."""
    _arbitrate(state, user, node, config, None)
    return state
