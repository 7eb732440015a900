"""Exact optimum search over the discrete joint assignment space.

Two routes to the same optimum: ``solve_exhaustive`` streams the full
per-user strategy grid through a vectorized evaluator, and
``solve_branch_and_bound`` runs a depth-first search over users that prunes a
partial assignment when an optimistic completion bound cannot beat the
incumbent.  Both respect the feasibility system: single serving node per
user, channel exclusivity per (node, channel), level box constraints, and the
minimum-SINR condition on every powered channel.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import backhaul, radio
from .radio import StrategyProfile

__all__ = [
    "Assignment",
    "OptResult",
    "BudgetExceeded",
    "feasible",
    "profile_to_assignment",
    "assignment_nu",
    "solve_exhaustive",
    "solve_branch_and_bound",
    "optimality_gap",
]


class BudgetExceeded(RuntimeError):
    """The search space or node budget for an exact solve was exceeded."""


@dataclass(frozen=True)
class Assignment:
    """Serving indicators x[i][j], channel indicators y[i][j][r], levels q[i][j][r]."""

    x: tuple[tuple[int, ...], ...]
    y: tuple[tuple[tuple[int, ...], ...], ...]
    q: tuple[tuple[tuple[int, ...], ...], ...]

    @classmethod
    def from_levels(cls, scenario, levels: dict[tuple[int, int, int], int]) -> "Assignment":
        n, m = scenario.n_users, scenario.n_nodes
        chan_pos = {r: c for c, r in enumerate(scenario.channels)}
        n_chan = len(scenario.channels)
        q = [[[0] * n_chan for _ in range(m)] for _ in range(n)]
        for (i, j, r), lev in levels.items():
            q[i][j][chan_pos[r]] = lev
        y = [[[1 if q[i][j][c] > 0 else 0 for c in range(n_chan)] for j in range(m)] for i in range(n)]
        x = [[1 if any(y[i][j]) else 0 for j in range(m)] for i in range(n)]
        return cls(
            x=tuple(tuple(row) for row in x),
            y=tuple(tuple(tuple(col) for col in row) for row in y),
            q=tuple(tuple(tuple(col) for col in row) for row in q),
        )

    def levels_dict(self, scenario) -> dict[tuple[int, int, int], int]:
        out = {}
        for i, rows in enumerate(self.q):
            for j, row in enumerate(rows):
                for c, lev in enumerate(row):
                    if lev:
                        out[(i, j, scenario.channels[c])] = lev
        return out

    def total_level(self) -> int:
        return sum(lev for rows in self.q for row in rows for lev in row)


@dataclass(frozen=True)
class OptResult:
    nu: float
    assignment: Assignment
    explored: int
    wall_time_s: float


def _assignment_sinr(scenario, q_arr: np.ndarray) -> np.ndarray:
    """SINR of every (user, node, channel) triple under the full level tensor."""
    rc = scenario.radio
    scale = rc.max_power_mw / rc.power_levels_q
    gains = np.asarray(scenario.gains, dtype=np.float64)
    p_node = q_arr.sum(axis=0) * scale                       # (M, R)
    received = np.einsum("im,mr->imr", gains, p_node)        # (N, M, R) one term per node
    total = received.sum(axis=1, keepdims=True)              # (N, 1, R)
    num = q_arr * scale * gains[:, :, None]
    denom = rc.noise_mw + total - received
    return num / denom


def feasible(assignment: Assignment, scenario) -> bool:
    """Check the full constraint system; returns a flag, never raises on content."""
    n, m, n_chan = scenario.n_users, scenario.n_nodes, len(scenario.channels)
    x = np.asarray(assignment.x)
    y = np.asarray(assignment.y)
    q = np.asarray(assignment.q)
    if x.shape != (n, m) or y.shape != (n, m, n_chan) or q.shape != (n, m, n_chan):
        return False
    if not (np.isin(x, (0, 1)).all() and np.isin(y, (0, 1)).all()):
        return False
    if (x.sum(axis=1) > 1).any():                 # one serving node per user
        return False
    if (y > x[:, :, None]).any():                 # channels only at the serving node
        return False
    if (y.sum(axis=0) > 1).any():                 # channel exclusivity
        return False
    if ((q < y) | (q > scenario.radio.power_levels_q * y)).any():
        return False
    chan_pos = {r: c for c, r in enumerate(scenario.channels)}
    for i in range(n):
        for j in range(m):
            if not y[i, j].any():
                continue
            if j not in scenario.candidate_nodes[i]:
                return False
            allowed = {chan_pos[r] for r in scenario.nodes[j].channels}
            if any(c not in allowed for c in np.nonzero(y[i, j])[0]):
                return False
    if q.sum() == 0:
        return True
    s = _assignment_sinr(scenario, q.astype(np.float64))
    return bool((s[q > 0] >= scenario.radio.sinr_alpha).all())


def profile_to_assignment(profile: StrategyProfile, scenario) -> Assignment:
    """Feasible assignment induced by a game profile.

    Powered channels whose SINR falls below the threshold carry no capacity
    and are switched off in the assignment (their removal only raises the
    remaining SINRs, so the result stays feasible).
    """
    n, m, n_chan = scenario.n_users, scenario.n_nodes, len(scenario.channels)
    chan_pos = {r: c for c, r in enumerate(scenario.channels)}
    q_arr = np.zeros((n, m, n_chan), dtype=np.float64)
    for (i, j, r), lev in profile.levels.items():
        q_arr[i, j, chan_pos[r]] = lev
    keep = profile.levels
    if q_arr.sum():
        s = _assignment_sinr(scenario, q_arr)
        keep = {
            (i, j, r): lev
            for (i, j, r), lev in profile.levels.items()
            if s[i, j, chan_pos[r]] >= scenario.radio.sinr_alpha
        }
    return Assignment.from_levels(scenario, keep)


def assignment_nu(assignment: Assignment, scenario) -> float:
    """Network utility attained by an assignment (reference pipeline)."""
    from . import game  # local import; solver stays importable without game and vice versa

    profile = StrategyProfile(levels=assignment.levels_dict(scenario))
    return game.evaluate_utility(profile, scenario, "log")


# --- per-user strategy tables ---------------------------------------------------

class _StrategyTables:
    """Canonical strategy list of each user: unserved first, then nodes in
    ascending index with level vectors in lexicographic (product) order."""

    def __init__(self, scenario):
        self.scenario = scenario
        rc = scenario.radio
        self.n = scenario.n_users
        self.m = scenario.n_nodes
        self.n_chan = len(scenario.channels)
        self.q_max = rc.power_levels_q
        self.scale = rc.max_power_mw / rc.power_levels_q
        self.noise = rc.noise_mw
        self.alpha = rc.sinr_alpha
        self.gains = np.asarray(scenario.gains, dtype=np.float64).reshape(self.n, self.m)
        table = radio.build_efficiency_table(rc.efficiency_steps, rc.channel_bandwidth_mhz)
        self.thresholds = np.asarray(table.thresholds)
        self.pad_rates = np.concatenate(([0.0], np.asarray(table.efficiencies) * rc.channel_bandwidth_mhz))
        self.rate_top = float(self.pad_rates[-1])
        chan_pos = {r: c for c, r in enumerate(scenario.channels)}
        self.node_chan_pos = [
            np.array([chan_pos[r] for r in node.channels], dtype=np.int64)
            for node in scenario.nodes
        ]
        cluster_pos = {c.id: z for z, c in enumerate(scenario.clusters)}
        self.cluster_caps = np.array([c.capacity_mbps for c in scenario.clusters])
        self.cluster_of_node = np.array([cluster_pos[nd.cluster] for nd in scenario.nodes])
        self.total_slots = int(sum(len(nd.channels) for nd in scenario.nodes))

        self.nodes: list[np.ndarray] = []      # (S_i,) serving node, -1 unserved
        self.levels: list[np.ndarray] = []     # (S_i, R) levels on the full channel grid
        self.totals: list[np.ndarray] = []
        self.clusters: list[np.ndarray] = []   # (S_i,) cluster index, -1 unserved
        self.sizes: list[int] = []
        for i in range(self.n):
            node_list = [-1]
            vec_list = [np.zeros(self.n_chan, dtype=np.int16)]
            for j in scenario.candidate_nodes[i]:
                pos = self.node_chan_pos[j]
                k = len(pos)
                count = (self.q_max + 1) ** k
                idx = np.arange(1, count)  # skip the all-zero vector (== unserved)
                full = np.zeros((count - 1, self.n_chan), dtype=np.int16)
                for c in range(k):
                    full[:, pos[c]] = ((idx // (self.q_max + 1) ** (k - 1 - c)) % (self.q_max + 1))
                vec_list.extend(full)
                node_list.extend([j] * (count - 1))
            self.nodes.append(np.array(node_list, dtype=np.int64))
            levels = np.stack(vec_list).astype(np.int16)
            self.levels.append(levels)
            self.totals.append(levels.sum(axis=1).astype(np.int64))
            self.clusters.append(np.array(
                [self.cluster_of_node[j] if j >= 0 else -1 for j in node_list], dtype=np.int64
            ))
            self.sizes.append(len(node_list))

    def interference_free_caps(self) -> np.ndarray:
        """Per user: best-node full-power access capacity, capped by that node's cluster."""
        out = np.zeros(self.n)
        for i in range(self.n):
            best = 0.0
            for j in self.scenario.candidate_nodes[i]:
                s_free = self.q_max * self.scale * self.gains[i, j] / self.noise
                rate = float(self.pad_rates[int(np.searchsorted(self.thresholds, s_free, side="left"))])
                cap = rate * len(self.node_chan_pos[j])
                best = max(best, min(cap, float(self.cluster_caps[self.cluster_of_node[j]])))
            out[i] = best
        return out

    def levels_dict_for(self, combo: Sequence[int]) -> dict[tuple[int, int, int], int]:
        out = {}
        for i, s in enumerate(combo):
            j = int(self.nodes[i][s])
            if j < 0:
                continue
            vec = self.levels[i][s]
            for c in np.nonzero(vec)[0]:
                out[(i, j, self.scenario.channels[int(c)])] = int(vec[c])
        return out


def _cluster_nu_batch(tables: _StrategyTables, access: list[np.ndarray],
                      member_cluster: list[np.ndarray]) -> np.ndarray:
    """Sum over clusters of the allocated log-utility, batched over candidates.

    ``access[i]`` and ``member_cluster[i]`` are (C,) arrays per user (cluster
    -1 = unserved).  Zero-capacity rows are neutral in the allocator.
    """
    n_cand = access[0].shape[0] if access else 0
    nu = np.zeros(n_cand)
    for z in range(len(tables.cluster_caps)):
        rows = []
        for acc, cl in zip(access, member_cluster):
            rows.append(np.where(cl == z, acc, 0.0))
        if not rows:
            continue
        mat = np.sort(np.stack(rows, axis=1), axis=1)
        alloc = backhaul.allocate_sorted_batch(mat, float(tables.cluster_caps[z]))
        nu += np.log1p(alloc).sum(axis=1)
    return nu


def solve_exhaustive(scenario, max_assignments: int = 50_000_000,
                     chunk: int = 1 << 17) -> OptResult:
    """Enumerate every feasible assignment and return the maximum utility.

    Ties are broken by lowest total transmit power, then by lexicographic
    order over the canonical per-user strategy indices.
    """
    start = time.perf_counter()
    tables = _StrategyTables(scenario)
    n = tables.n
    if n == 0:
        return OptResult(0.0, Assignment.from_levels(scenario, {}), 1,
                         time.perf_counter() - start)
    total = 1
    for s in tables.sizes:
        total *= s
    if total > max_assignments:
        raise BudgetExceeded(f"{total} assignments exceed the budget of {max_assignments}")

    strides = [1] * n
    for i in range(n - 2, -1, -1):
        strides[i] = strides[i + 1] * tables.sizes[i + 1]

    best_nu = -math.inf
    best_total = 0
    best_combo = 0
    scale, noise, alpha = tables.scale, tables.noise, tables.alpha
    for lo in range(0, total, chunk):
        hi = min(lo + chunk, total)
        combos = np.arange(lo, hi, dtype=np.int64)
        sel = [(combos // strides[i]) % tables.sizes[i] for i in range(n)]

        # aggregate per-slot levels and the per-slot max to detect conflicts
        sum_acc = np.zeros((hi - lo, tables.m, tables.n_chan), dtype=np.int32)
        max_acc = np.zeros_like(sum_acc)
        lev_sel = []
        for i in range(n):
            lev = tables.levels[i][sel[i]]                       # (C, R)
            lev_sel.append(lev)
            nodes = tables.nodes[i][sel[i]]                      # (C,)
            slot = np.zeros_like(sum_acc)
            served = nodes >= 0
            slot[np.nonzero(served)[0], nodes[served]] = lev[served]
            sum_acc += slot
            np.maximum(max_acc, slot, out=max_acc)
        ok = (sum_acc == max_acc).reshape(hi - lo, -1).all(axis=1)

        p_mw = sum_acc.astype(np.float64) * scale                 # (C, M, R)
        access = []
        member_cluster = []
        totals = np.zeros(hi - lo, dtype=np.int64)
        for i in range(n):
            received = np.einsum("cmr,m->cr", p_mw, tables.gains[i])
            nodes = tables.nodes[i][sel[i]]
            gain_own = np.where(nodes >= 0, tables.gains[i][np.clip(nodes, 0, None)], 0.0)
            num = lev_sel[i] * (scale * gain_own[:, None])
            s = num / (noise + received - num)
            powered = lev_sel[i] > 0
            ok &= ~((powered & (s < alpha)).any(axis=1))
            caps = tables.pad_rates[np.searchsorted(tables.thresholds, s, side="left")]
            access.append(np.where(powered, caps, 0.0).sum(axis=1))
            member_cluster.append(tables.clusters[i][sel[i]])
            totals += tables.totals[i][sel[i]]

        nu = _cluster_nu_batch(tables, access, member_cluster)
        nu[~ok] = -math.inf
        top = nu.max()
        if top > best_nu or (top == best_nu and top > -math.inf):
            cand = np.nonzero(nu == top)[0]
            tot_cand = totals[cand]
            t_min = tot_cand.min()
            first = int(cand[np.nonzero(tot_cand == t_min)[0][0]])
            key = (top, -int(t_min), -(lo + first))
            if key > (best_nu, -best_total, -best_combo):
                best_nu, best_total, best_combo = top, int(t_min), lo + first

    combo = []
    remaining = best_combo
    for i in range(n):
        combo.append(remaining // strides[i] % tables.sizes[i])
    assignment = Assignment.from_levels(scenario, tables.levels_dict_for(combo))
    return OptResult(
        nu=assignment_nu(assignment, scenario),
        assignment=assignment,
        explored=total,
        wall_time_s=time.perf_counter() - start,
    )


# --- branch and bound -------------------------------------------------------------

class _BnB:
    PRUNE_MARGIN = 1e-9

    def __init__(self, scenario, max_nodes: int, wall_limit_s: Optional[float]):
        self.tables = _StrategyTables(scenario)
        self.scenario = scenario
        self.max_nodes = max_nodes
        self.wall_limit = wall_limit_s
        self.start = time.perf_counter()
        self.free_caps = self.tables.interference_free_caps()
        self.backhaul_total = float(self.tables.cluster_caps.sum())
        self.explored = 0
        self.best_nu = -math.inf
        self.best_key: tuple = ()
        self.best_combo: Optional[tuple[int, ...]] = None

    def _check_budget(self) -> None:
        if self.explored > self.max_nodes:
            raise BudgetExceeded(f"branch-and-bound node budget of {self.max_nodes} exceeded")
        if self.wall_limit is not None and time.perf_counter() - self.start > self.wall_limit:
            raise BudgetExceeded("branch-and-bound wall-time ceiling exceeded")

    def _evaluate_children(self, depth: int, p_mw: np.ndarray, lev_int: np.ndarray,
                           decided: list[tuple[int, np.ndarray, int]]):
        """Vectorized per-child feasibility, decided-part utility and bound.

        ``decided`` holds (node, level vector, strategy index) per decided user.
        Returns (feasible mask, decided utility, bound, child order).
        """
        t = self.tables
        user = depth
        nodes = t.nodes[user]
        levels = t.levels[user].astype(np.float64)
        n_child = len(nodes)
        self.explored += n_child
        self._check_budget()

        served = nodes >= 0
        node_safe = np.clip(nodes, 0, None)
        # channel exclusivity against already-placed power
        ok = ~(((lev_int[node_safe] > 0) & (levels > 0)).any(axis=1) & served)

        # received power per child for every user: base plus the child's slots
        rec_base = np.einsum("mr,km->kr", p_mw, t.gains)          # (N, R)
        add_gain = levels                                          # unserved children have zero vectors
        access = []
        member_cluster = []
        for k in range(depth + 1):
            if k == user:
                l_nodes = nodes
                l_levels = levels
            else:
                j_k, vec_k, _ = decided[k]
                l_nodes = np.full(n_child, j_k, dtype=np.int64)
                l_levels = np.broadcast_to(vec_k.astype(np.float64), (n_child, t.n_chan))
            gain_cross = t.gains[k][node_safe] * np.where(served, 1.0, 0.0)  # child node -> user k
            rec = rec_base[k][None, :] + add_gain * (t.scale * gain_cross[:, None])
            gain_own = t.gains[k][np.clip(l_nodes, 0, None)] * np.where(l_nodes >= 0, 1.0, 0.0)
            num = l_levels * (t.scale * gain_own[:, None])
            s = num / (t.noise + rec - num)
            powered = l_levels > 0
            ok &= ~((powered & (s < t.alpha)).any(axis=1))
            caps = t.pad_rates[np.searchsorted(t.thresholds, s, side="left")]
            access.append(np.where(powered, caps, 0.0).sum(axis=1))
            if k == user:
                member_cluster.append(t.clusters[user])
            else:
                member_cluster.append(np.full(n_child, t.cluster_of_node[decided[k][0]]
                                              if decided[k][0] >= 0 else -1, dtype=np.int64))

        decided_nu = _cluster_nu_batch(t, access, member_cluster)

        if depth + 1 < t.n:
            undecided = self.free_caps[depth + 1:]
            occupied = int((lev_int > 0).sum()) + (levels > 0).sum(axis=1)
            budget = np.minimum(self.backhaul_total,
                                (t.total_slots - occupied) * t.rate_top)
            und_sorted = np.sort(undecided)
            mat = np.broadcast_to(und_sorted, (n_child, len(und_sorted))).copy()
            alloc = backhaul.allocate_sorted_batch(mat, budget)
            bound = decided_nu + np.log1p(alloc).sum(axis=1)
        else:
            bound = decided_nu
        return ok, decided_nu, bound

    def _offer(self, nu: float, total: int, combo: tuple[int, ...]) -> None:
        key = (nu, -total, tuple(-c for c in combo))
        if key > (self.best_nu, *self.best_key):
            self.best_nu = nu
            self.best_key = key[1:]
            self.best_combo = combo

    def run(self) -> tuple[float, Optional[tuple[int, ...]], int]:
        t = self.tables
        if t.n == 0:
            return 0.0, (), 1

        def recurse(depth: int, p_mw: np.ndarray, lev_int: np.ndarray,
                    decided: list, path: tuple[int, ...], path_total: int) -> None:
            ok, decided_nu, bound = self._evaluate_children(depth, p_mw, lev_int, decided)
            order = np.argsort(-bound, kind="stable")
            is_leaf = depth + 1 == t.n
            for s in order:
                s = int(s)
                if not ok[s]:
                    continue
                if bound[s] <= self.best_nu - self.PRUNE_MARGIN:
                    break  # children are bound-sorted; the rest cannot beat the incumbent
                combo = path + (s,)
                total = path_total + int(t.totals[depth][s])
                if is_leaf:
                    self._offer(float(decided_nu[s]), total, combo)
                    continue
                j = int(t.nodes[depth][s])
                vec = t.levels[depth][s]
                p_child = p_mw.copy()
                lev_child = lev_int.copy()
                if j >= 0:
                    p_child[j] += vec * t.scale
                    lev_child[j] += vec
                recurse(depth + 1, p_child, lev_child,
                        decided + [(j, vec, s)], combo, total)

        recurse(0, np.zeros((t.m, t.n_chan)), np.zeros((t.m, t.n_chan), dtype=np.int32), [], (), 0)
        return self.best_nu, self.best_combo, self.explored


def solve_branch_and_bound(scenario, max_nodes: int = 20_000_000,
                           wall_limit_s: Optional[float] = None) -> OptResult:
    """Depth-first exact search; returns the same optimum as ``solve_exhaustive``.

    A partial assignment is pruned when its upper bound (decided users kept at
    their decided-only capacities, undecided users given their interference-free
    best-node capacity, jointly capped by free channel slots and total backhaul
    through the max-min allocator) cannot beat the incumbent.
    """
    start = time.perf_counter()
    search = _BnB(scenario, max_nodes, wall_limit_s)
    nu, combo, explored = search.run()
    if combo is None:
        raise RuntimeError("branch and bound found no feasible assignment (expected all-zero)")
    assignment = Assignment.from_levels(scenario, search.tables.levels_dict_for(combo))
    return OptResult(
        nu=assignment_nu(assignment, scenario) if scenario.n_users else 0.0,
        assignment=assignment,
        explored=explored,
        wall_time_s=time.perf_counter() - start,
    )


def optimality_gap(game_nu: float, opt_nu: float, guard: float = 1e-12,
                   exact_tol: float = 1e-6) -> tuple[float, bool]:
    """Relative gap (opt - game) / opt with an exact-match flag.

    A game value above the optimum beyond rounding noise signals a solver or
    feasibility bug and raises.
    """
    if game_nu < 0 or opt_nu < 0:
        raise ValueError("utilities must be nonnegative")
    if game_nu > opt_nu + 1e-9:
        raise ValueError(f"game utility {game_nu} exceeds the optimum {opt_nu}")
    gap = max(0.0, opt_nu - game_nu) / max(opt_nu, guard)
    return gap, abs(opt_nu - game_nu) <= exact_tol
