"""Seeded Monte Carlo campaigns over the two scenario presets, with CSV output.

One campaign runs every (user count) x (game, utility, policy) configuration
over ``instances`` random scenario instances.  Instance ``k`` always uses seed
``base_seed + k``, so any subset of a campaign is reproducible in isolation
and different configurations see identical scenario draws.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from datetime import datetime, timezone
from typing import Optional, Sequence

from . import solver
from .game import GameConfig, play
from .scenario import Scenario, sample_scenario, scenario_1_spec, scenario_2_spec

__all__ = ["CampaignSpec", "ResultRow", "run_campaign", "summarize", "write_rows_csv"]

PRESETS = {"scenario-1": scenario_1_spec, "scenario-2": scenario_2_spec}


@dataclass(frozen=True)
class CampaignSpec:
    preset: str
    user_counts: tuple[int, ...]
    games: tuple[tuple[str, str, str], ...]   # (game kind, utility kind, association policy)
    instances: int
    base_seed: int
    compare_optimum: bool = False
    output_path: Optional[str] = None
    max_rounds: int = 1000
    workers: int = 1

    def __post_init__(self) -> None:
        if self.preset not in PRESETS:
            raise ValueError(f"unknown preset {self.preset!r}")
        if self.instances < 1:
            raise ValueError("instances must be >= 1")
        if not self.user_counts or not self.games:
            raise ValueError("user_counts and games must be nonempty")
        if self.compare_optimum and self.preset != "scenario-2":
            raise ValueError("compare_optimum requires the scenario-2 preset")
        for kind, utility, policy in self.games:
            if kind not in ("u", "c") or utility not in ("log", "cap"):
                raise ValueError(f"bad game configuration {(kind, utility, policy)}")
            if policy not in ("nearest-1", "all-in-range"):
                raise ValueError(f"bad association policy {policy!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class ResultRow:
    seed: int
    users: int
    game: str
    utility: str
    policy: str
    nu: float
    total_capacity_mbps: float
    blocking: float
    jain: float
    rounds: int
    converged: bool
    opt_nu: Optional[float] = None
    gap: Optional[float] = None
    exact: Optional[bool] = None
    error: str = ""


def evaluate_instance(preset: str, users: int, game_kind: str, utility: str, policy: str,
                      seed: int, max_rounds: int, compare_optimum: bool,
                      scenario: Optional[Scenario] = None) -> ResultRow:
    """Sample (or take) one scenario, play one game, and collect metrics."""
    try:
        if scenario is None:
            scenario = sample_scenario(PRESETS[preset](users, policy=policy), seed)
        outcome = play(scenario, GameConfig(kind=game_kind, utility=utility, max_rounds=max_rounds))
        m = outcome.metrics
        opt_nu = gap = exact = None
        if compare_optimum:
            opt = solver.solve_branch_and_bound(scenario)
            opt_nu = opt.nu
            gap, exact = solver.optimality_gap(m.nu, opt_nu)
        return ResultRow(
            seed=seed, users=users, game=game_kind, utility=utility, policy=policy,
            nu=m.nu, total_capacity_mbps=m.total_capacity_mbps, blocking=m.blocking_prob,
            jain=m.jain, rounds=m.rounds, converged=m.converged,
            opt_nu=opt_nu, gap=gap, exact=exact,
        )
    except Exception as exc:  # per-instance failures are recorded, the campaign continues
        return ResultRow(
            seed=seed, users=users, game=game_kind, utility=utility, policy=policy,
            nu=float("nan"), total_capacity_mbps=float("nan"), blocking=float("nan"),
            jain=float("nan"), rounds=0, converged=False,
            error=f"{type(exc).__name__}: {exc}",
        )


def _task_args(spec: CampaignSpec) -> list[tuple]:
    tasks = []
    for users in spec.user_counts:
        for kind, utility, policy in spec.games:
            for inst in range(spec.instances):
                tasks.append((spec.preset, users, kind, utility, policy,
                              spec.base_seed + inst, spec.max_rounds, spec.compare_optimum))
    return tasks


def run_campaign(spec: CampaignSpec) -> list[ResultRow]:
    """All rows of a campaign, in deterministic (user count, game, instance) order."""
    tasks = _task_args(spec)
    if spec.workers == 1:
        return [evaluate_instance(*args) for args in tasks]
    with ProcessPoolExecutor(max_workers=spec.workers) as pool:
        return list(pool.map(evaluate_instance, *zip(*tasks), chunksize=4))


def _mean(values: Sequence[float]) -> float:
    finite = [v for v in values if not math.isnan(v)]
    return sum(finite) / len(finite) if finite else float("nan")


def summarize(rows: Sequence[ResultRow], group_keys: Sequence[str]) -> list[dict]:
    """Per-group means plus empirical CDF samples for nu, capacity and fairness.

    ``group_keys`` are ResultRow field names (e.g. ("users", "game")).  The
    CDF entries are the sorted per-instance values; NaN fairness values
    (no-traffic instances) are skipped in means and CDFs.
    """
    if not rows:
        raise ValueError("summarize needs at least one row")
    valid = {f.name for f in fields(ResultRow)}
    for key in group_keys:
        if key not in valid:
            raise ValueError(f"unknown group key {key!r}")
    groups: dict[tuple, list[ResultRow]] = {}
    for row in rows:
        groups.setdefault(tuple(getattr(row, k) for k in group_keys), []).append(row)
    out = []
    for key in sorted(groups):
        members = groups[key]
        summary = {name: value for name, value in zip(group_keys, key)}
        summary["count"] = len(members)
        summary["mean_nu"] = _mean([r.nu for r in members])
        summary["mean_capacity_mbps"] = _mean([r.total_capacity_mbps for r in members])
        summary["mean_blocking"] = _mean([r.blocking for r in members])
        summary["mean_jain"] = _mean([r.jain for r in members])
        summary["mean_rounds"] = _mean([float(r.rounds) for r in members])
        summary["converged_fraction"] = _mean([1.0 if r.converged else 0.0 for r in members])
        exacts = [r.exact for r in members if r.exact is not None]
        summary["exact_fraction"] = (
            sum(1.0 for e in exacts if e) / len(exacts) if exacts else float("nan")
        )
        summary["cdf_nu"] = tuple(sorted(r.nu for r in members if not math.isnan(r.nu)))
        summary["cdf_capacity"] = tuple(
            sorted(r.total_capacity_mbps for r in members if not math.isnan(r.total_capacity_mbps))
        )
        summary["cdf_jain"] = tuple(sorted(r.jain for r in members if not math.isnan(r.jain)))
        out.append(summary)
    return out


def _format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


def write_rows_csv(rows: Sequence[ResultRow], path: str, timestamp_header: bool = True) -> None:
    """Write rows with 6-significant-digit decimals; header timestamp optional."""
    names = [f.name for f in fields(ResultRow)]
    lines = []
    if timestamp_header:
        lines.append(f"# generated {datetime.now(timezone.utc).isoformat()}")
    lines.append(",".join(names))
    for row in rows:
        lines.append(",".join(_format_cell(getattr(row, name)) for name in names))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")
