"""Command-line campaign runner writing one CSV per invocation."""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from . import harness, solver
from .scenario import load_scenario

__all__ = ["cli_main", "main"]

_POLICIES = {"nearest": "nearest-1", "all": "all-in-range"}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cellgame",
        description="Play cell-selection/channel/power games over random scenarios "
                    "and write per-instance metrics as CSV.",
    )
    parser.add_argument("--preset", choices=["scenario-1", "scenario-2"],
                        help="scenario preset (required unless --scenario-file is given)")
    parser.add_argument("--users", type=str, default="12",
                        help="user count or comma list, e.g. 12 or 4,8,12")
    parser.add_argument("--game", choices=["u", "c"], default="c")
    parser.add_argument("--utility", choices=["log", "cap"], default="log")
    parser.add_argument("--policy", choices=["nearest", "all"], default="all")
    parser.add_argument("--instances", type=int, default=1)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--compare-opt", action="store_true",
                        help="attach the exact optimum, gap and exact-match flag per row")
    parser.add_argument("--max-rounds", type=int, default=1000)
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--out", required=True, help="output CSV path")
    parser.add_argument("--no-header-timestamp", action="store_true",
                        help="suppress the timestamp comment line (byte-identical reruns)")
    parser.add_argument("--scenario-file", type=str, default=None,
                        help="play on one saved scenario instead of sampling")
    return parser


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        user_counts = tuple(int(tok) for tok in args.users.split(",") if tok.strip())
    except ValueError:
        print(f"error: cannot parse --users {args.users!r}", file=sys.stderr)
        return 2
    if not user_counts:
        print("error: --users must name at least one user count", file=sys.stderr)
        return 2

    policy = _POLICIES[args.policy]
    try:
        if args.scenario_file:
            scenario = load_scenario(args.scenario_file)
            rows = [
                harness.evaluate_instance(
                    preset="scenario-2" if args.compare_opt else "scenario-1",
                    users=scenario.n_users, game_kind=args.game, utility=args.utility,
                    policy=scenario.candidate_policy,
                    seed=scenario.seed if scenario.seed is not None else args.seed,
                    max_rounds=args.max_rounds, compare_optimum=args.compare_opt,
                    scenario=scenario,
                )
            ]
        else:
            if not args.preset:
                print("error: --preset is required unless --scenario-file is given",
                      file=sys.stderr)
                return 2
            spec = harness.CampaignSpec(
                preset=args.preset,
                user_counts=user_counts,
                games=((args.game, args.utility, policy),),
                instances=args.instances,
                base_seed=args.seed,
                compare_optimum=args.compare_opt,
                output_path=args.out,
                max_rounds=args.max_rounds,
                workers=args.workers,
            )
            rows = harness.run_campaign(spec)
        harness.write_rows_csv(rows, args.out, timestamp_header=not args.no_header_timestamp)
    except solver.BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(cli_main())
