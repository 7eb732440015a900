"""Cell-selection, channel-allocation and power-control games with backhaul limits.

Potential-game better-response dynamics (user game and channel game), an exact
optimum oracle over the same discrete decision space, the max-min backhaul
allocator, and a seeded Monte Carlo harness.
"""

from .backhaul import AllocationResult, ClusterDemand, allocate_all, allocate_cluster
from .game import (
    GameConfig,
    GameOutcome,
    GameState,
    MoveRecord,
    arbitrate_node_switch,
    better_response_step,
    enumerate_strategies,
    evaluate_utility,
    play,
    verify_equilibrium,
)
from .harness import CampaignSpec, ResultRow, run_campaign, summarize, write_rows_csv
from .metrics import (
    MetricRecord,
    blocking_probability,
    complexity_bound,
    jain_index,
    network_utility,
    total_capacity,
)
from .radio import (
    EfficiencyTable,
    InfeasibleProfileError,
    StrategyProfile,
    access_capacity,
    build_efficiency_table,
    channel_capacity,
    interference_free_range_m,
    sinr,
)
from .scenario import (
    NODE_PRESET_GRID,
    NODE_PRESET_OFFSET,
    AccessNode,
    BackhaulCluster,
    RadioConfig,
    Scenario,
    ScenarioFormatError,
    ScenarioSpec,
    ScenarioValidationError,
    candidate_nodes,
    channel_gain,
    dbm_to_milliwatts,
    load_scenario,
    sample_scenario,
    save_scenario,
    scenario_1_spec,
    scenario_2_spec,
)
from .solver import (
    Assignment,
    BudgetExceeded,
    OptResult,
    assignment_nu,
    feasible,
    optimality_gap,
    profile_to_assignment,
    solve_branch_and_bound,
    solve_exhaustive,
)

__version__ = "0.1.0"
