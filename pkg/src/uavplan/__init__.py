"""Connected placement planning for capacity-limited aerial base stations."""

from .scenario import (RfParams, UserNode, HoverSite, Scenario, ScenarioError,
                       build_grid, generate_users, make_scenario,
                       save_scenario, load_scenario)
from .channel import (LinkBudget, RateTable, RATE_QUANTUM, RATE_TOL,
                      pathloss, p_los, link_budget, expected_rate,
                      build_rate_table)
from .netgraph import NetGraph, HopField, NoPathError, build_graph
from .assignment import AssignmentResult, OracleCache, max_assignment, f_value
from .submodular import KnapsackInstance, knapsack_submodular_max, greedy_augment
from .planner import (Plan, MetricTree, InfeasibleError, compute_d_bound,
                      constrained_max_throughput, connect_via_mst, appro_alg,
                      brute_force_opt, validate_plan, spectrum_coloring,
                      greedy_label_baseline, mcs_baseline, run_algorithm,
                      save_plan, load_plan)
from .simcli import (SweepConfig, Metrics, MobilityConfig, run_sweep,
                     fly_energy, mobility_sim)

__version__ = "0.1.0"
