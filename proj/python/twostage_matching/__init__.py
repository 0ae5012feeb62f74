"""Two-stage stochastic bipartite matching: relaxations, rounding and oracles."""

from ._twostage import (
    EDGE_SCALE,
    CapExceeded,
    InfeasibleSolution,
    Instance,
    InputError,
    WeightMode,
    make_edge_gap_family,
    make_eight_cycle,
    make_random_instance,
    make_single_offline_node,
    opt_online,
    read_instance,
    round_augment_ratio,
    run_cli,
    sample_size_edge,
    sample_size_vertex,
    solve_lp_off,
    solve_lp_on,
    star_bound_h,
    star_crs_marginals,
)

__all__ = [
    "EDGE_SCALE",
    "CapExceeded",
    "InfeasibleSolution",
    "Instance",
    "InputError",
    "WeightMode",
    "make_edge_gap_family",
    "make_eight_cycle",
    "make_random_instance",
    "make_single_offline_node",
    "opt_online",
    "read_instance",
    "round_augment_ratio",
    "run_cli",
    "sample_size_edge",
    "sample_size_vertex",
    "solve_lp_off",
    "solve_lp_on",
    "star_bound_h",
    "star_crs_marginals",
]
