"""Discrete opinion dynamics under media recommendations: grid model,
best-response engine, closed-form two-block theory, network generators,
Monte-Carlo harness, and the exponential lower-bound gadgets."""

from .model import (
    ModelParams,
    OpinionGrid,
    Profile,
    SocialGraph,
    agent_cost,
    as_fraction,
    make_profile,
    potential,
    potential_scaled,
    profile_values,
    recommend,
)
from .dynamics import (
    CONVERGED,
    CYCLE,
    STEP_LIMIT,
    Trajectory,
    UpdateOutcome,
    async_run,
    async_step,
    best_response,
    improving_set,
    is_stable,
    scheduled_run,
    sync_run,
    sync_step,
    write_trace,
)
from .theory import (
    ConsensusRegime,
    Thresholds,
    TwoBlockParams,
    async_step_bound,
    check_relations,
    classify,
    delta_to_zero_bound,
    interval_emptiness,
    best_response_target,
    thresholds,
    twoblock_stable,
    twoblock_sync_run,
)
from .graphs import (
    HomophilyReport,
    Partition,
    assign_weights,
    erdos_renyi,
    homophily,
    hyperbolic_rgg,
    kernighan_lin,
    load_edge_list,
    random_partition,
    stochastic_two_block,
    symmetric_two_block,
    watts_strogatz_like,
    write_edge_list,
)
from .harness import (
    ExperimentSpec,
    InitScheme,
    RunRecord,
    estimate_consensus_probability,
    extreme_divergent,
    fixed_mean,
    general_divergent,
    non_divergent,
    relaxed_consensus,
    run_trial,
    sample_initial_opinions,
    sweep,
    write_csv,
)
from .gadgets import (
    GadgetChain,
    exponential_schedule,
    expected_moves,
    gadget_chain,
    six_gadget,
    verify_schedule,
)

__version__ = "0.1.0"
