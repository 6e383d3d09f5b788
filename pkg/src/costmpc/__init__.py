"""Driving simulation with a gradient-based replanning controller and
zeroth-order search for the cost weights the planner should optimize."""

from .costs import (
    CostWeights,
    FeatureVector,
    HeatmapGrid,
    RoadGeometry,
    cost,
    cumulative_true_cost,
    features,
    heatmap,
    load_weights,
    normalize_weights,
    read_heatmap_csv,
    save_weights,
    write_heatmap_csv,
)
from .costdesign import (
    CandidateRecord,
    DesignConfig,
    cma_search,
    expected_true_cost,
    fitness,
    history_to_csv,
    random_search,
    sample_unit_weights,
)
from .dynamics import (
    ACCEL_MAX,
    DT,
    NO_WIND,
    STEER_MAX,
    CarState,
    Control,
    WindParams,
    WorldState,
    step_car,
    step_world_planning,
    step_world_true,
)
from .errors import (
    ArityError,
    ConfigurationError,
    InvalidStateError,
    NormalizationError,
    RolloutDivergedError,
)
from .harness import (
    ExperimentResult,
    compare_experiment,
    contingency_check,
    generalization_experiment,
)
from .human import (
    Belief,
    FixedSpeed,
    MergeAtReveal,
    human_control,
    predict_human_trajectory,
    update_belief,
)
from .planner import (
    ControlSequence,
    PlannerConfig,
    Rollout,
    mpc_rollout,
    optimize_plan,
    plan_gradient,
    plan_objective,
    rollout_from_json,
    rollout_to_json,
)
from .scenarios import (
    Scenario,
    StartStd,
    build_scenario,
    sample_initial_state,
    scenario_from_json,
    scenario_to_json,
    with_true_human,
)
from .schema import SCHEMA_VERSION
from .seeding import child_rng, child_seed, child_sequence

__version__ = "0.1.0"

__all__ = [
    "ACCEL_MAX",
    "ArityError",
    "Belief",
    "CandidateRecord",
    "CarState",
    "ConfigurationError",
    "Control",
    "ControlSequence",
    "CostWeights",
    "DT",
    "DesignConfig",
    "ExperimentResult",
    "FeatureVector",
    "FixedSpeed",
    "HeatmapGrid",
    "InvalidStateError",
    "MergeAtReveal",
    "NO_WIND",
    "NormalizationError",
    "PlannerConfig",
    "RoadGeometry",
    "Rollout",
    "RolloutDivergedError",
    "SCHEMA_VERSION",
    "STEER_MAX",
    "Scenario",
    "StartStd",
    "WindParams",
    "WorldState",
    "build_scenario",
    "child_rng",
    "child_seed",
    "child_sequence",
    "cma_search",
    "compare_experiment",
    "contingency_check",
    "cost",
    "cumulative_true_cost",
    "expected_true_cost",
    "features",
    "fitness",
    "generalization_experiment",
    "heatmap",
    "history_to_csv",
    "human_control",
    "load_weights",
    "mpc_rollout",
    "normalize_weights",
    "optimize_plan",
    "plan_gradient",
    "plan_objective",
    "predict_human_trajectory",
    "random_search",
    "read_heatmap_csv",
    "rollout_from_json",
    "rollout_to_json",
    "sample_initial_state",
    "sample_unit_weights",
    "save_weights",
    "scenario_from_json",
    "scenario_to_json",
    "step_car",
    "step_world_planning",
    "step_world_true",
    "update_belief",
    "with_true_human",
    "write_heatmap_csv",
]
