"""The three benchmark driving scenarios and their initial-state distributions.

Scenario 1: the robot tails a slower car in its own lane; holding the target
speed requires a lane change the short-horizon planner won't pay for.

Scenario 2: the robot should end up in the rightmost lane, but that lane is
occupied by a car alongside; the single-initialization planner gets stuck
against the collision bump instead of falling back and merging behind.

Scenario 3: a car ahead straddles a lane line and will commit to one of the
two lanes at a reveal step; the robot starts on the same line with an even
belief over the two merge directions.

All numeric constants here (true weights, speeds, gaps, deviations) are
package calibration choices, not measurements.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .costs import CostWeights, RoadGeometry, normalize_weights
from .dynamics import (
    NO_WIND,
    CarState,
    WindParams,
    WorldState,
    world_from_json,
    world_to_json,
)
from .errors import ConfigurationError
from .human import Belief, FixedSpeed, MergeAtReveal, hypothesis_from_json, hypothesis_to_json
from .planner import PlannerConfig
from .schema import SCHEMA_VERSION

WIND_MEAN = 0.02
WIND_STD = 0.01
REVEAL_STEP = 10


@dataclass(frozen=True)
class StartStd:
    """Per-field Gaussian deviations for sampling initial states."""

    lat: float = 0.03
    lon: float = 0.05
    speed: float = 0.05
    heading: float = 0.0


@dataclass(frozen=True)
class Scenario:
    id: int
    road: RoadGeometry
    T: int
    planner_cfg: PlannerConfig
    theta_true: CostWeights
    v_target: float
    nominal_start: WorldState
    start_std: StartStd
    true_human: object
    belief0: Belief
    wind: WindParams
    min_speed: "float | None" = None

    def __post_init__(self):
        if self.T <= self.planner_cfg.K:
            raise ConfigurationError("true horizon T must exceed the planning horizon K")
        if abs(float(np.linalg.norm(self.theta_true.w)) - 1.0) > 1e-9:
            raise ConfigurationError("theta_true must be unit-norm")


def build_scenario(scenario_id: int, wind_enabled: bool = False) -> Scenario:
    road = RoadGeometry()
    wind = WindParams(WIND_MEAN, WIND_STD, enabled=True) if wind_enabled else NO_WIND
    left, mid, right = road.lane_centers

    if scenario_id == 1:
        human = FixedSpeed(speed=0.12)
        return Scenario(
            id=1,
            road=road,
            T=15,
            planner_cfg=PlannerConfig(),
            theta_true=normalize_weights([1.0, 4.0, 4.0, 0.5, 0.0, 0.0, 0.0], label="true"),
            v_target=1.0,
            nominal_start=WorldState(
                robot=CarState(mid, 0.0, 0.0, 0.3),
                humans=(CarState(mid, 0.62, 0.0, 0.12),),
            ),
            start_std=StartStd(),
            true_human=human,
            belief0=Belief((human,), np.array([1.0])),
            wind=wind,
        )

    if scenario_id == 2:
        human = FixedSpeed(speed=0.15)
        return Scenario(
            id=2,
            road=road,
            T=15,
            planner_cfg=PlannerConfig(initializations=("straight",)),
            theta_true=normalize_weights([1.0, 4.0, 4.0, 0.5, 0.0, 0.0, 1.5], label="true"),
            v_target=1.0,
            nominal_start=WorldState(
                robot=CarState(mid, 0.0, 0.0, 0.55),
                humans=(CarState(0.06, 0.5, 0.0, 0.15),),
            ),
            start_std=StartStd(),
            true_human=human,
            belief0=Belief((human,), np.array([1.0])),
            wind=wind,
        )

    if scenario_id == 3:
        line = (mid + right) / 2.0
        merge_mid = MergeAtReveal(
            target_lane=1, reveal_step=REVEAL_STEP, merge_steer=1.0, cruise_speed=0.6
        )
        merge_right = MergeAtReveal(
            target_lane=2, reveal_step=REVEAL_STEP, merge_steer=1.0, cruise_speed=0.6
        )
        return Scenario(
            id=3,
            road=road,
            T=20,
            planner_cfg=PlannerConfig(),
            theta_true=normalize_weights([1.5, 4.0, 4.0, 0.8, 0.0, 0.0, 0.0], label="true"),
            v_target=0.8,
            nominal_start=WorldState(
                robot=CarState(line, 0.0, 0.0, 0.8),
                humans=(CarState(line, 0.5, 0.0, 0.6),),
            ),
            start_std=StartStd(),
            true_human=merge_mid,
            belief0=Belief((merge_mid, merge_right), np.array([0.5, 0.5])),
            wind=wind,
        )

    raise ConfigurationError(f"unknown scenario id {scenario_id!r}; expected 1, 2, or 3")


def with_true_human(s: Scenario, hypothesis) -> Scenario:
    """Same scenario with a different ground-truth human behavior."""
    return dataclasses.replace(s, true_human=hypothesis)


def sample_initial_state(s: Scenario, rng: np.random.Generator) -> WorldState:
    """Draw a start state around the nominal one.

    Every car is perturbed per-field (lat, lon, heading, speed draw order,
    robot first); lateral positions are clamped to the road and speeds to
    nonnegative. Zero deviations reproduce the nominal state exactly.
    """
    std = s.start_std
    half = s.road.road_half_width

    def jitter(car: CarState) -> CarState:
        lat = car.lat + rng.normal(0.0, std.lat)
        lon = car.lon + rng.normal(0.0, std.lon)
        heading = car.heading + rng.normal(0.0, std.heading)
        speed = car.speed + rng.normal(0.0, std.speed)
        return CarState(
            lat=float(min(max(lat, -half), half)),
            lon=float(lon),
            heading=float(heading),
            speed=float(max(speed, 0.0)),
        )

    nominal = s.nominal_start
    return WorldState(
        robot=jitter(nominal.robot),
        humans=tuple(jitter(h) for h in nominal.humans),
        t=nominal.t,
    )


# ---------------------------------------------------------------------------
# JSON forms
# ---------------------------------------------------------------------------

def scenario_to_json(s: Scenario) -> dict:
    if s.planner_cfg.terminal_cost is not None:
        raise ConfigurationError("a terminal-cost hook cannot be serialized")
    return {
        "schema_version": SCHEMA_VERSION,
        "id": s.id,
        "T": s.T,
        "v_target": s.v_target,
        "min_speed": s.min_speed,
        "road": {
            "lane_centers": list(s.road.lane_centers),
            "lane_width": s.road.lane_width,
            "road_half_width": s.road.road_half_width,
            "bump_lon_radius": s.road.bump_lon_radius,
            "bump_lat_radius": s.road.bump_lat_radius,
            "offroad_band": s.road.offroad_band,
        },
        "planner_cfg": {
            "K": s.planner_cfg.K,
            "gd_steps": s.planner_cfg.gd_steps,
            "step_size": s.planner_cfg.step_size,
            "initializations": list(s.planner_cfg.initializations),
            "warm_start": s.planner_cfg.warm_start,
        },
        "theta_true": {"label": s.theta_true.label, "w": [float(v) for v in s.theta_true.w]},
        "nominal_start": world_to_json(s.nominal_start),
        "start_std": dataclasses.asdict(s.start_std),
        "true_human": hypothesis_to_json(s.true_human),
        "belief0": {
            "hypotheses": [hypothesis_to_json(h) for h in s.belief0.hypotheses],
            "probs": [float(p) for p in s.belief0.probs],
        },
        "wind": {
            "mean_lat_force": s.wind.mean_lat_force,
            "std_lat_force": s.wind.std_lat_force,
            "enabled": s.wind.enabled,
        },
    }


def scenario_from_json(data: dict) -> Scenario:
    return Scenario(
        id=int(data["id"]),
        road=RoadGeometry(**data["road"]),
        T=int(data["T"]),
        planner_cfg=PlannerConfig(**data["planner_cfg"]),
        theta_true=CostWeights(np.array(data["theta_true"]["w"]), label=data["theta_true"]["label"]),
        v_target=float(data["v_target"]),
        nominal_start=world_from_json(data["nominal_start"]),
        start_std=StartStd(**data["start_std"]),
        true_human=hypothesis_from_json(data["true_human"]),
        belief0=Belief(
            tuple(hypothesis_from_json(h) for h in data["belief0"]["hypotheses"]),
            np.array(data["belief0"]["probs"]),
        ),
        wind=WindParams(**data["wind"]),
        min_speed=data.get("min_speed"),
    )
