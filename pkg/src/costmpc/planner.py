"""Receding-horizon planner: belief-weighted objective, gradient descent,
and full-horizon replanning rollouts.

The planner optimizes a K-step control sequence against the sum of
per-step costs, where each step's collision term is averaged over the
belief's behavior hypotheses. Humans are open loop and the robot's motion
does not influence them, so human trajectories are simulated once per plan
and shared across hypotheses only through the collision feature.

Gradients are exact: reverse accumulation through the Euler dynamics chain,
vectorized over all control initializations at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernel import cost_and_grad as _fast_cost_and_grad
from ._kernel import forward as _fast_forward
from ._kernel import road_vector
from .costs import CostWeights, RoadGeometry, cost, cost_field
from .dynamics import (
    ACCEL_MAX,
    DT,
    STEER_MAX,
    Control,
    WorldState,
    step_car,
    step_world_true,
    world_from_json,
    world_to_json,
)
from .errors import ConfigurationError, RolloutDivergedError
from .human import Belief, _policy_control, human_control, update_belief
from .schema import SCHEMA_VERSION
from .seeding import child_rng

# Constant steering bias of each named control initialization.
INIT_STEER = {"straight": 0.0, "right": -0.2, "left": 0.2}

_CONTROL_BOUND = np.array([STEER_MAX, ACCEL_MAX])


@dataclass(frozen=True)
class ControlSequence:
    """A K-step open-loop plan; every entry is bound-clamped on construction."""

    controls: tuple

    def __post_init__(self):
        controls = tuple(self.controls)
        if len(controls) < 1:
            raise ConfigurationError("a control sequence needs at least one step")
        object.__setattr__(self, "controls", controls)

    def as_array(self) -> np.ndarray:
        return np.array([[u.steer, u.accel] for u in self.controls])

    @staticmethod
    def from_array(arr: np.ndarray) -> "ControlSequence":
        return ControlSequence(tuple(Control(float(s), float(a)) for s, a in arr))


@dataclass(frozen=True)
class PlannerConfig:
    """Horizon, descent schedule, and initialization set for one planner.

    ``terminal_cost`` is an optional hook: a callable mapping the batch of
    robot states one step past the horizon, shape (B, 4) as (lat, lon,
    heading, speed), to ``(values, grads)`` of shapes (B,) and (B, 4). Its
    value is added to the planning objective and its gradient seeds the
    reverse pass, so plans can be biased by an externally supplied estimate
    of cost-to-go beyond the horizon.
    """

    K: int = 5
    gd_steps: int = 100
    step_size: float = 0.05
    initializations: tuple = ("straight", "right", "left")
    warm_start: bool = True
    terminal_cost: "callable | None" = None

    def __post_init__(self):
        object.__setattr__(self, "initializations", tuple(self.initializations))
        if self.K < 1:
            raise ConfigurationError("K must be >= 1")
        if self.gd_steps < 0:
            raise ConfigurationError("gd_steps must be >= 0")
        if self.step_size <= 0:
            raise ConfigurationError("step_size must be positive")
        if not self.initializations:
            raise ConfigurationError("at least one initialization is required")
        for name in self.initializations:
            if name not in INIT_STEER:
                raise ConfigurationError(
                    f"unknown initialization {name!r}; known: {sorted(INIT_STEER)}"
                )


@dataclass(frozen=True)
class Rollout:
    """Executed closed-loop trajectory: T (state, control) pairs plus scores."""

    steps: tuple
    per_step_true_cost: tuple
    cumulative_true_cost: float
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        object.__setattr__(self, "per_step_true_cost", tuple(float(c) for c in self.per_step_true_cost))
        if len(self.steps) != len(self.per_step_true_cost):
            raise ConfigurationError("steps and per-step costs disagree in length")
        if abs(self.cumulative_true_cost - sum(self.per_step_true_cost)) > 1e-9:
            raise ConfigurationError("cumulative cost does not match the per-step sum")


def _human_tracks(b: Belief, w: WorldState, K: int, road: RoadGeometry, dt: float, friction: float):
    """Predicted human positions per hypothesis, aligned with cost steps.

    Returns (lat, lon) arrays of shape (H, M, K); entry [h, m, i] is human
    m's position at time w.t + i under hypothesis h, before that step's
    control is applied.
    """
    n_hyp = len(b.hypotheses)
    n_hum = len(w.humans)
    hum_lat = np.zeros((n_hyp, n_hum, K))
    hum_lon = np.zeros((n_hyp, n_hum, K))
    for hi, h in enumerate(b.hypotheses):
        for m, car in enumerate(w.humans):
            for i in range(K):
                hum_lat[hi, m, i] = car.lat
                hum_lon[hi, m, i] = car.lon
                car = step_car(car, _policy_control(h, car, w.t + i, road, friction), dt, friction)
    return hum_lat, hum_lon


def _forward(x0: np.ndarray, U: np.ndarray, dt: float, friction: float) -> np.ndarray:
    """Batched Euler rollout: states (B, K+1, 4) from one shared start state."""
    B, K = U.shape[0], U.shape[1]
    X = np.empty((B, K + 1, 4))
    X[:, 0] = x0
    for i in range(K):
        lat, lon, head, spd = X[:, i, 0], X[:, i, 1], X[:, i, 2], X[:, i, 3]
        X[:, i + 1, 0] = lat + dt * spd * np.sin(head)
        X[:, i + 1, 1] = lon + dt * spd * np.cos(head)
        X[:, i + 1, 2] = head + dt * spd * U[:, i, 0]
        X[:, i + 1, 3] = spd + dt * (U[:, i, 1] - friction * spd)
    return X


def _objective_and_grad(
    theta_w: np.ndarray,
    x0: np.ndarray,
    U: np.ndarray,
    hum_lat: np.ndarray,
    hum_lon: np.ndarray,
    probs: np.ndarray,
    road: RoadGeometry,
    v_target: float,
    dt: float,
    friction: float,
    terminal_cost=None,
):
    """Objective values (B,) and exact control gradients (B, K, 2).

    The objective sums costs at states x_0..x_{K-1} paired with controls
    u_0..u_{K-1}; x_0 is the fixed current state, so without a terminal
    term the last control has zero gradient by construction.
    """
    B, K = U.shape[0], U.shape[1]
    X = _forward(x0, U, dt, friction)
    c, d_lat, d_lon, d_spd = cost_field(
        theta_w,
        road,
        v_target,
        X[:, :K, 0],
        X[:, :K, 1],
        X[:, :K, 3],
        hum_lat[:, :, None, :],
        hum_lon[:, :, None, :],
        probs,
        with_grad=True,
    )
    J = c.sum(axis=1)

    lam = np.zeros((B, 4))
    if terminal_cost is not None:
        values, grads = terminal_cost(X[:, K])
        J = J + np.asarray(values, dtype=float).reshape(B)
        lam = np.asarray(grads, dtype=float).reshape(B, 4).copy()

    grad = np.empty((B, K, 2))
    for i in reversed(range(K)):
        head = X[:, i, 2]
        spd = X[:, i, 3]
        # controls at step i only touch the objective through x_{i+1}
        grad[:, i, 0] = dt * spd * lam[:, 2]
        grad[:, i, 1] = dt * lam[:, 3]
        sin_h = np.sin(head)
        cos_h = np.cos(head)
        new_lat = lam[:, 0] + d_lat[:, i]
        new_lon = lam[:, 1] + d_lon[:, i]
        new_head = dt * spd * (cos_h * lam[:, 0] - sin_h * lam[:, 1]) + lam[:, 2]
        new_spd = (
            dt * (sin_h * lam[:, 0] + cos_h * lam[:, 1])
            + dt * U[:, i, 0] * lam[:, 2]
            + (1.0 - dt * friction) * lam[:, 3]
            + d_spd[:, i]
        )
        lam = np.stack([new_lat, new_lon, new_head, new_spd], axis=1)
    return J, grad


def plan_objective(
    theta: CostWeights,
    w: WorldState,
    b: Belief,
    seq: ControlSequence,
    road: RoadGeometry,
    v_target: float,
    dt: float = DT,
    friction: float = 0.0,
) -> float:
    """Belief-weighted K-step cost of one control sequence from state ``w``."""
    K = len(seq.controls)
    U = seq.as_array()[None]
    hum_lat, hum_lon = _human_tracks(b, w, K, road, dt, friction)
    X = _forward(w.robot.as_array(), U, dt, friction)
    c = cost_field(
        theta.w,
        road,
        v_target,
        X[:, :K, 0],
        X[:, :K, 1],
        X[:, :K, 3],
        hum_lat[:, :, None, :],
        hum_lon[:, :, None, :],
        b.probs,
    )
    return float(c.sum())


def plan_gradient(
    theta: CostWeights,
    w: WorldState,
    b: Belief,
    seq: ControlSequence,
    road: RoadGeometry,
    v_target: float,
    dt: float = DT,
    friction: float = 0.0,
) -> np.ndarray:
    """Exact gradient of :func:`plan_objective` w.r.t. every (steer, accel)."""
    K = len(seq.controls)
    hum_lat, hum_lon = _human_tracks(b, w, K, road, dt, friction)
    _, grad = _objective_and_grad(
        theta.w,
        w.robot.as_array(),
        seq.as_array()[None],
        hum_lat,
        hum_lon,
        b.probs,
        road,
        v_target,
        dt,
        friction,
    )
    return grad[0]


def optimize_plan(
    theta: CostWeights,
    w: WorldState,
    b: Belief,
    cfg: PlannerConfig,
    road: RoadGeometry,
    v_target: float,
    dt: float = DT,
    friction: float = 0.0,
    extra_inits: tuple = (),
) -> "tuple[ControlSequence, float]":
    """Fixed-step gradient descent from every initialization; best iterate wins.

    All initializations descend in one batch. Controls are clamped to their
    bounds after every update, the lowest-objective iterate ever visited is
    tracked per initialization, and the best across initializations is
    returned. Deterministic. ``extra_inits`` lets callers append plans (the
    rollout loop adds its shifted previous plan as a warm start).
    """
    K = cfg.K
    inits = [np.tile([[INIT_STEER[name], 0.0]], (K, 1)) for name in cfg.initializations]
    for seq in extra_inits:
        if len(seq.controls) != K:
            raise ConfigurationError("warm-start plan length does not match K")
        inits.append(seq.as_array())
    U = np.stack(inits)

    hum_lat, hum_lon = _human_tracks(b, w, K, road, dt, friction)
    x0 = w.robot.as_array()
    theta_w = np.ascontiguousarray(theta.w)
    probs = np.ascontiguousarray(b.probs)
    road_vec = road_vector(road)
    B = U.shape[0]
    zero_values = np.zeros(B)
    zero_grads = np.zeros((B, 4))

    # jitted twin of _objective_and_grad; a property test pins them together
    def evaluate(cands):
        X = _fast_forward(x0, cands, dt, friction)
        if cfg.terminal_cost is not None:
            values, grads = cfg.terminal_cost(X[:, K])
            values = np.asarray(values, dtype=float).reshape(B)
            grads = np.ascontiguousarray(np.asarray(grads, dtype=float).reshape(B, 4))
        else:
            values, grads = zero_values, zero_grads
        return _fast_cost_and_grad(
            theta_w, X, cands, hum_lat, hum_lon, probs,
            road_vec, v_target, dt, friction, values, grads,
        )

    J, G = evaluate(U)
    best_J = J.copy()
    best_U = U.copy()
    for _ in range(cfg.gd_steps):
        U = np.clip(U - cfg.step_size * G, -_CONTROL_BOUND, _CONTROL_BOUND)
        J, G = evaluate(U)
        improved = J < best_J
        best_J[improved] = J[improved]
        best_U[improved] = U[improved]

    winner = int(np.argmin(best_J))
    return ControlSequence.from_array(best_U[winner]), float(best_J[winner])


def _check_world_finite(w: WorldState) -> bool:
    cars = (w.robot,) + w.humans
    return all(
        math.isfinite(c.lat) and math.isfinite(c.lon)
        and math.isfinite(c.heading) and math.isfinite(c.speed)
        for c in cars
    )


def mpc_rollout(
    theta_plan: CostWeights,
    theta_true: CostWeights,
    scenario,
    seed: int,
    initial_state: "WorldState | None" = None,
) -> Rollout:
    """Plan, execute the first control, observe, replan, for T steps.

    Each executed (state, control) pair is scored under ``theta_true``; the
    belief over human behavior is updated from the observed human control
    after every step. With warm starting enabled the previous plan, shifted
    by one with its last control repeated, joins the initialization set.
    Randomness enters only through wind, so windless rollouts are
    seed-independent.
    """
    s = scenario
    cfg = s.planner_cfg
    w = initial_state if initial_state is not None else s.nominal_start
    belief = s.belief0
    wind_rng = child_rng(seed, "wind") if s.wind.enabled else None

    steps = []
    costs_log = []
    warm = None
    for _ in range(s.T):
        extra = (warm,) if (cfg.warm_start and warm is not None) else ()
        seq, _ = optimize_plan(
            theta_plan, w, belief, cfg, s.road, s.v_target, extra_inits=extra
        )
        u = seq.controls[0]
        steps.append((w, u))
        costs_log.append(cost(theta_true, w, u, s.road, s.v_target))

        u_humans = tuple(
            human_control(s.true_human, w, w.t, index=m, road=s.road)
            for m in range(len(w.humans))
        )
        w_next = step_world_true(
            w, u, u_humans, s.wind, wind_rng, min_speed=s.min_speed
        )
        if not _check_world_finite(w_next):
            raise RolloutDivergedError(
                f"non-finite world state at step {w.t + 1}",
                partial_steps=tuple(steps),
                partial_costs=tuple(costs_log),
            )

        if w.humans and len(belief.hypotheses) > 1:
            predicted = [
                human_control(h, w, w.t, index=0, road=s.road)
                for h in belief.hypotheses
            ]
            belief = update_belief(belief, u_humans[0], predicted)

        warm = ControlSequence(seq.controls[1:] + (seq.controls[-1],))
        w = w_next

    return Rollout(
        steps=tuple(steps),
        per_step_true_cost=tuple(costs_log),
        cumulative_true_cost=float(sum(costs_log)),
        seed=seed,
    )


def rollout_to_json(r: Rollout) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "seed": r.seed,
        "states": [world_to_json(w) for w, _ in r.steps],
        "controls": [[u.steer, u.accel] for _, u in r.steps],
        "per_step_true_cost": list(r.per_step_true_cost),
        "cumulative_true_cost": r.cumulative_true_cost,
    }


def rollout_from_json(data: dict) -> Rollout:
    states = [world_from_json(s) for s in data["states"]]
    controls = [Control(float(s), float(a)) for s, a in data["controls"]]
    return Rollout(
        steps=tuple(zip(states, controls)),
        per_step_true_cost=tuple(data["per_step_true_cost"]),
        cumulative_true_cost=float(data["cumulative_true_cost"]),
        seed=int(data["seed"]),
    )
