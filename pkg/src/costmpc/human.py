"""Human-driver behavior hypotheses, prediction, and belief updating.

Human cars are open loop: their policies read only their own car state and
the timestep, never the robot. A hypothesis is either a fixed cruise speed
or a cruise that merges toward a target lane once a reveal step is reached.
The robot maintains a belief (probability vector) over hypotheses and
updates it from observed human controls with a Gaussian likelihood.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .costs import RoadGeometry
from .dynamics import DT, CarState, Control, WorldState, step_car
from .errors import ArityError

LIKELIHOOD_SIGMA = 0.05

# Lateral slack around the target lane center; inside it the merge policy
# stops steering.
MERGE_TOLERANCE = 0.02


@dataclass(frozen=True)
class FixedSpeed:
    """Cruise at a constant speed, never steering."""

    speed: float

    def __post_init__(self):
        if self.speed < 0:
            raise ValueError("cruise speed must be >= 0")


@dataclass(frozen=True)
class MergeAtReveal:
    """Cruise until ``reveal_step``, then steer toward a target lane center."""

    target_lane: int
    reveal_step: int
    merge_steer: float
    cruise_speed: float

    def __post_init__(self):
        if self.target_lane not in (0, 1, 2):
            raise ValueError("target_lane must be 0, 1, or 2")
        if self.cruise_speed < 0:
            raise ValueError("cruise speed must be >= 0")
        if self.reveal_step < 0:
            raise ValueError("reveal_step must be >= 0")


# A hypothesis is one of the two policy types above.
HumanHypothesis = "FixedSpeed | MergeAtReveal"


@dataclass(frozen=True)
class Belief:
    """Probability vector over behavior hypotheses."""

    hypotheses: tuple
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "hypotheses", tuple(self.hypotheses))
        probs = np.asarray(self.probs, dtype=float).reshape(-1).copy()
        if len(probs) != len(self.hypotheses):
            raise ArityError(
                f"{len(probs)} probabilities for {len(self.hypotheses)} hypotheses"
            )
        if np.any(probs < 0) or np.any(probs > 1):
            raise ValueError("probabilities must lie in [0, 1]")
        if abs(float(probs.sum()) - 1.0) > 1e-9:
            raise ValueError(f"probabilities sum to {probs.sum()}, not 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)


def _cruise_accel(speed_setpoint: float, friction: float) -> float:
    # friction-compensating accel at the setpoint: with friction f the update
    # speed' = s + dt*(f*setpoint - f*s) relaxes s toward the setpoint.
    return friction * speed_setpoint


def _policy_control(h, car: CarState, t: int, road: RoadGeometry, friction: float) -> Control:
    if isinstance(h, FixedSpeed):
        return Control(0.0, _cruise_accel(h.speed, friction))
    if isinstance(h, MergeAtReveal):
        accel = _cruise_accel(h.cruise_speed, friction)
        if t < h.reveal_step:
            return Control(0.0, accel)
        target = road.lane_centers[h.target_lane]
        if abs(car.lat - target) <= MERGE_TOLERANCE:
            return Control(0.0, accel)
        return Control(math.copysign(h.merge_steer, target - car.lat), accel)
    raise TypeError(f"unknown hypothesis type: {type(h).__name__}")


def human_control(
    h,
    w: WorldState,
    t: int,
    index: int = 0,
    road: "RoadGeometry | None" = None,
    friction: float = 0.0,
) -> Control:
    """Control the hypothesis assigns to human car ``index`` at timestep ``t``."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return _policy_control(h, w.humans[index], t, road or RoadGeometry(), friction)


def predict_human_trajectory(
    h,
    w: WorldState,
    horizon: int,
    index: int = 0,
    road: "RoadGeometry | None" = None,
    dt: float = DT,
    friction: float = 0.0,
) -> "list[Control]":
    """Open-loop control sequence for human ``index`` over the next ``horizon`` steps.

    Simulates the policy through the deterministic planning dynamics; human
    cars ignore the robot, so only the one car needs stepping.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    road = road or RoadGeometry()
    car = w.humans[index]
    controls = []
    for i in range(horizon):
        u = _policy_control(h, car, w.t + i, road, friction)
        controls.append(u)
        car = step_car(car, u, dt, friction)
    return controls


def update_belief(
    b: Belief,
    observed: Control,
    predicted_per_hypothesis: "list[Control]",
    likelihood_sigma: float = LIKELIHOOD_SIGMA,
) -> Belief:
    """Bayes update from one observed human control.

    Posterior mass for each hypothesis is prior times a Gaussian likelihood
    exp(-|observed - predicted|^2 / (2 sigma^2)). If every posterior weight
    underflows to zero the update is uninformative at this precision; the
    belief falls back to uniform over the hypotheses with nonzero prior (so
    an absorbing prior stays absorbed) and a warning is emitted.
    """
    if len(predicted_per_hypothesis) != len(b.hypotheses):
        raise ArityError(
            f"{len(predicted_per_hypothesis)} predictions for {len(b.hypotheses)} hypotheses"
        )
    obs = observed.as_array()
    sq_err = np.array(
        [float(np.sum((obs - p.as_array()) ** 2)) for p in predicted_per_hypothesis]
    )
    weights = b.probs * np.exp(-sq_err / (2.0 * likelihood_sigma**2))
    total = float(weights.sum())
    if total == 0.0:
        warnings.warn(
            "observation is incompatible with every hypothesis at this precision; "
            "falling back to a uniform posterior over the prior support",
            RuntimeWarning,
            stacklevel=2,
        )
        support = (b.probs > 0).astype(float)
        return Belief(b.hypotheses, support / support.sum())
    return Belief(b.hypotheses, weights / total)


# ---------------------------------------------------------------------------
# JSON forms (used by scenario config files)
# ---------------------------------------------------------------------------

def hypothesis_to_json(h) -> dict:
    if isinstance(h, FixedSpeed):
        return {"kind": "fixed_speed", "speed": h.speed}
    if isinstance(h, MergeAtReveal):
        return {
            "kind": "merge_at_reveal",
            "target_lane": h.target_lane,
            "reveal_step": h.reveal_step,
            "merge_steer": h.merge_steer,
            "cruise_speed": h.cruise_speed,
        }
    raise TypeError(f"unknown hypothesis type: {type(h).__name__}")


def hypothesis_from_json(data: dict):
    kind = data.get("kind")
    if kind == "fixed_speed":
        return FixedSpeed(speed=float(data["speed"]))
    if kind == "merge_at_reveal":
        return MergeAtReveal(
            target_lane=int(data["target_lane"]),
            reveal_step=int(data["reveal_step"]),
            merge_steer=float(data["merge_steer"]),
            cruise_speed=float(data["cruise_speed"]),
        )
    raise ValueError(f"unknown hypothesis kind: {kind!r}")
