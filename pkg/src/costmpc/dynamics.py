"""Kinematic car model and world stepping.

Two transition functions are exposed: :func:`step_world_true` advances the
world under the true dynamics (optionally perturbed by lateral wind) and
:func:`step_world_planning` advances it under the deterministic planning
model. With wind disabled the two coincide exactly.

All functions are pure; randomness enters only through an explicit
Generator argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ArityError, InvalidStateError

DT = 0.1
STEER_MAX = 1.0
ACCEL_MAX = 1.0


@dataclass(frozen=True)
class CarState:
    """Pose and speed of one car.

    ``lat`` is the lateral road offset, ``lon`` the longitudinal position,
    ``heading`` is in radians with 0 pointing straight down the road, and
    ``speed`` is signed (reverse is allowed unless a scenario clamps it).
    """

    lat: float
    lon: float
    heading: float
    speed: float

    def as_array(self) -> np.ndarray:
        return np.array([self.lat, self.lon, self.heading, self.speed], dtype=float)


@dataclass(frozen=True)
class Control:
    """Steering and acceleration input, clamped to the actuator bounds."""

    steer: float
    accel: float

    def __post_init__(self):
        object.__setattr__(self, "steer", float(min(max(self.steer, -STEER_MAX), STEER_MAX)))
        object.__setattr__(self, "accel", float(min(max(self.accel, -ACCEL_MAX), ACCEL_MAX)))

    def as_array(self) -> np.ndarray:
        return np.array([self.steer, self.accel], dtype=float)


@dataclass(frozen=True)
class WorldState:
    """Robot car, human cars, and the current timestep."""

    robot: CarState
    humans: tuple
    t: int = 0

    def __post_init__(self):
        object.__setattr__(self, "humans", tuple(self.humans))


@dataclass(frozen=True)
class WindParams:
    """Lateral wind acting on the robot in the true dynamics only."""

    mean_lat_force: float = 0.0
    std_lat_force: float = 0.0
    enabled: bool = False

    def __post_init__(self):
        if self.std_lat_force < 0:
            raise ValueError("std_lat_force must be >= 0")


NO_WIND = WindParams()


def _check_finite(s: CarState) -> None:
    if not (
        math.isfinite(s.lat)
        and math.isfinite(s.lon)
        and math.isfinite(s.heading)
        and math.isfinite(s.speed)
    ):
        raise InvalidStateError(f"non-finite car state: {s}")


def step_car(s: CarState, u: Control, dt: float = DT, friction: float = 0.0) -> CarState:
    """Advance one car by one explicit Euler step.

    lat' = lat + dt * speed * sin(heading)
    lon' = lon + dt * speed * cos(heading)
    heading' = heading + dt * speed * steer
    speed' = speed + dt * (accel - friction * speed)
    """
    _check_finite(s)
    if dt <= 0:
        raise ValueError("dt must be positive")
    return CarState(
        lat=s.lat + dt * s.speed * math.sin(s.heading),
        lon=s.lon + dt * s.speed * math.cos(s.heading),
        heading=s.heading + dt * s.speed * u.steer,
        speed=s.speed + dt * (u.accel - friction * s.speed),
    )


def step_world_true(
    w: WorldState,
    u_robot: Control,
    u_humans: "list[Control] | tuple[Control, ...]",
    wind: WindParams = NO_WIND,
    rng: "np.random.Generator | None" = None,
    dt: float = DT,
    friction: float = 0.0,
    min_speed: "float | None" = None,
) -> WorldState:
    """Advance the world under the true dynamics.

    With ``wind.enabled`` the robot's lateral position picks up an extra
    dt * g displacement, g ~ Normal(mean_lat_force, std_lat_force) drawn
    from ``rng``. No draw is consumed when wind is disabled, so disabled
    runs are seed-independent.
    """
    if len(u_humans) != len(w.humans):
        raise ArityError(
            f"{len(u_humans)} human controls for {len(w.humans)} human cars"
        )
    robot = step_car(w.robot, u_robot, dt, friction)
    if wind.enabled:
        if rng is None:
            raise ValueError("wind is enabled but no rng was provided")
        gust = wind.mean_lat_force + wind.std_lat_force * rng.standard_normal()
        robot = CarState(robot.lat + dt * gust, robot.lon, robot.heading, robot.speed)
    if min_speed is not None and robot.speed < min_speed:
        robot = CarState(robot.lat, robot.lon, robot.heading, min_speed)
    humans = tuple(step_car(h, u, dt, friction) for h, u in zip(w.humans, u_humans))
    return WorldState(robot=robot, humans=humans, t=w.t + 1)


def step_world_planning(
    w: WorldState,
    u_robot: Control,
    u_humans: "list[Control] | tuple[Control, ...]",
    dt: float = DT,
    friction: float = 0.0,
) -> WorldState:
    """Advance the world under the planning model: deterministic, no wind."""
    return step_world_true(w, u_robot, u_humans, NO_WIND, None, dt, friction)


def world_to_json(w: WorldState) -> dict:
    return {
        "robot": [w.robot.lat, w.robot.lon, w.robot.heading, w.robot.speed],
        "humans": [[h.lat, h.lon, h.heading, h.speed] for h in w.humans],
        "t": w.t,
    }


def world_from_json(data: dict) -> WorldState:
    return WorldState(
        robot=CarState(*(float(v) for v in data["robot"])),
        humans=tuple(CarState(*(float(v) for v in h)) for h in data["humans"]),
        t=int(data.get("t", 0)),
    )
