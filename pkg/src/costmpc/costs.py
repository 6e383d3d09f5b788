"""Linear cost model over seven continuous driving features.

Feature order (index into the weight vector):

  0  speed_error   squared difference between speed and the target speed
  1  collision     compactly-supported bump on scaled robot-human displacement
  2  off_road      cubic smoothstep of |lat| past the road edge
  3  nearest_lane  squared distance to the closest lane center, in lane widths
  4  lane_0        squared distance to lane_centers[0], in lane widths
  5  lane_1        squared distance to lane_centers[1], in lane widths
  6  lane_2        squared distance to lane_centers[2], in lane widths

Lane distances are measured in lane widths so that lane features and the
speed error live on comparable scales. The collision bump is anisotropic:
its longitudinal radius exceeds its lateral radius so a trailing car feels
the car ahead well before lateral overlap matters.

:func:`features` / :func:`cost` are the scalar reference API;
:func:`cost_field` is the broadcast kernel used by the planner and by
:func:`heatmap`.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ArityError, NormalizationError
from .schema import SCHEMA_VERSION

N_FEATURES = 7

# Fraction of q = d^2 reserved below the bump support edge; keeps the
# gradient factor 1/(1-q)^2 finite where the bump itself underflows to 0.
_BUMP_EDGE = 1e-9


@dataclass(frozen=True)
class RoadGeometry:
    """Straight three-lane road plus the cost-shape scales tied to it."""

    lane_centers: tuple = (-0.17, 0.0, 0.17)
    lane_width: float = 0.17
    road_half_width: float = 0.255
    bump_lon_radius: float = 0.6
    bump_lat_radius: float = None  # defaults to 0.6 lane widths
    offroad_band: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "lane_centers", tuple(float(c) for c in self.lane_centers))
        if len(self.lane_centers) != 3:
            raise ValueError("exactly three lane centers are required")
        if list(self.lane_centers) != sorted(self.lane_centers):
            raise ValueError("lane centers must be sorted ascending")
        if self.road_half_width < max(abs(c) for c in self.lane_centers) + self.lane_width / 2:
            raise ValueError("road_half_width does not cover the outer lanes")
        if self.bump_lat_radius is None:
            object.__setattr__(self, "bump_lat_radius", 0.6 * self.lane_width)


@dataclass(frozen=True)
class FeatureVector:
    speed_error: float
    collision: float
    off_road: float
    nearest_lane: float
    lane_0: float
    lane_1: float
    lane_2: float

    def as_array(self) -> np.ndarray:
        return np.array(
            [
                self.speed_error,
                self.collision,
                self.off_road,
                self.nearest_lane,
                self.lane_0,
                self.lane_1,
                self.lane_2,
            ],
            dtype=float,
        )


@dataclass(frozen=True)
class CostWeights:
    """A 7-vector of feature weights, unit l2-norm after normalization."""

    w: np.ndarray
    label: str = "surrogate"

    def __post_init__(self):
        arr = np.asarray(self.w, dtype=float).reshape(-1).copy()
        if arr.shape != (N_FEATURES,):
            raise ArityError(f"expected {N_FEATURES} weights, got shape {arr.shape}")
        arr.setflags(write=False)
        object.__setattr__(self, "w", arr)


def normalize_weights(raw, label: str = "surrogate") -> CostWeights:
    """Scale ``raw`` to unit l2-norm. A zero vector cannot be normalized."""
    arr = np.asarray(raw, dtype=float).reshape(-1)
    if arr.shape != (N_FEATURES,):
        raise ArityError(f"expected {N_FEATURES} weights, got shape {arr.shape}")
    norm = float(np.linalg.norm(arr))
    if norm == 0.0 or not math.isfinite(norm):
        raise NormalizationError("cannot normalize a zero or non-finite weight vector")
    return CostWeights(arr / norm, label=label)


def bump(scaled_distance_sq: float) -> float:
    """Compactly-supported mollifier: exp(1 - 1/(1 - q)) for q < 1, else 0."""
    q = float(scaled_distance_sq)
    if q >= 1.0:
        return 0.0
    return math.exp(1.0 - 1.0 / (1.0 - q))


def smoothstep(z: float) -> float:
    """Cubic ramp 3z^2 - 2z^3 clamped to [0, 1]."""
    if z <= 0.0:
        return 0.0
    if z >= 1.0:
        return 1.0
    return z * z * (3.0 - 2.0 * z)


def features(w, u, road: RoadGeometry, v_target: float) -> FeatureVector:
    """Evaluate the seven features for one world state.

    ``u`` is accepted for signature stability; no current feature reads the
    control, so the basis is control-independent.
    """
    robot = w.robot
    speed_error = (robot.speed - v_target) ** 2

    keep_clear = 1.0
    for h in w.humans:
        dl = (robot.lat - h.lat) / road.bump_lat_radius
        dn = (robot.lon - h.lon) / road.bump_lon_radius
        keep_clear *= 1.0 - bump(dl * dl + dn * dn)
    collision = 1.0 - keep_clear

    off_road = smoothstep((abs(robot.lat) - road.road_half_width) / road.offroad_band)

    lane_sq = [((robot.lat - c) / road.lane_width) ** 2 for c in road.lane_centers]
    return FeatureVector(
        speed_error=speed_error,
        collision=collision,
        off_road=off_road,
        nearest_lane=min(lane_sq),
        lane_0=lane_sq[0],
        lane_1=lane_sq[1],
        lane_2=lane_sq[2],
    )


def cost(theta: CostWeights, w, u, road: RoadGeometry, v_target: float) -> float:
    """Linear cost: dot product of weights and features."""
    return float(np.dot(theta.w, features(w, u, road, v_target).as_array()))


def cumulative_true_cost(rollout, theta_true: CostWeights, road: RoadGeometry, v_target: float) -> float:
    """Sum of per-step costs over a rollout's (state, control) pairs.

    Accepts a planner Rollout or any sequence of (WorldState, Control).
    """
    steps = getattr(rollout, "steps", rollout)
    if len(steps) == 0:
        raise ArityError("cannot score an empty rollout")
    return float(sum(cost(theta_true, w, u, road, v_target) for w, u in steps))


# ---------------------------------------------------------------------------
# Broadcast kernel
# ---------------------------------------------------------------------------

def cost_field(
    theta_w: np.ndarray,
    road: RoadGeometry,
    v_target: float,
    lat: np.ndarray,
    lon: np.ndarray,
    speed: np.ndarray,
    hum_lat: np.ndarray,
    hum_lon: np.ndarray,
    hyp_probs: np.ndarray,
    with_grad: bool = False,
):
    """Weighted cost (and optionally its state gradient) over state arrays.

    ``lat``, ``lon``, ``speed`` share a common shape S. ``hum_lat`` and
    ``hum_lon`` have shape (H, M, ...) where H indexes behavior hypotheses
    with probabilities ``hyp_probs``, M indexes human cars, and the trailing
    axes broadcast against S. Only the collision feature depends on the
    humans; it is averaged over hypotheses under ``hyp_probs``. With zero
    humans the collision term is identically zero.

    Returns ``cost`` of shape S, or ``(cost, d_lat, d_lon, d_speed)`` when
    ``with_grad`` is set (the cost does not depend on heading).
    """
    w = np.asarray(theta_w, dtype=float)
    lat = np.asarray(lat, dtype=float)
    lon = np.asarray(lon, dtype=float)
    speed = np.asarray(speed, dtype=float)

    spd_err = speed - v_target
    total = w[0] * spd_err * spd_err

    # off-road smoothstep
    a = np.abs(lat)
    z = np.clip((a - road.road_half_width) / road.offroad_band, 0.0, 1.0)
    total = total + w[2] * z * z * (3.0 - 2.0 * z)

    # lane offsets, in lane widths
    centers = np.asarray(road.lane_centers)
    diffs = (lat[..., None] - centers) / road.lane_width
    sq = diffs * diffs
    nearest_idx = np.argmin(sq, axis=-1)
    nearest_sq = np.take_along_axis(sq, nearest_idx[..., None], axis=-1)[..., 0]
    total = total + w[3] * nearest_sq + sq @ w[4:7]

    # collision bump, averaged over hypotheses
    n_hyp, n_hum = hum_lat.shape[0], hum_lat.shape[1] if hum_lat.ndim > 1 else 0
    if n_hyp and n_hum:
        dl = (lat - hum_lat) / road.bump_lat_radius
        dn = (lon - hum_lon) / road.bump_lon_radius
        q = dl * dl + dn * dn
        inside = q < 1.0
        denom = 1.0 - np.minimum(q, 1.0 - _BUMP_EDGE)
        b = np.where(inside, np.exp(1.0 - 1.0 / denom), 0.0)
        if n_hum == 1:
            f2 = b[:, 0]
            prob_w = np.asarray(hyp_probs, dtype=float).reshape((n_hyp,) + (1,) * f2[0].ndim)
            total = total + w[1] * np.sum(prob_w * f2, axis=0)
        else:
            clear = 1.0 - b
            f2 = 1.0 - np.prod(clear, axis=1)
            prob_w = np.asarray(hyp_probs, dtype=float).reshape((n_hyp,) + (1,) * f2[0].ndim)
            total = total + w[1] * np.sum(prob_w * f2, axis=0)
    total = np.broadcast_to(total, lat.shape).copy() if total.shape != lat.shape else total

    if not with_grad:
        return total

    d_speed = w[0] * 2.0 * spd_err

    d_lat = w[2] * (6.0 * z * (1.0 - z) / road.offroad_band) * np.sign(lat)
    nearest_diff = np.take_along_axis(diffs, nearest_idx[..., None], axis=-1)[..., 0]
    d_lat = d_lat + w[3] * 2.0 * nearest_diff / road.lane_width
    d_lat = d_lat + (diffs @ (2.0 * w[4:7])) / road.lane_width

    d_lon = np.zeros_like(d_lat)
    if n_hyp and n_hum:
        db_dq = np.where(inside, -b / (denom * denom), 0.0)
        db_dlat = db_dq * (2.0 * dl / road.bump_lat_radius)
        db_dlon = db_dq * (2.0 * dn / road.bump_lon_radius)
        if n_hum == 1:
            g_lat = db_dlat[:, 0]
            g_lon = db_dlon[:, 0]
        else:
            # d/dx [1 - prod(1-b_k)] = sum_m prod_{k != m}(1-b_k) * db_m/dx
            g_lat = 0.0
            g_lon = 0.0
            for m in range(n_hum):
                others = [k for k in range(n_hum) if k != m]
                loo = np.prod(clear[:, others], axis=1)
                g_lat = g_lat + loo * db_dlat[:, m]
                g_lon = g_lon + loo * db_dlon[:, m]
        d_lat = d_lat + w[1] * np.sum(prob_w * g_lat, axis=0)
        d_lon = d_lon + w[1] * np.sum(prob_w * g_lon, axis=0)

    shape = lat.shape
    return (
        total,
        np.broadcast_to(d_lat, shape),
        np.broadcast_to(d_lon, shape),
        np.broadcast_to(d_speed, shape),
    )


# ---------------------------------------------------------------------------
# Heatmaps
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HeatmapGrid:
    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float
    rows: int
    cols: int

    def __post_init__(self):
        if self.rows < 2 or self.cols < 2:
            raise ArityError("heatmap grid needs at least 2 cells per axis")


def heatmap(
    theta: CostWeights,
    road: RoadGeometry,
    v_target: float,
    grid: HeatmapGrid,
    speed: float,
    heading: float,
    humans=(),
) -> np.ndarray:
    """Cost of placing the robot at each grid cell with fixed speed/heading.

    Row i spans latitudes (lat axis), column j longitudes; cell (i, j) is
    the cost at (lat_i, lon_j) under zero control.
    """
    del heading  # cost is heading-independent; kept for placement semantics
    lats = np.linspace(grid.lat_min, grid.lat_max, grid.rows)
    lons = np.linspace(grid.lon_min, grid.lon_max, grid.cols)
    lat = np.repeat(lats[:, None], grid.cols, axis=1)
    lon = np.repeat(lons[None, :], grid.rows, axis=0)
    spd = np.full_like(lat, float(speed))
    if humans:
        hum_lat = np.array([[h.lat] for h in humans]).reshape(1, len(humans), 1, 1)
        hum_lon = np.array([[h.lon] for h in humans]).reshape(1, len(humans), 1, 1)
    else:
        hum_lat = np.zeros((0, 0, 1, 1))
        hum_lon = np.zeros((0, 0, 1, 1))
    return cost_field(
        theta.w, road, v_target, lat, lon, spd, hum_lat, hum_lon, np.ones(1)
    )


def write_heatmap_csv(path, grid: HeatmapGrid, values: np.ndarray) -> None:
    """Row-major CSV: one header line `lat_min,lat_max,lon_min,lon_max,rows,cols`,
    then one grid row per line."""
    values = np.asarray(values)
    if values.shape != (grid.rows, grid.cols):
        raise ArityError(f"grid {grid.rows}x{grid.cols} vs values {values.shape}")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([grid.lat_min, grid.lat_max, grid.lon_min, grid.lon_max, grid.rows, grid.cols])
        for row in values:
            writer.writerow([repr(float(v)) for v in row])


def read_heatmap_csv(path):
    """Inverse of :func:`write_heatmap_csv`; returns (HeatmapGrid, ndarray)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        head = next(reader)
        grid = HeatmapGrid(
            float(head[0]), float(head[1]), float(head[2]), float(head[3]),
            int(head[4]), int(head[5]),
        )
        values = np.array([[float(v) for v in row] for row in reader])
    if values.shape != (grid.rows, grid.cols):
        raise ArityError("heatmap file body does not match its header")
    return grid, values


# ---------------------------------------------------------------------------
# Weight files
# ---------------------------------------------------------------------------

def save_weights(path, theta: CostWeights) -> None:
    with open(path, "w") as fh:
        json.dump(
            {"schema_version": SCHEMA_VERSION, "label": theta.label, "w": [float(v) for v in theta.w]},
            fh,
            indent=2,
        )
        fh.write("\n")


def load_weights(path) -> CostWeights:
    with open(path) as fh:
        data = json.load(fh)
    return CostWeights(np.array(data["w"], dtype=float), label=data.get("label", "surrogate"))
