import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from costmpc import (
    ArityError,
    Belief,
    CarState,
    Control,
    FixedSpeed,
    MergeAtReveal,
    RoadGeometry,
    WorldState,
    human_control,
    predict_human_trajectory,
    step_car,
    update_belief,
)
from costmpc.human import (
    MERGE_TOLERANCE,
    hypothesis_from_json,
    hypothesis_to_json,
)


def world_with_human(lat=0.085, lon=0.5, speed=0.6):
    return WorldState(
        CarState(0.0, 0.0, 0.0, 0.8),
        humans=(CarState(lat, lon, 0.0, speed),),
    )


def test_fixed_speed_never_steers():
    u = human_control(FixedSpeed(0.5), world_with_human(), t=3)
    assert u == Control(0.0, 0.0)


def test_cruise_accel_compensates_friction():
    # at the setpoint, accel = friction * setpoint holds speed constant
    h = FixedSpeed(0.5)
    u = human_control(h, world_with_human(speed=0.5), t=0, friction=0.4)
    assert u.accel == pytest.approx(0.2)
    car = step_car(CarState(0, 0, 0, 0.5), u, friction=0.4)
    assert car.speed == pytest.approx(0.5)


def test_merge_waits_for_reveal():
    h = MergeAtReveal(target_lane=2, reveal_step=10, merge_steer=1.0, cruise_speed=0.6)
    before = human_control(h, world_with_human(), t=9)
    after = human_control(h, world_with_human(), t=10)
    assert before.steer == 0.0
    assert after.steer == 1.0  # target above current lat


def test_merge_steers_toward_target_from_either_side():
    h = MergeAtReveal(target_lane=1, reveal_step=0, merge_steer=0.7, cruise_speed=0.6)
    from_left = human_control(h, world_with_human(lat=-0.1), t=0)
    from_right = human_control(h, world_with_human(lat=0.1), t=0)
    assert from_left.steer == pytest.approx(0.7)
    assert from_right.steer == pytest.approx(-0.7)


def test_merge_stops_inside_tolerance():
    h = MergeAtReveal(target_lane=1, reveal_step=0, merge_steer=1.0, cruise_speed=0.6)
    u = human_control(h, world_with_human(lat=MERGE_TOLERANCE / 2), t=5)
    assert u.steer == 0.0


def test_hypothesis_validation():
    with pytest.raises(ValueError):
        MergeAtReveal(target_lane=3, reveal_step=10, merge_steer=1.0, cruise_speed=0.6)
    with pytest.raises(ValueError):
        FixedSpeed(speed=-0.1)
    with pytest.raises(ValueError):
        human_control(FixedSpeed(0.5), world_with_human(), t=-1)


def test_prediction_matches_manual_stepping():
    road = RoadGeometry()
    h = MergeAtReveal(target_lane=2, reveal_step=2, merge_steer=0.8, cruise_speed=0.6)
    w = world_with_human(lat=0.085, speed=0.6)
    controls = predict_human_trajectory(h, w, horizon=6, road=road)
    car = w.humans[0]
    for t, u in enumerate(controls):
        assert u == human_control(h, WorldState(w.robot, (car,)), t, road=road)
        car = step_car(car, u)


def test_belief_requires_simplex():
    h = FixedSpeed(0.5)
    with pytest.raises(ValueError):
        Belief((h, h), np.array([0.7, 0.7]))
    with pytest.raises(ValueError):
        Belief((h, h), np.array([-0.1, 1.1]))
    with pytest.raises(ArityError):
        Belief((h,), np.array([0.5, 0.5]))


def test_belief_is_static_while_hypotheses_agree():
    """Identical predicted controls leave the belief untouched."""
    hyps = (
        MergeAtReveal(1, reveal_step=10, merge_steer=1.0, cruise_speed=0.6),
        MergeAtReveal(2, reveal_step=10, merge_steer=1.0, cruise_speed=0.6),
    )
    b = Belief(hyps, np.array([0.5, 0.5]))
    w = world_with_human()
    for t in range(10):
        predicted = [human_control(h, w, t) for h in hyps]
        observed = predicted[0]
        b = update_belief(b, observed, predicted)
    assert np.allclose(b.probs, [0.5, 0.5])


def test_belief_collapses_after_reveal():
    hyps = (
        MergeAtReveal(1, reveal_step=0, merge_steer=1.0, cruise_speed=0.6),
        MergeAtReveal(2, reveal_step=0, merge_steer=1.0, cruise_speed=0.6),
    )
    b = Belief(hyps, np.array([0.5, 0.5]))
    w = world_with_human(lat=0.085)
    predicted = [human_control(h, w, 0) for h in hyps]
    b = update_belief(b, predicted[0], predicted)
    assert b.probs[0] > 0.999


def test_belief_update_oracle_at_wide_sigma():
    # prior (0.5, 0.5), squared error 0.25 on the second hypothesis, sigma 0.5
    hyps = (FixedSpeed(0.5), FixedSpeed(0.5))
    b = Belief(hyps, np.array([0.5, 0.5]))
    out = update_belief(b, Control(0.0, 0.0), [Control(0.0, 0.0), Control(0.5, 0.0)],
                        likelihood_sigma=0.5)
    assert out.probs[0] == pytest.approx(0.6224593312018546, rel=1e-12)
    assert out.probs[1] == pytest.approx(0.3775406687981454, rel=1e-12)


def test_zero_prior_stays_absorbed():
    hyps = (FixedSpeed(0.5), FixedSpeed(0.5))
    b = Belief(hyps, np.array([1.0, 0.0]))
    out = update_belief(b, Control(0.0, 0.0), [Control(0.0, 0.0), Control(0.0, 0.0)])
    assert out.probs[1] == 0.0


def test_underflow_falls_back_to_prior_support():
    hyps = (FixedSpeed(0.5), FixedSpeed(0.5), FixedSpeed(0.5))
    b = Belief(hyps, np.array([0.5, 0.5, 0.0]))
    # controls clamp to the actuator box, so the widest possible gap is the
    # opposite corner: squared error 8 gives exp(-1600), exactly 0.0 in
    # float64, while (1, 1) vs (0, 0) still has representable mass
    far = Control(-1.0, -1.0)
    with pytest.warns(RuntimeWarning):
        out = update_belief(b, far, [Control(1, 1), Control(1, 1), Control(1, 1)])
    assert np.allclose(out.probs, [0.5, 0.5, 0.0])


@given(
    prior=st.floats(min_value=0.01, max_value=0.99),
    err=st.floats(min_value=0.0, max_value=0.5),
)
def test_update_preserves_simplex(prior, err):
    hyps = (FixedSpeed(0.5), FixedSpeed(0.5))
    b = Belief(hyps, np.array([prior, 1.0 - prior]))
    out = update_belief(
        b, Control(0.0, 0.0), [Control(0.0, 0.0), Control(err, 0.0)],
        likelihood_sigma=0.5,
    )
    assert math.isclose(float(out.probs.sum()), 1.0, abs_tol=1e-12)
    assert np.all(out.probs >= 0)
    # evidence never moves mass toward the worse-fitting hypothesis
    assert out.probs[0] >= prior - 1e-12


def test_arity_mismatch_rejected():
    b = Belief((FixedSpeed(0.5),), np.array([1.0]))
    with pytest.raises(ArityError):
        update_belief(b, Control(0, 0), [Control(0, 0), Control(0, 0)])


@pytest.mark.parametrize(
    "h",
    [
        FixedSpeed(0.37),
        MergeAtReveal(target_lane=0, reveal_step=4, merge_steer=0.9, cruise_speed=0.55),
    ],
)
def test_hypothesis_json_round_trip(h):
    assert hypothesis_from_json(hypothesis_to_json(h)) == h


def test_unknown_hypothesis_kind_rejected():
    with pytest.raises(ValueError):
        hypothesis_from_json({"kind": "teleport"})
