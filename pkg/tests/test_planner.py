"""Planner tests: exact gradients against finite differences, the jitted
kernel against the numpy reference, and replanning-rollout invariants."""

import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from costmpc import (
    Belief,
    CarState,
    ConfigurationError,
    Control,
    ControlSequence,
    FixedSpeed,
    PlannerConfig,
    RoadGeometry,
    WorldState,
    build_scenario,
    mpc_rollout,
    normalize_weights,
    optimize_plan,
    plan_gradient,
    plan_objective,
    rollout_from_json,
    rollout_to_json,
)
from costmpc._kernel import cost_and_grad as fast_cost_and_grad
from costmpc._kernel import forward as fast_forward
from costmpc._kernel import road_vector
from costmpc.costs import cumulative_true_cost
from costmpc.planner import _forward, _human_tracks, _objective_and_grad

from conftest import fast_scenario

THETA = normalize_weights([1.0, 4.0, 4.0, 0.5, 0.0, 0.0, 0.7])


def small_world():
    return WorldState(
        CarState(0.03, 0.0, 0.05, 0.6),
        humans=(CarState(0.0, 0.45, 0.0, 0.35),),
    )


def single_belief():
    return Belief((FixedSpeed(0.35),), np.array([1.0]))


def merge_belief():
    from costmpc import MergeAtReveal

    return Belief(
        (
            MergeAtReveal(1, reveal_step=3, merge_steer=1.0, cruise_speed=0.35),
            MergeAtReveal(2, reveal_step=3, merge_steer=1.0, cruise_speed=0.35),
        ),
        np.array([0.4, 0.6]),
    )


def random_sequence(rng, K):
    return ControlSequence.from_array(rng.uniform(-0.8, 0.8, size=(K, 2)))


# --- gradient correctness ---------------------------------------------------

@pytest.mark.parametrize("belief_fn", [single_belief, merge_belief])
def test_plan_gradient_matches_finite_differences(belief_fn, road):
    # central differences, eps 1e-6, relative tolerance 1e-4
    rng = np.random.default_rng(0)
    b = belief_fn()
    w = small_world()
    seq = random_sequence(rng, K=5)
    grad = plan_gradient(THETA, w, b, seq, road, v_target=1.0)

    eps = 1e-6
    arr = seq.as_array()
    for i in range(arr.shape[0]):
        for j in range(2):
            hi, lo = arr.copy(), arr.copy()
            hi[i, j] += eps
            lo[i, j] -= eps
            f_hi = plan_objective(THETA, w, b, ControlSequence.from_array(hi), road, 1.0)
            f_lo = plan_objective(THETA, w, b, ControlSequence.from_array(lo), road, 1.0)
            fd = (f_hi - f_lo) / (2 * eps)
            assert grad[i, j] == pytest.approx(fd, rel=1e-4, abs=1e-7), (i, j)


def test_last_control_has_zero_gradient_without_terminal_term(road):
    # the objective pairs x_0..x_{K-1} with u_0..u_{K-1}; u_{K-1} never
    # influences a scored state
    seq = random_sequence(np.random.default_rng(1), K=4)
    grad = plan_gradient(THETA, small_world(), single_belief(), seq, road, 1.0)
    assert np.allclose(grad[-1], 0.0)


def test_two_step_objective_by_hand(road):
    # pure speed cost, no humans: J = (s0-1)^2 + (s0 + dt*a0 - 1)^2
    theta = normalize_weights([1, 0, 0, 0, 0, 0, 0])
    w = WorldState(CarState(0.0, 0.0, 0.0, 0.5), humans=())
    b = Belief((FixedSpeed(0.5),), np.array([1.0]))
    seq = ControlSequence((Control(0.0, 0.2), Control(0.1, -0.3)))
    assert plan_objective(theta, w, b, seq, road, 1.0) == pytest.approx(0.4804)
    grad = plan_gradient(theta, w, b, seq, road, 1.0)
    assert grad[0, 1] == pytest.approx(-0.096)
    assert grad[0, 0] == pytest.approx(0.0)
    assert np.allclose(grad[1], 0.0)


def test_terminal_hook_contributes_value_and_gradient(road):
    # quadratic terminal penalty on speed; finite differences through the
    # full objective including the hook
    def terminal(x):
        v = 3.0 * x[:, 3] ** 2
        g = np.zeros_like(x)
        g[:, 3] = 6.0 * x[:, 3]
        return v, g

    w = small_world()
    b = single_belief()
    K = 4
    seq = random_sequence(np.random.default_rng(2), K)
    hum_lat, hum_lon = _human_tracks(b, w, K, road, 0.1, 0.0)

    def objective(arr):
        J, _ = _objective_and_grad(
            THETA.w, w.robot.as_array(), arr[None], hum_lat, hum_lon, b.probs,
            road, 1.0, 0.1, 0.0, terminal_cost=terminal,
        )
        return float(J[0])

    _, grad = _objective_and_grad(
        THETA.w, w.robot.as_array(), seq.as_array()[None], hum_lat, hum_lon,
        b.probs, road, 1.0, 0.1, 0.0, terminal_cost=terminal,
    )
    base = plan_objective(THETA, w, b, seq, road, 1.0)
    x = _forward(w.robot.as_array(), seq.as_array()[None], 0.1, 0.0)[0, K]
    assert objective(seq.as_array()) == pytest.approx(base + 3.0 * x[3] ** 2, rel=1e-12)

    eps = 1e-6
    arr = seq.as_array()
    for i in range(K):
        for j in range(2):
            hi, lo = arr.copy(), arr.copy()
            hi[i, j] += eps
            lo[i, j] -= eps
            fd = (objective(hi) - objective(lo)) / (2 * eps)
            assert grad[0, i, j] == pytest.approx(fd, rel=1e-4, abs=1e-7), (i, j)
    # the hook makes the final control matter
    assert abs(grad[0, -1, 1]) > 1e-6


def test_terminal_hook_changes_the_chosen_plan(road):
    heavy_brake = lambda x: (50.0 * x[:, 3] ** 2, np.stack(
        [np.zeros(len(x)), np.zeros(len(x)), np.zeros(len(x)), 100.0 * x[:, 3]], axis=1
    ))
    cfg = PlannerConfig(K=5, gd_steps=40)
    cfg_term = dataclasses.replace(cfg, terminal_cost=heavy_brake)
    w = small_world()
    plain, _ = optimize_plan(THETA, w, single_belief(), cfg, road=RoadGeometry(), v_target=1.0)
    braked, _ = optimize_plan(THETA, w, single_belief(), cfg_term, road=RoadGeometry(), v_target=1.0)
    assert braked.controls[-1].accel < plain.controls[-1].accel


# --- jitted kernel twin -----------------------------------------------------

@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_fast_kernel_agrees_with_numpy_reference(seed):
    rng = np.random.default_rng(seed)
    road = RoadGeometry()
    B, K = 3, 5
    x0 = np.array([rng.uniform(-0.2, 0.2), 0.0, rng.uniform(-0.3, 0.3), rng.uniform(0, 1)])
    U = rng.uniform(-1, 1, size=(B, K, 2))
    n_hyp, n_hum = 2, 2
    hum_lat = rng.uniform(-0.2, 0.2, size=(n_hyp, n_hum, K))
    hum_lon = rng.uniform(-0.1, 0.8, size=(n_hyp, n_hum, K))
    probs = np.array([0.3, 0.7])
    theta = rng.normal(size=7)
    dt, friction = 0.1, rng.choice([0.0, 0.5])

    X_np = _forward(x0, U, dt, friction)
    X_nb = fast_forward(x0, U, dt, friction)
    assert np.allclose(X_np, X_nb, atol=1e-12)

    J_np, G_np = _objective_and_grad(
        theta, x0, U, hum_lat, hum_lon, probs, road, 1.0, dt, friction
    )
    J_nb, G_nb = fast_cost_and_grad(
        theta, np.ascontiguousarray(X_nb), U, hum_lat, hum_lon, probs,
        road_vector(road), 1.0, dt, friction, np.zeros(B), np.zeros((B, 4)),
    )
    assert np.allclose(J_np, J_nb, rtol=1e-10, atol=1e-12)
    assert np.allclose(G_np, G_nb, rtol=1e-10, atol=1e-12)


# --- descent ----------------------------------------------------------------

def test_descent_never_returns_worse_than_best_init(road):
    w = small_world()
    b = single_belief()
    cfg = PlannerConfig(K=5, gd_steps=30)
    init_objs = []
    for name in cfg.initializations:
        steer = {"straight": 0.0, "right": -0.2, "left": 0.2}[name]
        seq = ControlSequence(tuple(Control(steer, 0.0) for _ in range(cfg.K)))
        init_objs.append(plan_objective(THETA, w, b, seq, road, 1.0))
    _, best = optimize_plan(THETA, w, b, cfg, road, 1.0)
    assert best <= min(init_objs) + 1e-12


def test_descent_is_deterministic(road):
    w = small_world()
    cfg = PlannerConfig(K=5, gd_steps=25)
    a, ja = optimize_plan(THETA, w, single_belief(), cfg, road, 1.0)
    b, jb = optimize_plan(THETA, w, single_belief(), cfg, road, 1.0)
    assert ja == jb
    assert a == b


def test_zero_descent_steps_returns_best_initialization(road):
    cfg = PlannerConfig(K=3, gd_steps=0)
    seq, obj = optimize_plan(THETA, small_world(), single_belief(), cfg, road, 1.0)
    arrs = set(tuple(u.steer for u in seq.controls))
    assert arrs.issubset({0.0, 0.2, -0.2})
    assert obj == pytest.approx(
        plan_objective(THETA, small_world(), single_belief(), seq, road, 1.0)
    )


def test_warm_start_length_mismatch_rejected(road):
    cfg = PlannerConfig(K=4, gd_steps=1)
    bad = ControlSequence((Control(0, 0),) * 3)
    with pytest.raises(ConfigurationError):
        optimize_plan(THETA, small_world(), single_belief(), cfg, road, 1.0,
                      extra_inits=(bad,))


def test_planner_config_validation():
    with pytest.raises(ConfigurationError):
        PlannerConfig(K=0)
    with pytest.raises(ConfigurationError):
        PlannerConfig(step_size=0.0)
    with pytest.raises(ConfigurationError):
        PlannerConfig(initializations=())
    with pytest.raises(ConfigurationError):
        PlannerConfig(initializations=("zigzag",))


# --- rollouts ---------------------------------------------------------------

def test_rollout_has_exactly_T_steps():
    s = fast_scenario(1, gd_steps=5)
    r = mpc_rollout(s.theta_true, s.theta_true, s, seed=0)
    assert len(r.steps) == s.T
    assert len(r.per_step_true_cost) == s.T


def test_windless_rollout_ignores_seed():
    s = fast_scenario(1, gd_steps=5, T=8)
    a = mpc_rollout(s.theta_true, s.theta_true, s, seed=0)
    b = mpc_rollout(s.theta_true, s.theta_true, s, seed=999)
    assert a.steps == b.steps


def test_windy_rollout_is_seed_deterministic():
    s = dataclasses.replace(fast_scenario(1, gd_steps=5, T=8),
                            wind=build_scenario(1, wind_enabled=True).wind)
    a = mpc_rollout(s.theta_true, s.theta_true, s, seed=42)
    b = mpc_rollout(s.theta_true, s.theta_true, s, seed=42)
    c = mpc_rollout(s.theta_true, s.theta_true, s, seed=43)
    assert a.steps == b.steps
    assert a.steps != c.steps


def test_rollout_rescoring_is_consistent():
    s = fast_scenario(2, gd_steps=5, T=8)
    r = mpc_rollout(s.theta_true, s.theta_true, s, seed=0)
    rescored = cumulative_true_cost(r, s.theta_true, s.road, s.v_target)
    assert rescored == pytest.approx(r.cumulative_true_cost, rel=1e-12)
    assert r.cumulative_true_cost == pytest.approx(sum(r.per_step_true_cost))


def test_rollout_json_round_trip():
    s = fast_scenario(1, gd_steps=4, T=6)
    r = mpc_rollout(s.theta_true, s.theta_true, s, seed=0)
    back = rollout_from_json(rollout_to_json(r))
    assert back.steps == r.steps
    assert back.cumulative_true_cost == pytest.approx(r.cumulative_true_cost)
    assert back.seed == r.seed


def test_belief_collapses_during_merge_rollout():
    """After the reveal the executed human control separates the hypotheses
    within one step."""
    s = fast_scenario(3, gd_steps=5, T=12)
    reveal = s.belief0.hypotheses[0].reveal_step
    r = mpc_rollout(s.theta_true, s.theta_true, s, seed=0)
    # replay the belief trace the rollout saw
    from costmpc import human_control, update_belief

    belief = s.belief0
    for w, _ in r.steps[:-1]:
        observed = human_control(s.true_human, w, w.t, index=0, road=s.road)
        predicted = [human_control(h, w, w.t, index=0, road=s.road) for h in belief.hypotheses]
        belief = update_belief(belief, observed, predicted)
        if w.t < reveal:
            assert np.allclose(belief.probs, [0.5, 0.5])
    assert belief.probs[0] > 0.999
