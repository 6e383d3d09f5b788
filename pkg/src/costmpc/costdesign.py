"""Search for surrogate cost weights whose closed-loop rollouts score best
under the true cost.

Fitness of a candidate weight vector: normalize it, run a full replanning
rollout from each of n_init sampled initial states, and average the true
cumulative cost. When the scenario's initial belief spans several behavior
hypotheses the per-state cost is the belief-weighted average over rollouts
with each hypothesis as ground truth, so candidates are scored against
every outcome they will actually face rather than one arbitrary draw.

Two searchers share the evaluation machinery: CMA-ES started at the true
weights, and a uniform-on-the-sphere random-search baseline. By default all
candidates are scored on the same initial states and rollout seeds (common
random numbers); a flag restores fresh i.i.d. draws per candidate.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .cmaes import CmaEs
from .costs import CostWeights, normalize_weights
from .errors import ArityError, ConfigurationError, RolloutDivergedError
from .planner import mpc_rollout
from .scenarios import Scenario, sample_initial_state, with_true_human
from .seeding import child_rng, child_seed


@dataclass(frozen=True)
class DesignConfig:
    budget: int = 85
    sigma0: float = 0.3
    n_init: int = 8
    init_mean: "np.ndarray | None" = None
    master_seed: int = 0
    crn: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.budget < 1:
            raise ConfigurationError("budget must be >= 1")
        if self.sigma0 <= 0:
            raise ConfigurationError("sigma0 must be positive")
        if self.n_init < 1:
            raise ConfigurationError("n_init must be >= 1")
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")
        if self.init_mean is not None:
            object.__setattr__(
                self, "init_mean", np.asarray(self.init_mean, dtype=float).reshape(-1).copy()
            )


@dataclass(frozen=True)
class CandidateRecord:
    weights: CostWeights
    fitness: float
    eval_index: int
    rollout_seeds: tuple


def expected_true_cost(
    theta_plan: CostWeights,
    scenario: Scenario,
    initial_state,
    seed: int,
    theta_true: "CostWeights | None" = None,
) -> float:
    """Belief-weighted true cost of planning with ``theta_plan`` from one state.

    Runs one rollout per hypothesis in the scenario's initial belief, each
    as ground truth, and averages under the belief probabilities. A diverged
    branch makes the whole value +inf.
    """
    theta_true = theta_true if theta_true is not None else scenario.theta_true
    total = 0.0
    for h, p in zip(scenario.belief0.hypotheses, scenario.belief0.probs):
        if p == 0.0:
            continue
        try:
            r = mpc_rollout(
                theta_plan, theta_true, with_true_human(scenario, h), seed,
                initial_state=initial_state,
            )
        except RolloutDivergedError:
            return math.inf
        total += float(p) * r.cumulative_true_cost
    return total


def fitness(candidate, scenario: Scenario, initial_states, theta_true: CostWeights, seeds) -> float:
    """Mean expected true cost of the normalized candidate over initial states."""
    if len(initial_states) != len(seeds):
        raise ArityError(f"{len(initial_states)} initial states for {len(seeds)} seeds")
    theta = normalize_weights(candidate)
    values = [
        expected_true_cost(theta, scenario, w0, sd, theta_true)
        for w0, sd in zip(initial_states, seeds)
    ]
    return float(np.mean(values))


def sample_unit_weights(rng: np.random.Generator) -> CostWeights:
    """Uniform direction on the unit sphere via normalized Gaussian draws."""
    while True:
        raw = rng.standard_normal(7)
        norm = float(np.linalg.norm(raw))
        if norm > 0.0:
            return CostWeights(raw / norm)


def _fitness_streams(cfg: DesignConfig, scenario: Scenario, eval_index: int):
    """Initial states and rollout seeds for one evaluation.

    With common random numbers every candidate sees the same draws; without,
    streams are labeled by the evaluation index.
    """
    labels = ("design-states",) if cfg.crn else ("design-states", eval_index)
    rng = child_rng(cfg.master_seed, *labels)
    states = [sample_initial_state(scenario, rng) for _ in range(cfg.n_init)]
    seed_labels = ("design-rollout",) if cfg.crn else ("design-rollout", eval_index)
    seeds = [child_seed(cfg.master_seed, *seed_labels, j) for j in range(cfg.n_init)]
    return states, seeds


def _fitness_task(args):
    raw, scenario, states, seeds, theta_true = args
    return fitness(raw, scenario, states, theta_true, seeds)


def _evaluate_batch(cfg, scenario, theta_true, raws, first_index, history):
    """Score a batch of raw candidates, appending records; returns fitnesses."""
    tasks = []
    for offset, raw in enumerate(raws):
        states, seeds = _fitness_streams(cfg, scenario, first_index + offset)
        tasks.append((raw, scenario, states, seeds, theta_true))
    if cfg.workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            values = list(pool.map(_fitness_task, tasks))
    else:
        values = [_fitness_task(t) for t in tasks]
    for offset, (raw, value) in enumerate(zip(raws, values)):
        history.append(
            CandidateRecord(
                weights=normalize_weights(raw),
                fitness=float(value),
                eval_index=first_index + offset,
                rollout_seeds=tuple(tasks[offset][3]),
            )
        )
    return values


def _best(history):
    record = min(history, key=lambda r: r.fitness)
    return record.weights, history


def cma_search(cfg: DesignConfig, scenario: Scenario, theta_true: CostWeights):
    """CMA-ES over raw weight vectors, scored after normalization.

    The true weights are evaluated first (index 0) so the returned best is
    never worse than planning with the true cost under the same draws. The
    search mean starts at the true weights unless the config overrides it.
    Restarts with doubled population trigger only on degenerate generations,
    which the default budget never reaches.
    """
    init_mean = cfg.init_mean if cfg.init_mean is not None else theta_true.w
    history = []
    _evaluate_batch(cfg, scenario, theta_true, [np.asarray(theta_true.w)], 0, history)

    es = CmaEs(init_mean, cfg.sigma0, child_rng(cfg.master_seed, "cma"))
    while len(history) < cfg.budget:
        candidates = es.ask()
        room = cfg.budget - len(history)
        batch = candidates[:room]
        values = _evaluate_batch(cfg, scenario, theta_true, batch, len(history), history)
        if len(batch) < len(candidates):
            break  # budget exhausted mid-generation; no update possible
        es.tell(candidates, values)
        if es.should_restart:
            es = CmaEs(init_mean, cfg.sigma0, child_rng(cfg.master_seed, "cma", es.generation), popsize=2 * es.lam)
    return _best(history)


def random_search(cfg: DesignConfig, scenario: Scenario, theta_true: CostWeights):
    """Baseline: budget uniform unit-norm candidates under the same draws."""
    rng = child_rng(cfg.master_seed, "random-search")
    history = []
    raws = [sample_unit_weights(rng).w for _ in range(cfg.budget)]
    _evaluate_batch(cfg, scenario, theta_true, raws, 0, history)
    return _best(history)


def history_to_csv(path, history) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["eval_index", "fitness"] + [f"w{i}" for i in range(1, 8)])
        for rec in history:
            writer.writerow(
                [rec.eval_index, repr(rec.fitness)] + [repr(float(v)) for v in rec.weights.w]
            )
