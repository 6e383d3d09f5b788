import dataclasses

import numpy as np
import pytest

from costmpc import PlannerConfig, RoadGeometry, build_scenario


@pytest.fixture
def road():
    return RoadGeometry()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def fast_scenario(scenario_id: int, gd_steps: int = 8, T: "int | None" = None):
    """Scenario with a cheap planner, for tests that exercise plumbing
    rather than planning quality."""
    s = build_scenario(scenario_id)
    cfg = dataclasses.replace(s.planner_cfg, gd_steps=gd_steps)
    if T is not None:
        return dataclasses.replace(s, planner_cfg=cfg, T=T)
    return dataclasses.replace(s, planner_cfg=cfg)
