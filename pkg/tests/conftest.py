"""Shared fixtures: the stock robot models and roadmaps built once per run.

Roadmap construction dominates suite time, so everything downstream shares
these session-scoped builds. Tests must not mutate them.
"""

import time
from collections import namedtuple

import pytest

from grr.grr import global_expansion, seed_from_cycle
from grr.robots import MODELS
from grr.taskgraph import build_grid

Setup = namedtuple("Setup", "model chain graph roadmap build_seconds")


def build_model_roadmap(name):
    model = MODELS[name]()
    lo, hi = model.workspace
    graph = build_grid(model.chain, lo, hi, model.resolution, model.mode,
                       fixed_orientation=model.fixed_orientation)
    seeds = seed_from_cycle(model.chain, model.seed_cycle, graph)
    t0 = time.perf_counter()
    roadmap = global_expansion(model.chain, graph, seeds)
    seconds = time.perf_counter() - t0
    return Setup(model, model.chain, graph, roadmap, seconds)


@pytest.fixture(scope="session")
def planar5_setup():
    return build_model_roadmap("planar5")


@pytest.fixture(scope="session")
def planar5_fixed_setup():
    return build_model_roadmap("planar5-fixed")


@pytest.fixture(scope="session")
def planar3_setup():
    return build_model_roadmap("planar3")


@pytest.fixture(scope="session")
def spatial7_setup():
    return build_model_roadmap("spatial7")
