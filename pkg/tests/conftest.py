import functools

import numpy as np
import pytest
from hypothesis import settings

from vfplan.estimator import ViewpointPlanner
from vfplan.floorplan import partition_boundary
from vfplan.scenes import load_scene
from vfplan.visibility import ScannerModel, VisibilityEngine, build_bsp

settings.register_profile("ci", max_examples=60, deadline=None)
settings.load_profile("ci")


@functools.lru_cache(maxsize=None)
def scene(name):
    return load_scene(name)


@functools.lru_cache(maxsize=None)
def planned(name, **params):
    return ViewpointPlanner(**params).fit(scene(name))


def plan(name, **params):
    return planned(name, **params)


@functools.lru_cache(maxsize=None)
def engine_for(name, partition=0.1, r_min=0.6, r_max=30.0):
    fp = scene(name)
    boundary = partition_boundary(fp, partition)
    tree = build_bsp(fp.occluders(), domain=fp)
    return VisibilityEngine(boundary, None, ScannerModel(r_min, r_max), domain=fp, tree=tree)


def random_interior_points(fp, n, seed):
    rng = np.random.default_rng(seed)
    minx, miny, maxx, maxy = fp.bounds
    out = []
    while len(out) < n:
        pts = rng.uniform((minx, miny), (maxx, maxy), size=(4 * n, 2))
        out.extend(pts[fp.contains(pts)].tolist())
    return np.array(out[:n])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# acceptance criteria append (number, passed, detail) here; printed at the end
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
