import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from vfplan.exceptions import DomainError
from vfplan.floorplan import partition_boundary
from vfplan.oracle import brute_line_of_sight, sampling_visibility_oracle
from vfplan.scenes import load_scene
from vfplan.visibility import (
    ScannerModel,
    build_bsp,
    coverage_entry,
    line_of_sight,
    valid_span,
)

from conftest import engine_for, random_interior_points, scene

EMPTY = build_bsp(np.empty((0, 2, 2)))


def test_scanner_model_validates_range():
    with pytest.raises(ValueError):
        ScannerModel(1.0, 1.0)
    with pytest.raises(ValueError):
        ScannerModel(0.0, 5.0)


def test_square_walls_need_no_split():
    tree = build_bsp(load_scene("square").walls())
    assert tree.n_splits == 0
    assert len(tree.leaves()) == 4


def test_crossing_occluders_force_a_split():
    tree = build_bsp(np.array([[[0, 0], [4, 4]], [[0, 4], [4, 0]]], dtype=float))
    assert tree.n_splits >= 1
    assert len(tree.leaves()) >= 3


def random_noncrossing(n, rng):
    # short segments on a jittered grid cannot cross each other
    side = int(math.ceil(math.sqrt(n)))
    cells = rng.permutation(side * side)[:n]
    out = []
    for c in cells:
        cx, cy = (c % side) * 2.0, (c // side) * 2.0
        ang = rng.uniform(0, math.pi)
        half = rng.uniform(0.2, 0.9)
        d = np.array([math.cos(ang), math.sin(ang)]) * half
        m = np.array([cx + 1, cy + 1])
        out.append([m - d, m + d])
    return np.array(out)


def test_thousand_random_segments_match_brute_force(rng):
    segs = random_noncrossing(1000, rng)
    tree = build_bsp(segs)
    hi = segs.max()
    for _ in range(100):
        p, q = rng.uniform(0, hi, size=(2, 2))
        assert line_of_sight(tree, p, q) == brute_line_of_sight(p, q, segs)


def test_line_of_sight_examples():
    square = build_bsp(load_scene("square").walls())
    assert line_of_sight(square, (1, 1), (9, 1))
    wall = build_bsp(np.array([[[5, 0], [5, 10]]], dtype=float))
    assert not line_of_sight(wall, (1, 1), (9, 1))
    # passing exactly through the gap at a wall end does not block
    stub = build_bsp(np.array([[[5, 1], [5, 10]]], dtype=float))
    assert line_of_sight(stub, (1, 1), (9, 1))


def test_collinear_overlap_blocks():
    tree = build_bsp(np.array([[[2, 0], [4, 0]]], dtype=float))
    assert not line_of_sight(tree, (0, 0), (6, 0))
    assert line_of_sight(tree, (5, 0), (6, 0))


def test_valid_span_full_segment():
    vs = valid_span(EMPTY, ScannerModel(0.5, 10), (0, 0), ((1, -1), (1, 1)))
    assert vs.theta_valid == pytest.approx(math.pi / 2, abs=1e-12)
    assert vs.length == pytest.approx(2.0)


def test_valid_span_clipped_by_near_range():
    vs = valid_span(EMPTY, ScannerModel(0.5, 10), (0, 0), ((-2, 0.4), (2, 0.4)))
    assert len(vs.sub_segments) == 2
    assert vs.sub_segments[0][1][0] == pytest.approx(-0.3)
    assert vs.sub_segments[1][0][0] == pytest.approx(0.3)
    # 10^6-ray sampling oracle gave 1.45981
    assert vs.theta_valid == pytest.approx(1.45981, abs=1e-4)


def test_valid_span_beyond_range_is_empty():
    vs = valid_span(EMPTY, ScannerModel(0.5, 10), (0, 0), ((20, -1), (20, 1)))
    assert vs.sub_segments == () and vs.theta_valid == 0.0


def test_valid_span_outside_domain_raises():
    fp = load_scene("square")
    tree = build_bsp(fp.occluders(), domain=fp)
    with pytest.raises(DomainError):
        valid_span(tree, ScannerModel(), (11, 5), ((0, 0), (10, 0)))


def test_coverage_entry_examples():
    fp = load_scene("square")
    tree = build_bsp(fp.occluders(), domain=fp)
    L = partition_boundary(fp, 0.5)
    sc = ScannerModel(0.6, 30)
    assert all(coverage_entry(tree, sc, (5, 5), (s.a, s.b)) for s in L.segments)
    assert not coverage_entry(tree, ScannerModel(0.6, 2), (5, 5), (L.segments[0].a, L.segments[0].b))


def test_half_occluded_target():
    # the hole corner (3, 7) splits the sightlines to x in [2, 6] at x = 4
    fp = load_scene("square_with_hole")
    tree = build_bsp(fp.occluders(), domain=fp)
    sc = ScannerModel(0.6, 30)
    p, target = (1.0, 1.0), ((2.0, 10.0), (6.0, 10.0))
    vs = valid_span(tree, sc, p, target)
    assert vs.length == pytest.approx(2.0, abs=1e-9)
    assert not coverage_entry(tree, sc, p, target, 1.0)
    assert coverage_entry(tree, sc, p, target, 0.5)
    occ = [(s.a, s.b) for s in fp.occluders()]
    est = sampling_visibility_oracle(p, target, sc, occ, rays=10**5)
    assert vs.theta_valid == pytest.approx(est, abs=3 * 2 * math.pi / 1e5)


seg_st = st.tuples(st.floats(-8, 8), st.floats(-8, 8), st.floats(-8, 8), st.floats(-8, 8))


@given(seg_st, st.floats(0.1, 3), st.floats(3.5, 12))
def test_theta_bounded_by_full_subtended_angle(seg, r_min, r_max):
    a, b = np.array(seg[:2]), np.array(seg[2:])
    if np.hypot(*(b - a)) < 1e-3:
        return
    vs = valid_span(EMPTY, ScannerModel(r_min, r_max), (0.0, 0.0), (a, b))
    full = math.atan2(abs(a[0] * b[1] - a[1] * b[0]), float(a @ b))
    assert 0 <= vs.theta_valid <= full + 1e-12


@given(seg_st, st.floats(0.2, 3), st.floats(4, 10), st.floats(0.0, 0.19), st.floats(0, 5))
def test_range_monotonicity(seg, r_min, r_max, shrink, grow):
    a, b = np.array(seg[:2]), np.array(seg[2:])
    if np.hypot(*(b - a)) < 1e-3:
        return
    occ = np.array([[[1.0, -3.0], [1.5, 3.0]]])
    tree = build_bsp(occ)
    small = valid_span(tree, ScannerModel(r_min, r_max), (0.0, 0.0), (a, b)).theta_valid
    big = valid_span(tree, ScannerModel(r_min - shrink, r_max + grow), (0.0, 0.0), (a, b)).theta_valid
    assert big >= small - 1e-12


def test_line_of_sight_symmetry_and_bsp_equivalence(rng):
    fp = scene("multi_room")
    occ = np.array([[s.a, s.b] for s in fp.occluders()])
    tree = build_bsp(occ)
    pts = random_interior_points(fp, 600, seed=3)
    for k in range(300):
        p, q = pts[2 * k], pts[2 * k + 1]
        los = line_of_sight(tree, p, q)
        assert los == line_of_sight(tree, q, p)
        assert los == brute_line_of_sight(p, q, occ)


@pytest.mark.parametrize("name", ["square_with_hole", "multi_room", "l_shape"])
def test_engine_agrees_with_per_segment_spans(name):
    eng = engine_for(name)
    fp = scene(name)
    L = eng.boundary
    pts = random_interior_points(fp, 8, seed=11)
    for p in pts:
        rec = eng.record(p)
        frag = eng.fragment_visible_length(rec)
        for j in range(0, len(L), 7):
            s = L.segments[j]
            vs = valid_span(eng.tree, eng.scanner, p, (s.a, s.b))
            assert frag[j] == pytest.approx(vs.length, abs=1e-9)
