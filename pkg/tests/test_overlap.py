import math

import numpy as np
import pytest
import shapely
from hypothesis import given
from hypothesis import strategies as st

from conftest import engine_for, random_interior_points, scene
from vfplan.exceptions import ContractError
from vfplan.overlap import METRICS, normalize_metric, overlap_matrix, overlap_ratios, overlap_value, ratios_from_measures


def test_length_ratio_arithmetic():
    r = ratios_from_measures(10.0, 6.0, 4.0, 1.0, 1.0, 0.0, 0.0)
    assert r["min_len"] == pytest.approx(2 / 3)
    assert r["mean_len"] == pytest.approx(0.5)
    assert r["union_len"] == pytest.approx(1 / 3)


def test_angle_ratio_arithmetic():
    r = ratios_from_measures(1.0, 1.0, 0.5, 2.0, 1.0, 1.0, 1.0)
    assert r["union_ang"] == pytest.approx(2 / 3)
    assert r["mean_ang"] == pytest.approx(0.25 + 0.5)


def test_zero_visibility_gives_zero():
    assert all(v == 0.0 for v in ratios_from_measures(0, 0, 0, 0, 0, 0, 0).values())


def test_metric_names():
    assert normalize_metric("Mean-Len") == "mean_len"
    with pytest.raises(ValueError):
        normalize_metric("median")


def test_identity_is_one():
    eng = engine_for("l_shape")
    rec = eng.record((2.0, 2.0))
    res = overlap_ratios(rec, rec)
    for m in ("min_len", "mean_len", "union_len", "union_ang"):
        assert res[m] == pytest.approx(1.0)
    # each viewpoint sees the common part at its full angle: 1/2 + 1/2
    assert res["mean_ang"] == pytest.approx(1.0)


def test_separate_rooms_do_not_overlap():
    eng = engine_for("multi_room")
    a, b = eng.record((3.0, 2.5)), eng.record((15.4, 7.7))
    assert all(v == 0.0 for v in overlap_ratios(a, b).ratios.values())


def _annulus_oracle(fp, pa, pb, r_min, r_max):
    """Convex room: the visible boundary is the boundary inside the annulus."""
    ring = fp.polygon.exterior

    def ann(p):
        return shapely.Point(p).buffer(r_max, 2048).difference(shapely.Point(p).buffer(r_min, 2048))

    va, vb = ring.intersection(ann(pa)), ring.intersection(ann(pb))
    both = va.intersection(vb)

    def angle(geom, p):
        total = 0.0
        for g in getattr(geom, "geoms", [geom]):
            cs = np.asarray(g.coords)
            for a, b in zip(cs[:-1], cs[1:]):
                u, v = a - p, b - p
                total += abs(math.atan2(u[0] * v[1] - u[1] * v[0], u @ v))
        return total

    pa, pb = np.asarray(pa), np.asarray(pb)
    return va.length, vb.length, both.length, angle(va, pa), angle(vb, pb), angle(both, pa), angle(both, pb)


@pytest.mark.parametrize("pa,pb", [((3.0, 3.0), (7.0, 6.0)), ((1.5, 5.0), (8.5, 5.0)), ((5.0, 5.0), (5.0, 5.0))])
def test_square_room_matches_geometric_oracle(pa, pb):
    eng = engine_for("square", r_max=6.0)
    res = overlap_ratios(eng.record(pa), eng.record(pb))
    la, lb, lab, ta, tb, taab, tbab = _annulus_oracle(scene("square"), pa, pb, 0.6, 6.0)
    assert res.l_a == pytest.approx(la, abs=1e-3)
    assert res.l_ab == pytest.approx(lab, abs=1e-3)
    assert res.theta_a_ab == pytest.approx(taab, abs=1e-3)
    assert res.theta_b_ab == pytest.approx(tbab, abs=1e-3)
    want = ratios_from_measures(la, lb, lab, ta, tb, taab, tbab)
    for m in METRICS:
        assert res[m] == pytest.approx(want[m], abs=1e-3)


def test_mismatched_boundaries_raise():
    a = engine_for("square", partition=0.1).record((5.0, 5.0))
    b = engine_for("square", partition=0.5).record((5.0, 5.0))
    with pytest.raises(ContractError):
        overlap_value(a, b)


def test_corridor_overlap_degrades_with_distance():
    eng = engine_for("corridor")
    base = eng.record((2.0, 1.0))
    vals = [overlap_value(base, eng.record((2.0 + d, 1.0))) for d in (0, 2, 5, 10, 20, 35)]
    assert vals[0] == pytest.approx(1.0)
    assert all(b <= a + 1e-9 for a, b in zip(vals, vals[1:]))
    # 30 m reach: at 35 m apart both still see the walls between them
    assert vals[-1] < 0.8 and vals[-1] < vals[1]


_PTS = random_interior_points(scene("multi_room"), 40, seed=7)


@given(st.integers(0, 39), st.integers(0, 39))
def test_ratio_properties(i, j):
    eng = engine_for("multi_room")
    a, b = eng.record(_PTS[i]), eng.record(_PTS[j])
    ab, ba = overlap_ratios(a, b), overlap_ratios(b, a)
    for m in METRICS:
        assert 0.0 <= ab[m] <= 1.0
        assert ab[m] == pytest.approx(ba[m], abs=1e-9)
    assert ab["union_len"] <= ab["mean_len"] + 1e-12 <= ab["min_len"] + 2e-12
    assert ab.l_ab <= min(ab.l_a, ab.l_b) + 1e-12
    for m in ("min_len", "mean_len", "union_len"):
        assert overlap_value(a, b, m) == pytest.approx(ab[m], abs=1e-12)


def test_matrix_symmetric_and_thread_independent():
    eng = engine_for("multi_room")
    recs = [eng.record(p) for p in _PTS[:12]]
    m1 = overlap_matrix(recs)
    m4 = overlap_matrix(recs, n_threads=4)
    assert np.array_equal(m1, m4)
    assert np.array_equal(m1, m1.T)
    assert np.allclose(np.diag(m1), 1.0)
