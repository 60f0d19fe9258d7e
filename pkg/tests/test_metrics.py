import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import plan
from vfplan.metrics import compute_report, format_report, wapl
from vfplan.planner import CandidateGraph, CoverageTable, ViewpointNetwork


def test_wapl_path_example():
    assert wapl("abc", [("a", "b", 0.4), ("b", "c", 0.5)]) == pytest.approx(0.6)


def test_wapl_isolated_pair():
    assert wapl([0, 1], []) == pytest.approx(100.0)


def test_wapl_zero_weight_clique():
    assert wapl(range(4), [(a, b, 0.0) for a in range(4) for b in range(a + 1, 4)]) == 0.0


def test_wapl_degenerate_sizes():
    assert wapl([], []) == 0.0
    assert wapl([7], []) == 0.0


edge_lists = st.lists(
    st.tuples(st.integers(0, 6), st.integers(0, 6), st.floats(0.0, 1.0)).filter(lambda e: e[0] != e[1]),
    max_size=15,
)


@given(edge_lists, st.permutations(range(7)))
def test_wapl_relabel_invariant(edges, perm):
    relabeled = [(perm[a], perm[b], w) for a, b, w in edges]
    assert wapl(range(7), relabeled) == pytest.approx(wapl(range(7), edges))


@given(edge_lists, st.integers(0, 6), st.integers(0, 6), st.floats(0.0, 1.0))
def test_adding_edge_never_increases_wapl(edges, a, b, w):
    if a == b:
        return
    assert wapl(range(7), edges + [(a, b, w)]) <= wapl(range(7), edges) + 1e-12


@given(st.integers(2, 8), st.floats(0.0, 0.95), st.integers(0, 10**6))
def test_connected_distances_bounded(n, tau, seed):
    import networkx as nx

    rng = np.random.default_rng(seed)
    ov = rng.uniform(tau, 1.0, (n, n))
    ov = (ov + ov.T) / 2
    mask = rng.random((n, n)) < 0.5
    mask = mask | mask.T
    for i in range(n - 1):
        mask[i, i + 1] = mask[i + 1, i] = True  # keep it connected
    edges = [(i, j, 1 - ov[i, j]) for i in range(n) for j in range(i + 1, n) if mask[i, j]]
    g = nx.Graph()
    g.add_weighted_edges_from(edges)
    for _, lengths in nx.all_pairs_dijkstra_path_length(g):
        assert max(lengths.values()) <= (n - 1) * (1 - tau) + 1e-9
    assert wapl(range(n), edges) <= (n - 1) * (1 - tau) + 1e-9


def test_report_counts():
    t = CoverageTable(np.array([[1, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 0]], dtype=bool))
    g = CandidateGraph(np.eye(3), 0.4)
    rep = compute_report(ViewpointNetwork((0, 1)), t, g)
    assert rep.vc == 2
    assert rep.coverage_percent == pytest.approx(75.0)
    assert rep.component_count == 2 and rep.disconnected_pairs == 2
    assert rep.wapl == pytest.approx(100.0)


def test_report_empty_selection():
    t = CoverageTable(np.ones((2, 3), dtype=bool))
    rep = compute_report(ViewpointNetwork(()), t, CandidateGraph(np.eye(2), 0.4))
    assert (rep.vc, rep.wapl, rep.coverage_percent, rep.component_count) == (0, 0.0, 0.0, 0)


def test_format_is_fixed_width():
    t = CoverageTable(np.ones((1, 2), dtype=bool))
    text = format_report(compute_report(ViewpointNetwork((0,)), t, CandidateGraph(np.eye(1), 0.4)))
    assert text.splitlines()[2:4] == ["VC                  1", "WAPL                0.0000"]


def test_wapl_recomputes_from_network_json():
    p = plan("multi_room", resolution=0.05)
    doc = json.loads(p.network_json())
    ids = [v["id"] for v in doc["viewpoints"]]
    edges = [(e["a"], e["b"], e["weight"]) for e in doc["edges"]]
    assert doc["metrics"]["vc"] == len(ids)
    assert wapl(ids, edges) == pytest.approx(doc["metrics"]["wapl"], abs=1e-12)
    for e in doc["edges"]:
        assert e["weight"] == pytest.approx(1 - e["overlap"])
        assert e["overlap"] >= doc["config"]["tau"]
