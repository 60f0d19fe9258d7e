import networkx as nx
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import plan
from vfplan.exceptions import InfeasibleError
from vfplan.oracle import single_removal_violations
from vfplan.planner import (
    CandidateGraph,
    CoverageTable,
    ViewpointNetwork,
    augment_connectivity,
    greedy_select,
    is_removable,
    plan_network,
    prune_redundant,
    reinforce_cycles,
)


def table(rows):
    return CoverageTable(np.array(rows, dtype=bool))


def chain_overlap(n, value=0.8):
    """Overlap matrix of a path graph 0-1-...-(n-1)."""
    ov = np.eye(n)
    for i in range(n - 1):
        ov[i, i + 1] = ov[i + 1, i] = value
    return ov


def test_table_helpers():
    t = table([[1, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 0]])
    assert t.counts.tolist() == [2, 1, 0]
    assert t.uncoverable() == [3]
    assert t.covered_by([0, 1]).tolist() == [True, True, True, False]


def test_greedy_single_viewpoint_covers_convex_room():
    t = table([[1, 1, 1, 1], [1, 1, 0, 0], [0, 0, 1, 1]])
    g = CandidateGraph(np.full((3, 3), 0.9), 0.4)
    assert greedy_select(t, g).selected == (0,)


def test_greedy_follows_frontier():
    # candidate 3 covers the most but sits off the frontier once 0 is chosen
    t = table([[1, 1, 1, 0, 0, 0], [0, 0, 0, 1, 1, 0], [0, 0, 0, 0, 0, 1], [0, 0, 0, 1, 1, 1]])
    ov = chain_overlap(4)
    ov[2, 3] = ov[3, 2] = 0.0
    net = greedy_select(t, CandidateGraph(ov, 0.4))
    assert net.selected == (0, 1, 2) and net.reseeds == 0


def test_greedy_tie_breaks_to_lower_id():
    t = table([[1, 0], [1, 0], [0, 1]])
    g = CandidateGraph(np.full((3, 3), 0.5), 0.4)
    assert greedy_select(t, g).selected[0] == 0


def test_greedy_prefers_larger_overlap_on_equal_gain():
    t = table([[1, 0], [0, 1], [0, 1]])
    ov = np.eye(3)
    ov[0, 1] = ov[1, 0] = 0.5
    ov[0, 2] = ov[2, 0] = 0.9
    assert greedy_select(t, CandidateGraph(ov, 0.4)).selected == (0, 2)


def test_greedy_reseeds_across_disconnected_frontier():
    t = table([[1, 0], [0, 1]])
    net = greedy_select(t, CandidateGraph(np.eye(2), 0.4))
    assert net.selected == (0, 1) and net.reseeds == 1
    with pytest.raises(InfeasibleError):
        greedy_select(t, CandidateGraph(np.eye(2), 0.4), fallback=False)


def test_uncoverable_segment_is_reported():
    with pytest.raises(InfeasibleError) as err:
        greedy_select(table([[1, 0, 0]]), CandidateGraph(np.eye(1), 0.4))
    assert err.value.segment_ids == [1, 2]
    assert "1" in err.value.report()


def test_augment_is_noop_when_connected():
    g = CandidateGraph(chain_overlap(3), 0.4)
    net = ViewpointNetwork((0, 1))
    assert augment_connectivity(net, g) == net


def test_augment_matches_shortest_path_oracle():
    # a corridor 0-1-2-3-4-5 and a shorter but costlier detour 0-6-5
    ov = np.pad(chain_overlap(6, 0.9), ((0, 1), (0, 1)))
    ov[6, 6] = 1.0
    ov[0, 6] = ov[6, 0] = ov[5, 6] = ov[6, 5] = 0.5
    g = CandidateGraph(ov, 0.4)
    out = augment_connectivity(ViewpointNetwork((0, 5)), g)
    ref = nx.Graph()
    for i in range(7):
        for j in range(i + 1, 7):
            if ov[i, j] >= 0.4:
                ref.add_edge(i, j, w=1 - ov[i, j])
    path = nx.dijkstra_path(ref, 0, 5, weight="w")
    assert path == [0, 1, 2, 3, 4, 5]
    assert out.connector_ids == tuple(path[1:-1])
    assert g.is_connected(out.selected)


def test_augment_merges_closest_components_first():
    ov = chain_overlap(5, 0.9)
    g = CandidateGraph(ov, 0.4)
    out = augment_connectivity(ViewpointNetwork((0, 2, 4)), g)
    assert out.connector_ids == (1, 3)


def test_augment_infeasible_at_high_tau():
    g = CandidateGraph(chain_overlap(3, 0.8), 0.99)
    with pytest.raises(InfeasibleError) as err:
        augment_connectivity(ViewpointNetwork((0, 2)), g)
    assert err.value.components == [[0], [2]]


def test_prune_drops_highest_redundant_id():
    t = table([[1, 1, 0], [0, 1, 1], [1, 0, 1]])
    g = CandidateGraph(np.full((3, 3), 0.9), 0.4)
    out = prune_redundant(ViewpointNetwork((0, 1, 2)), t, g)
    assert out.selected == (0, 1)


def test_prune_keeps_bridges():
    t = table([[1, 0], [0, 0], [0, 1]])
    g = CandidateGraph(chain_overlap(3), 0.4)
    net = ViewpointNetwork((0, 1, 2), connector_ids=(1,))
    assert prune_redundant(net, t, g) == net


def test_reinforce_closes_triangle():
    ov = chain_overlap(3, 0.8)
    ov[0, 2] = ov[2, 0] = 0.7
    ov = np.pad(ov, ((0, 1), (0, 1)))
    ov[3, 3] = 1
    ov[3, 1] = ov[1, 3] = ov[3, 2] = ov[2, 3] = 0.6
    g = CandidateGraph(ov, 0.5)
    net = ViewpointNetwork((1, 2))
    out = reinforce_cycles(net, g)
    # leaf 1: candidates 0 (cost .2+.3) and 3 (.4+.4); 0 is cheaper
    assert out.selected == (1, 2, 0) and out.connector_ids == (0,)
    assert reinforce_cycles(net, g, enabled=False) == net


def test_reinforce_accepts_unclosable_leaf():
    g = CandidateGraph(chain_overlap(3), 0.4)
    out = reinforce_cycles(ViewpointNetwork((0, 1, 2)), g)
    assert out.selected == (0, 1, 2) and out.accepted_leaves == (0, 2)


def _random_instance(seed, n=12, s=15):
    rng = np.random.default_rng(seed)
    cov = rng.random((n, s)) < 0.3
    cov[rng.integers(0, n, s), np.arange(s)] = True
    ov = rng.random((n, n))
    ov = (ov + ov.T) / 2
    np.fill_diagonal(ov, 1.0)
    return CoverageTable(cov), CandidateGraph(ov, 0.35)


@given(st.integers(0, 10**6), st.booleans())
def test_plan_invariants(seed, reinforce):
    t, g = _random_instance(seed)
    try:
        net = plan_network(t, g, reinforce=reinforce)
    except InfeasibleError:
        return
    assert t.covered_by(net.selected).all()
    assert g.is_connected(net.selected)
    assert len(set(net.selected)) == len(net.selected)
    assert set(net.connector_ids) <= set(net.selected)
    if not reinforce:
        assert not any(is_removable(v, net, t, g) for v in net.selected)
        assert single_removal_violations(net.selected, net.connector_ids, t.matrix, g.adjacency) == []
    assert plan_network(t, g, reinforce=reinforce) == net


@pytest.mark.parametrize("name", ["square", "l_shape", "two_rooms", "multi_room"])
def test_scene_plans_are_covering_and_connected(name):
    p = plan(name, resolution=0.05)
    net = p.network_
    assert p.coverage_table_.covered_by(net.selected).all()
    assert p.graph_.is_connected(net.selected)
    assert not any(is_removable(v, net, p.coverage_table_, p.graph_) for v in net.selected)


def test_convex_room_needs_one_viewpoint():
    assert len(plan("square", resolution=0.05).network_.selected) == 1
