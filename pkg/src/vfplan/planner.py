"""Greedy viewpoint-network optimisation.

Pipeline: coverage table -> greedy frontier selection -> connectivity
augmentation -> redundancy pruning -> optional cycle reinforcement.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import networkx as nx
import numpy as np

from .exceptions import InfeasibleError

COVER, CONNECTOR = "cover", "connector"


@dataclass(frozen=True, eq=False)
class CoverageTable:
    """Boolean candidates x segments matrix: ``matrix[i, j]`` iff candidate i covers segment j."""

    matrix: np.ndarray

    @property
    def counts(self) -> np.ndarray:
        return self.matrix.sum(axis=1)

    @property
    def shape(self):
        return self.matrix.shape

    def uncoverable(self) -> list:
        """Segments no candidate covers."""
        return np.flatnonzero(~self.matrix.any(axis=0)).tolist()

    def covered_by(self, ids) -> np.ndarray:
        ids = list(ids)
        if not ids:
            return np.zeros(self.matrix.shape[1], dtype=bool)
        return self.matrix[ids].any(axis=0)


def build_coverage_table(records, engine, coverage_fraction: float = 1.0, strict: bool = True) -> CoverageTable:
    """Coverage rows for every candidate record.

    With ``strict`` an :class:`InfeasibleError` names the segments that no
    candidate covers.
    """
    if len(records) == 0:
        raise InfeasibleError("no candidate viewpoints", segment_ids=list(range(len(engine.boundary))))
    matrix = np.array([engine.coverage_row(r, coverage_fraction) for r in records], dtype=bool)
    table = CoverageTable(matrix)
    if strict:
        missing = table.uncoverable()
        if missing:
            raise InfeasibleError(
                f"{len(missing)} boundary segment(s) are covered by no candidate viewpoint",
                segment_ids=missing,
            )
    return table


class CandidateGraph:
    """Overlap graph on candidates: an edge wherever the overlap reaches ``tau``."""

    def __init__(self, overlap: np.ndarray, tau: float, positions=None):
        overlap = np.asarray(overlap, dtype=float)
        self.overlap = overlap
        self.tau = float(tau)
        m = overlap.shape[0]
        self.positions = (
            np.zeros((m, 2)) if positions is None else np.asarray(positions, dtype=float).reshape(m, 2)
        )
        adj = overlap >= self.tau
        np.fill_diagonal(adj, False)
        self.adjacency = adj
        g = nx.Graph()
        g.add_nodes_from(range(m))
        for i, j in zip(*np.nonzero(np.triu(adj, 1))):
            g.add_edge(int(i), int(j), weight=float(1.0 - overlap[i, j]), overlap=float(overlap[i, j]))
        self.graph = g

    def __len__(self):
        return self.overlap.shape[0]

    def weight(self, i, j) -> float:
        return 1.0 - float(self.overlap[i, j])

    def induced(self, ids) -> nx.Graph:
        return self.graph.subgraph(ids)

    def is_connected(self, ids) -> bool:
        ids = list(ids)
        return bool(ids) and nx.is_connected(self.graph.subgraph(ids))


@dataclass(frozen=True)
class ViewpointNetwork:
    selected: tuple
    connector_ids: tuple = ()
    coverage_stage: tuple = ()
    reseeds: int = 0
    accepted_leaves: tuple = ()
    metrics: dict = field(default_factory=dict)

    def role(self, vid) -> str:
        return CONNECTOR if vid in self.connector_ids else COVER

    def edges(self, graph: CandidateGraph) -> list:
        """Induced edges ``(a, b, overlap, weight)`` with ``a < b``, sorted."""
        sub = graph.induced(self.selected)
        out = []
        for a, b, d in sub.edges(data=True):
            a, b = min(a, b), max(a, b)
            out.append((a, b, d["overlap"], d["weight"]))
        return sorted(out)

    def to_dict(self, graph: CandidateGraph, config=None) -> dict:
        vps = []
        for k, vid in enumerate(self.selected):
            x, y = graph.positions[vid]
            vps.append({"id": int(vid), "x": float(x), "y": float(y), "role": self.role(vid), "order": k})
        edges = [
            {"a": int(a), "b": int(b), "overlap": float(o), "weight": float(w)}
            for a, b, o, w in self.edges(graph)
        ]
        return {"viewpoints": vps, "edges": edges, "metrics": dict(self.metrics), "config": dict(config or {})}


def _max_overlap_with(graph, cand, selected):
    if not selected:
        return 0.0
    return float(graph.overlap[cand, list(selected)].max())


def _pick(graph, pool, gain, selected):
    """Best of ``pool``: new coverage, then overlap with the selection, then lowest id."""
    best, best_key = None, None
    for c in sorted(pool):
        key = (int(gain[c]), _max_overlap_with(graph, c, selected), -c)
        if best_key is None or key > best_key:
            best, best_key = c, key
    return best


def greedy_select(table: CoverageTable, graph: CandidateGraph, fallback: bool = True) -> ViewpointNetwork:
    """Frontier-restricted greedy cover.

    The seed is the candidate covering most segments; afterwards only graph
    neighbours of the selection are eligible.  When the frontier adds
    nothing while segments remain, a new seed is drawn from all candidates
    (``fallback``) or :class:`InfeasibleError` reports the leftovers.
    """
    cover = table.matrix
    n_cand, n_seg = cover.shape
    missing = table.uncoverable()
    if missing:
        raise InfeasibleError("segments covered by no candidate", segment_ids=missing)
    uncovered = np.ones(n_seg, dtype=bool)
    selected, chosen = [], set()
    reseeds = 0
    while uncovered.any():
        gain = (cover & uncovered).sum(axis=1)
        if not selected:
            pick = _pick(graph, range(n_cand), gain, selected)
        else:
            frontier = set()
            for s in selected:
                frontier.update(graph.graph.neighbors(s))
            frontier -= chosen
            pick = _pick(graph, frontier, gain, selected) if frontier else None
            if pick is None or gain[pick] == 0:
                if not fallback:
                    raise InfeasibleError(
                        "overlap frontier exhausted with segments left uncovered",
                        segment_ids=np.flatnonzero(uncovered).tolist(),
                    )
                pool = [c for c in range(n_cand) if c not in chosen]
                pick = _pick(graph, pool, gain, selected)
                reseeds += 1
        selected.append(pick)
        chosen.add(pick)
        uncovered &= ~cover[pick]
    return ViewpointNetwork(tuple(selected), coverage_stage=tuple(selected), reseeds=reseeds)


def _components(graph, ids):
    comps = [sorted(c) for c in nx.connected_components(graph.induced(ids))]
    return sorted(comps)


def augment_connectivity(net: ViewpointNetwork, graph: CandidateGraph) -> ViewpointNetwork:
    """Join induced components through minimum-weight candidate paths.

    The closest pair of components is merged first; intermediate
    candidates on the path become connectors.
    """
    selected = list(net.selected)
    connectors = list(net.connector_ids)
    if not selected:
        return net
    while True:
        comps = _components(graph, selected)
        if len(comps) <= 1:
            break
        best = None
        for ci, comp in enumerate(comps):
            others = {v: k for k, c in enumerate(comps) if k != ci for v in c}
            dist, paths = nx.multi_source_dijkstra(graph.graph, set(comp), weight="weight")
            reach = [(d, v) for v, d in dist.items() if v in others]
            if not reach:
                continue
            d, v = min(reach)
            cand = (d, ci, others[v], paths[v])
            if best is None or cand[:3] < best[:3]:
                best = cand
        if best is None:
            raise InfeasibleError(
                "selected viewpoints cannot be joined: no chain of candidates reaches the overlap threshold "
                f"tau={graph.tau:g} between components",
                components=comps,
            )
        for v in best[3]:
            if v not in selected:
                selected.append(v)
                connectors.append(v)
    return replace(net, selected=tuple(selected), connector_ids=tuple(connectors))


def _covers_all(table, ids):
    return bool(table.covered_by(ids).all())


def is_removable(vid, net, table, graph) -> bool:
    rest = [v for v in net.selected if v != vid]
    return bool(rest) and _covers_all(table, rest) and graph.is_connected(rest)


def prune_redundant(net: ViewpointNetwork, table: CoverageTable, graph: CandidateGraph) -> ViewpointNetwork:
    """Drop viewpoints whose removal keeps coverage and connectivity (highest id first)."""
    selected = list(net.selected)
    cover = table.matrix
    changed = True
    while changed:
        changed = False
        counts = cover[selected].sum(axis=0)
        for vid in sorted(selected, reverse=True):
            if len(selected) <= 1:
                break
            if np.any(counts[cover[vid]] <= 1):
                continue
            rest = [v for v in selected if v != vid]
            if graph.is_connected(rest):
                selected = rest
                counts = counts - cover[vid]
                changed = True
    keep = set(selected)
    return replace(
        net,
        selected=tuple(selected),
        connector_ids=tuple(v for v in net.connector_ids if v in keep),
    )


def reinforce_cycles(net: ViewpointNetwork, graph: CandidateGraph, enabled: bool = True, budget=None) -> ViewpointNetwork:
    """Close a loop through every leaf of the induced graph where possible.

    For each degree-1 viewpoint (ascending id) the unselected candidate
    adjacent to it and to some other selected viewpoint with the smallest
    summed edge weight is added as a connector.  Leaves without such a
    candidate, or whose cheapest closure exceeds ``budget``, are recorded
    in ``accepted_leaves``.
    """
    if not enabled:
        return net
    selected = list(net.selected)
    connectors = list(net.connector_ids)
    accepted = []
    sub = graph.induced(selected)
    leaves = sorted(v for v in selected if sub.degree(v) == 1)
    for leaf in leaves:
        sub = graph.induced(selected)
        if sub.degree(leaf) != 1:
            continue
        chosen = set(selected)
        best = None
        for c in sorted(graph.graph.neighbors(leaf)):
            if c in chosen:
                continue
            others = [s for s in graph.graph.neighbors(c) if s in chosen and s != leaf]
            if not others:
                continue
            cost = graph.weight(c, leaf) + min(graph.weight(c, s) for s in others)
            if best is None or (cost, c) < best:
                best = (cost, c)
        if best is None or (budget is not None and best[0] > budget):
            accepted.append(leaf)
            continue
        selected.append(best[1])
        connectors.append(best[1])
    return replace(
        net, selected=tuple(selected), connector_ids=tuple(connectors), accepted_leaves=tuple(accepted)
    )


def plan_network(table, graph, reinforce: bool = False, fallback: bool = True) -> ViewpointNetwork:
    net = greedy_select(table, graph, fallback=fallback)
    net = augment_connectivity(net, graph)
    net = prune_redundant(net, table, graph)
    return reinforce_cycles(net, graph, enabled=reinforce)
