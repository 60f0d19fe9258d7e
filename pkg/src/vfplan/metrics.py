"""Network quality metrics: viewpoint count, WAPL and coverage."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import networkx as nx

UNREACHABLE_WEIGHT = 100.0


@dataclass(frozen=True)
class MetricsReport:
    vc: int
    wapl: float
    coverage_percent: float
    component_count: int
    disconnected_pairs: int

    def to_dict(self):
        return asdict(self)


def wapl(nodes, edges) -> float:
    """Weighted average path length over ordered node pairs.

    ``edges`` holds ``(a, b, weight)`` triples.  Pairs with no path count
    as 100; with fewer than two nodes the value is 0.
    """
    nodes = list(nodes)
    n = len(nodes)
    if n <= 1:
        return 0.0
    g = nx.Graph()
    g.add_nodes_from(nodes)
    for a, b, w in edges:
        if g.has_edge(a, b):
            w = min(w, g[a][b]["weight"])
        g.add_edge(a, b, weight=float(w))
    total = 0.0
    for src, lengths in nx.all_pairs_dijkstra_path_length(g, weight="weight"):
        total += sum(d for v, d in lengths.items() if v != src)
        total += UNREACHABLE_WEIGHT * (n - len(lengths))
    return total / (n * (n - 1))


def compute_wapl(net, graph) -> float:
    return wapl(net.selected, [(a, b, w) for a, b, _, w in net.edges(graph)])


def compute_report(net, table, graph) -> MetricsReport:
    ids = list(net.selected)
    n_seg = table.shape[1]
    covered = int(table.covered_by(ids).sum())
    coverage = 100.0 * covered / n_seg if n_seg else 100.0
    sub = graph.induced(ids)
    comps = nx.number_connected_components(sub) if ids else 0
    sizes = [len(c) for c in nx.connected_components(sub)]
    n = len(ids)
    disconnected = n * (n - 1) - sum(s * (s - 1) for s in sizes)
    return MetricsReport(len(ids), compute_wapl(net, graph), coverage, comps, disconnected)


def format_report(report: MetricsReport) -> str:
    rows = [
        ("VC", f"{report.vc:d}"),
        ("WAPL", f"{report.wapl:.4f}"),
        ("coverage_percent", f"{report.coverage_percent:.2f}"),
        ("components", f"{report.component_count:d}"),
        ("disconnected_pairs", f"{report.disconnected_pairs:d}"),
    ]
    width = max(len(k) for k, _ in rows)
    lines = [f"{'metric':<{width}}  value", f"{'-' * width}  -----"]
    lines += [f"{k:<{width}}  {v}" for k, v in rows]
    return "\n".join(lines)
