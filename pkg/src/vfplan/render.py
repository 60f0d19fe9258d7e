"""SVG renderings of a plan.

Layer ids, bottom to top: ``floorplan`` (black), ``skeleton`` (gray),
``joints`` (blue), ``midpoints`` (purple), ``candidates`` (hollow),
``edges`` (green, width grows with overlap), ``viewpoints`` (red),
``connectors`` (orange).
"""
from __future__ import annotations

from xml.sax.saxutils import quoteattr

from .skeleton import JOINT, MIDPOINT


def _f(v):
    return f"{float(v):.4f}".rstrip("0").rstrip(".")


def _poly(points, closed, **attrs):
    pts = " ".join(f"{_f(x)},{_f(y)}" for x, y in points)
    tag = "polygon" if closed else "polyline"
    extra = " ".join(f"{k.replace('_', '-')}={quoteattr(str(v))}" for k, v in attrs.items())
    return f'<{tag} points="{pts}" {extra}/>'


def _circle(x, y, r, **attrs):
    extra = " ".join(f"{k.replace('_', '-')}={quoteattr(str(v))}" for k, v in attrs.items())
    return f'<circle cx="{_f(x)}" cy="{_f(y)}" r="{_f(r)}" {extra}/>'


class _Svg:
    def __init__(self, bounds, margin=1.0):
        minx, miny, maxx, maxy = bounds
        self.minx, self.miny = minx - margin, miny - margin
        self.w = maxx - minx + 2 * margin
        self.h = maxy - miny + 2 * margin
        self.scale = max(self.w, self.h) / 100.0
        self.layers = []

    def layer(self, name, items):
        body = "\n    ".join(items)
        self.layers.append(f'  <g id="{name}">\n    {body}\n  </g>' if items else f'  <g id="{name}"/>')

    def text(self):
        # flip y so the drawing uses floorplan coordinates
        head = (
            '<svg xmlns="http://www.w3.org/2000/svg" '
            f'viewBox="{_f(self.minx)} {_f(-(self.miny + self.h))} {_f(self.w)} {_f(self.h)}">'
        )
        return "\n".join([head, '<g transform="scale(1,-1)">', *self.layers, "</g>", "</svg>"]) + "\n"


def _floorplan_items(fp, stroke):
    items = [_poly(fp.outer, True, fill="white", stroke="black", stroke_width=stroke)]
    for h in fp.holes:
        items.append(_poly(h, True, fill="lightgray", stroke="black", stroke_width=stroke))
    return items


def _skeleton_items(spec, lines, stroke):
    items = []
    for line in lines:
        pts = [spec.cell_center(r, c) for r, c in line.path]
        if len(pts) == 1:
            pts = pts * 2
        items.append(_poly(pts, False, fill="none", stroke="gray", stroke_width=stroke))
    return items


def render_skeleton_svg(fp, sk, lines, points) -> str:
    """Debug view: skeleton ridges, joints and inserted midpoints."""
    svg = _Svg(fp.bounds)
    s = svg.scale
    svg.layer("floorplan", _floorplan_items(fp, 0.3 * s))
    svg.layer("skeleton", _skeleton_items(sk.spec, lines, 0.2 * s))
    svg.layer("joints", [_circle(*p.position, 0.6 * s, fill="blue") for p in points if p.kind == JOINT])
    svg.layer("midpoints", [_circle(*p.position, 0.6 * s, fill="purple") for p in points if p.kind == MIDPOINT])
    return svg.text()


def render_plan_svg(planner) -> str:
    """Full plan: floorplan, skeleton, candidates, network edges and viewpoints."""
    fp = planner.floorplan_
    net = planner.network_
    graph = planner.graph_
    svg = _Svg(fp.bounds)
    s = svg.scale
    svg.layer("floorplan", _floorplan_items(fp, 0.3 * s))
    svg.layer("skeleton", _skeleton_items(planner.grid_, planner.lines_, 0.2 * s))
    svg.layer(
        "joints",
        [_circle(*p.position, 0.5 * s, fill="blue") for p in planner.skeleton_points_ if p.kind == JOINT],
    )
    svg.layer(
        "midpoints",
        [_circle(*p.position, 0.5 * s, fill="purple") for p in planner.skeleton_points_ if p.kind == MIDPOINT],
    )
    svg.layer(
        "candidates",
        [_circle(*c.position, 0.8 * s, fill="none", stroke="black", stroke_width=0.15 * s) for c in planner.candidates_],
    )
    pos = graph.positions
    svg.layer(
        "edges",
        [
            _poly([pos[a], pos[b]], False, stroke="green", stroke_width=_f((0.2 + o) * 0.5 * s))
            for a, b, o, _ in net.edges(graph)
        ],
    )
    svg.layer(
        "viewpoints",
        [_circle(*pos[v], 1.0 * s, fill="red") for v in net.selected if v not in net.connector_ids],
    )
    svg.layer("connectors", [_circle(*pos[v], 1.0 * s, fill="orange") for v in net.connector_ids])
    return svg.text()
