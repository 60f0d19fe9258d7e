"""Floorplan parsing, validation and boundary discretisation.

A floorplan is a polygonal domain: one outer ring, optional hole rings and
optional openings (windows, doors) lying on ring edges.  The boundary is
split into *carriers* (maximal wall pieces between openings, plus the
openings themselves) and each carrier into equal-length *fragments*, the
segments a viewpoint network has to cover.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Sequence

import numpy as np
import shapely
from shapely.geometry import LinearRing, Polygon

from .exceptions import FloorplanParseError, FloorplanValidationError

Point2 = tuple  # (x, y) in meters

WALL, WINDOW, DOOR = "wall", "window", "door"
OPENING_KINDS = {"window": WINDOW, "door": DOOR, "door-frame": DOOR}

MERGE_TOL = 1e-9
ON_EDGE_TOL = 1e-6


@dataclass(frozen=True)
class Segment:
    a: Point2
    b: Point2
    kind: str = WALL
    id: int = -1

    @property
    def length(self) -> float:
        return math.hypot(self.b[0] - self.a[0], self.b[1] - self.a[1])

    def point_at(self, t: float) -> Point2:
        return (self.a[0] + t * (self.b[0] - self.a[0]), self.a[1] + t * (self.b[1] - self.a[1]))


@dataclass(frozen=True)
class _Opening:
    segment: Segment
    edge: int
    t0: float
    t1: float


@dataclass(frozen=True, eq=False)
class Floorplan:
    """Validated polygonal domain; build it with :func:`parse_floorplan`."""

    outer: np.ndarray
    holes: tuple = ()
    openings: tuple = ()
    units: str = "meters"
    _placed: tuple = field(default=(), repr=False)

    @property
    def rings(self) -> list:
        return [self.outer, *self.holes]

    @cached_property
    def polygon(self) -> Polygon:
        return Polygon(self.outer, [h for h in self.holes])

    @cached_property
    def boundary_lines(self):
        return self.polygon.boundary

    @property
    def bounds(self) -> tuple:
        return self.polygon.bounds

    @cached_property
    def edges(self) -> list:
        """Ring edges ``(a, b)`` in traversal order: outer ring, then holes."""
        out = []
        for ring in self.rings:
            n = len(ring)
            for i in range(n):
                out.append((tuple(map(float, ring[i])), tuple(map(float, ring[(i + 1) % n]))))
        return out

    def contains(self, xy) -> np.ndarray:
        """Strict interior test for an (k, 2) array of points."""
        xy = np.atleast_2d(np.asarray(xy, dtype=float))
        return shapely.contains_xy(self.polygon, xy[:, 0], xy[:, 1])

    def edge_pieces(self, include_windows: bool) -> list:
        """Boundary pieces per edge, in traversal order.

        Returns ``(edge_index, t0, t1, kind)`` tuples.  Door spans are never
        returned; window spans only when ``include_windows`` is set.
        """
        by_edge = {}
        for op in self._placed:
            by_edge.setdefault(op.edge, []).append(op)
        pieces = []
        for e in range(len(self.edges)):
            cursor = 0.0
            for op in sorted(by_edge.get(e, []), key=lambda o: o.t0):
                if op.t0 > cursor + 1e-12:
                    pieces.append((e, cursor, op.t0, WALL))
                if op.segment.kind == WINDOW and include_windows:
                    pieces.append((e, op.t0, op.t1, WINDOW))
                cursor = op.t1
            if cursor < 1.0 - 1e-12:
                pieces.append((e, cursor, 1.0, WALL))
        return pieces

    def _piece_segment(self, piece) -> Segment:
        e, t0, t1, kind = piece
        a, b = self.edges[e]
        return Segment(_lerp(a, b, t0), _lerp(a, b, t1), kind)

    def walls(self) -> list:
        """Wall pieces (ring edges minus opening spans)."""
        return [self._piece_segment(p) for p in self.edge_pieces(False) if p[3] == WALL]

    def occluders(self, windows_opaque: bool = False) -> list:
        """Opaque segments: wall pieces, plus windows when they are opaque."""
        segs = []
        for p in self.edge_pieces(include_windows=True):
            if p[3] == WALL or windows_opaque:
                segs.append(self._piece_segment(p))
        return [Segment(s.a, s.b, s.kind, i) for i, s in enumerate(segs)]

    def to_dict(self) -> dict:
        return {
            "units": self.units,
            "outer": self.outer.tolist(),
            "holes": [h.tolist() for h in self.holes],
            "openings": [
                {"kind": o.kind, "segment": [list(o.a), list(o.b)]} for o in self.openings
            ],
        }


def _lerp(a, b, t):
    return (a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))


# -- parsing -----------------------------------------------------------------


def parse_floorplan(data) -> Floorplan:
    """Parse floorplan JSON (bytes or str) into a validated :class:`Floorplan`."""
    if isinstance(data, (bytes, bytearray)):
        try:
            data = data.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FloorplanParseError(f"input is not UTF-8: {exc}") from exc
    try:
        obj = json.loads(data)
    except json.JSONDecodeError as exc:
        raise FloorplanParseError(f"malformed JSON: {exc.msg}", exc.lineno, exc.colno) from exc
    return floorplan_from_dict(obj)


def load_floorplan(path) -> Floorplan:
    return parse_floorplan(Path(path).read_bytes())


def _coords(value, where):
    if not isinstance(value, list) or len(value) < 3:
        raise FloorplanParseError(f"{where}: expected a list of at least 3 [x, y] points")
    pts = []
    for i, p in enumerate(value):
        pts.append(_point(p, f"{where}[{i}]"))
    return np.array(pts, dtype=float)


def _point(p, where):
    if (
        not isinstance(p, list)
        or len(p) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in p)
    ):
        raise FloorplanParseError(f"{where}: expected [x, y] numbers")
    if not all(math.isfinite(v) for v in p):
        raise FloorplanParseError(f"{where}: coordinates must be finite")
    return (float(p[0]), float(p[1]))


def floorplan_from_dict(obj) -> Floorplan:
    """Validate a decoded floorplan-JSON object."""
    if not isinstance(obj, dict):
        raise FloorplanParseError("top level must be a JSON object")
    units = obj.get("units", "meters")
    if units != "meters":
        raise FloorplanParseError(f"unsupported units {units!r}; only 'meters'")
    if "outer" not in obj:
        raise FloorplanParseError("missing required key 'outer'")
    outer = _clean_ring(_coords(obj["outer"], "outer"), "outer")
    holes_raw = obj.get("holes", [])
    if not isinstance(holes_raw, list):
        raise FloorplanParseError("'holes' must be a list of rings")
    holes = [
        _clean_ring(_coords(h, f"holes[{i}]"), f"holes[{i}]") for i, h in enumerate(holes_raw)
    ]
    outer = _orient(outer, ccw=True)
    holes = [_orient(h, ccw=False) for h in holes]
    _check_topology(outer, holes)

    openings_raw = obj.get("openings", [])
    if not isinstance(openings_raw, list):
        raise FloorplanParseError("'openings' must be a list")
    openings = []
    for i, op in enumerate(openings_raw):
        if not isinstance(op, dict) or "segment" not in op:
            raise FloorplanParseError(f"openings[{i}]: expected {{'kind', 'segment'}}")
        kind = OPENING_KINDS.get(op.get("kind", "window"))
        if kind is None:
            raise FloorplanParseError(f"openings[{i}]: unknown kind {op.get('kind')!r}")
        seg = op["segment"]
        if not isinstance(seg, list) or len(seg) != 2:
            raise FloorplanParseError(f"openings[{i}].segment: expected two points")
        a, b = _point(seg[0], f"openings[{i}].segment[0]"), _point(seg[1], f"openings[{i}].segment[1]")
        if math.hypot(b[0] - a[0], b[1] - a[1]) <= MERGE_TOL:
            raise FloorplanValidationError(f"openings[{i}] has zero length", ring=None)
        openings.append(Segment(a, b, kind, i))

    fp = Floorplan(outer, tuple(holes), tuple(openings), units)
    placed = _place_openings(fp, openings)
    object.__setattr__(fp, "_placed", tuple(placed))
    return fp


def _clean_ring(pts: np.ndarray, name: str) -> np.ndarray:
    if np.allclose(pts[0], pts[-1], atol=MERGE_TOL, rtol=0):
        pts = pts[:-1]
    keep = [pts[0]]
    for p in pts[1:]:
        if np.hypot(*(p - keep[-1])) > MERGE_TOL:
            keep.append(p)
    if len(keep) > 1 and np.hypot(*(keep[0] - keep[-1])) <= MERGE_TOL:
        keep.pop()
    pts = np.array(keep)
    if len(pts) < 3:
        raise FloorplanValidationError(f"ring {name} has fewer than 3 distinct vertices", ring=name)
    if not LinearRing(pts).is_simple:
        raise FloorplanValidationError(f"ring {name} is self-intersecting", ring=name)
    pts = _merge_collinear(pts)
    if len(pts) < 3 or abs(_signed_area(pts)) <= MERGE_TOL:
        raise FloorplanValidationError(f"ring {name} has zero area", ring=name)
    return pts


def _merge_collinear(pts: np.ndarray) -> np.ndarray:
    pts = [np.asarray(p, dtype=float) for p in pts]
    changed = True
    while changed and len(pts) > 3:
        changed = False
        for i in range(len(pts)):
            prev, cur, nxt = pts[i - 1], pts[i], pts[(i + 1) % len(pts)]
            chord = nxt - prev
            norm = math.hypot(*chord)
            if norm == 0:
                continue
            off = abs(chord[0] * (cur[1] - prev[1]) - chord[1] * (cur[0] - prev[0])) / norm
            along = np.dot(cur - prev, chord) / norm**2
            if off <= MERGE_TOL and 0.0 < along < 1.0:
                del pts[i]
                changed = True
                break
    return np.array(pts)


def _signed_area(pts) -> float:
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _orient(pts, ccw):
    if (_signed_area(pts) > 0) != ccw:
        pts = pts[::-1].copy()
    return pts


def _check_topology(outer, holes):
    outer_poly = Polygon(outer)
    hole_polys = [Polygon(h) for h in holes]
    for i, hp in enumerate(hole_polys):
        if not outer_poly.contains(hp) or hp.boundary.intersects(outer_poly.boundary):
            full = Polygon(outer, holes)
            if shapely.make_valid(full).geom_type.startswith("Multi"):
                raise FloorplanValidationError(
                    f"interior is disconnected: ring holes[{i}] separates the domain",
                    ring=f"holes[{i}]",
                )
            raise FloorplanValidationError(
                f"ring holes[{i}] is not strictly inside the outer ring", ring=f"holes[{i}]"
            )
    for i in range(len(hole_polys)):
        for j in range(i + 1, len(hole_polys)):
            if hole_polys[i].intersects(hole_polys[j]):
                full = shapely.make_valid(Polygon(outer, holes))
                if full.geom_type.startswith("Multi") or full.geom_type == "GeometryCollection":
                    raise FloorplanValidationError(
                        f"interior is disconnected by rings holes[{i}] and holes[{j}]",
                        ring=f"holes[{i}]",
                    )
                raise FloorplanValidationError(
                    f"rings holes[{i}] and holes[{j}] overlap", ring=f"holes[{j}]"
                )
    full = Polygon(outer, holes)
    if not full.is_valid:
        raise FloorplanValidationError(f"invalid polygon: {shapely.is_valid_reason(full)}")


def _place_openings(fp: Floorplan, openings: Sequence[Segment]) -> list:
    placed = []
    edges = fp.edges
    for op in openings:
        found = None
        for e, (a, b) in enumerate(edges):
            ex, ey = b[0] - a[0], b[1] - a[1]
            elen2 = ex * ex + ey * ey
            elen = math.sqrt(elen2)
            ts = []
            ok = True
            for p in (op.a, op.b):
                dx, dy = p[0] - a[0], p[1] - a[1]
                if abs(ex * dy - ey * dx) / elen > ON_EDGE_TOL:
                    ok = False
                    break
                t = (ex * dx + ey * dy) / elen2
                if t < -ON_EDGE_TOL / elen or t > 1 + ON_EDGE_TOL / elen:
                    ok = False
                    break
                ts.append(min(max(t, 0.0), 1.0))
            if ok:
                found = (e, min(ts), max(ts))
                break
        if found is None:
            raise FloorplanValidationError(
                f"opening {op.id} ({op.kind}) does not lie on any boundary edge"
            )
        placed.append(_Opening(op, *found))
    by_edge = {}
    for p in placed:
        by_edge.setdefault(p.edge, []).append(p)
    for e, ops in by_edge.items():
        ops.sort(key=lambda o: o.t0)
        for x, y in zip(ops, ops[1:]):
            if y.t0 < x.t1 - 1e-12:
                raise FloorplanValidationError(
                    f"openings {x.segment.id} and {y.segment.id} overlap on edge {e}"
                )
    return placed


# -- boundary discretisation --------------------------------------------------


@dataclass(frozen=True, eq=False)
class BoundarySet:
    """Ordered coverage targets ``L`` and the carriers they were cut from.

    Fragment ``j`` spans parameters ``[t0[j], t1[j]]`` of carrier
    ``carrier[j]``.  Arc coordinate ``s`` runs along all carriers
    concatenated; carrier ``c`` occupies ``[offset[c], offset[c+1]]``.
    """

    segments: tuple
    partition_length: float
    carriers: tuple
    carrier: np.ndarray
    t0: np.ndarray
    t1: np.ndarray

    def __len__(self):
        return len(self.segments)

    @cached_property
    def carrier_lengths(self) -> np.ndarray:
        return np.array([c.length for c in self.carriers])

    @cached_property
    def offset(self) -> np.ndarray:
        return np.concatenate(([0.0], np.cumsum(self.carrier_lengths)))

    @cached_property
    def s_ranges(self) -> tuple:
        lens = self.carrier_lengths[self.carrier]
        base = self.offset[self.carrier]
        return base + self.t0 * lens, base + self.t1 * lens

    @cached_property
    def lengths(self) -> np.ndarray:
        return np.array([s.length for s in self.segments])

    @cached_property
    def key(self) -> str:
        """Content hash used to detect records computed on another set."""
        h = hashlib.sha1()
        for c in self.carriers:
            h.update(np.array([*c.a, *c.b], dtype=float).tobytes())
        h.update(self.t0.tobytes())
        h.update(self.t1.tobytes())
        return h.hexdigest()

    def carrier_arrays(self) -> tuple:
        a = np.array([c.a for c in self.carriers], dtype=float).reshape(-1, 2)
        b = np.array([c.b for c in self.carriers], dtype=float).reshape(-1, 2)
        return a, b

    def fragment_arrays(self) -> tuple:
        a = np.array([s.a for s in self.segments], dtype=float).reshape(-1, 2)
        b = np.array([s.b for s in self.segments], dtype=float).reshape(-1, 2)
        return a, b


def n_fragments(length: float, partition_length: float) -> int:
    return max(1, math.ceil(length / partition_length - 1e-9))


def partition_boundary(
    fp: Floorplan, partition_length: float, include_openings: bool = False
) -> BoundarySet:
    """Cut every carrier into ``ceil(len / partition_length)`` equal fragments."""
    if not partition_length > 0:
        raise ValueError("partition_length must be positive")
    carriers, segments = [], []
    carrier_idx, t0s, t1s = [], [], []
    for piece in fp.edge_pieces(include_windows=include_openings):
        seg = fp._piece_segment(piece)
        c = len(carriers)
        carriers.append(Segment(seg.a, seg.b, seg.kind, c))
        k = n_fragments(seg.length, partition_length)
        for i in range(k):
            t0, t1 = i / k, (i + 1) / k
            segments.append(Segment(seg.point_at(t0), seg.point_at(t1), seg.kind, len(segments)))
            carrier_idx.append(c)
            t0s.append(t0)
            t1s.append(t1)
    return BoundarySet(
        tuple(segments),
        float(partition_length),
        tuple(carriers),
        np.array(carrier_idx, dtype=int),
        np.array(t0s, dtype=float),
        np.array(t1s, dtype=float),
    )
