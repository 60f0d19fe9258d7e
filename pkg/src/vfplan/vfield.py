"""Grid fields over a floorplan: visibility field and distance field."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import shapely

from .visibility import VisibilityEngine

TWO_PI = 2 * math.pi
PGM_MAX = 65535


@dataclass(frozen=True)
class GridSpec:
    """Regular grid; cell (row, col) has its center at
    ``origin + ((col + 0.5) * resolution, (row + 0.5) * resolution)``."""

    resolution: float
    origin: tuple
    width: int
    height: int

    def __post_init__(self):
        if not self.resolution > 0:
            raise ValueError("resolution must be positive")

    @classmethod
    def covering(cls, fp, resolution: float) -> "GridSpec":
        """Grid over the floorplan bounding box plus one cell of margin."""
        minx, miny, maxx, maxy = fp.bounds
        width = int(math.ceil((maxx - minx) / resolution - 1e-9)) + 2
        height = int(math.ceil((maxy - miny) / resolution - 1e-9)) + 2
        return cls(float(resolution), (minx - resolution, miny - resolution), width, height)

    @property
    def shape(self):
        return (self.height, self.width)

    def centers(self):
        """Cell-center coordinates as two (height, width) arrays."""
        xs = self.origin[0] + (np.arange(self.width) + 0.5) * self.resolution
        ys = self.origin[1] + (np.arange(self.height) + 0.5) * self.resolution
        return np.meshgrid(xs, ys)

    def cell_center(self, row, col):
        return (
            self.origin[0] + (col + 0.5) * self.resolution,
            self.origin[1] + (row + 0.5) * self.resolution,
        )

    def cell_of(self, x, y):
        col = int(math.floor((x - self.origin[0]) / self.resolution))
        row = int(math.floor((y - self.origin[1]) / self.resolution))
        return row, col

    def to_dict(self):
        return {
            "resolution": self.resolution,
            "origin": list(self.origin),
            "width": self.width,
            "height": self.height,
        }


@dataclass(frozen=True, eq=False)
class VisibilityField:
    """Valid observed angle per cell; exterior cells hold NaN."""

    spec: GridSpec
    theta: np.ndarray

    kind = "vf"

    @property
    def values(self):
        return self.theta

    @property
    def interior(self):
        return ~np.isnan(self.theta)


@dataclass(frozen=True, eq=False)
class DistanceField:
    """Distance from each interior cell center to the nearest boundary edge.

    Exterior cells hold 0 and are marked False in ``interior``.
    """

    spec: GridSpec
    dist: np.ndarray
    interior: np.ndarray

    kind = "distance"

    @property
    def values(self):
        return np.where(self.interior, self.dist, np.nan)


def interior_mask(fp, spec: GridSpec) -> np.ndarray:
    x, y = spec.centers()
    return shapely.contains_xy(fp.polygon, x, y)


def compute_distance_field(fp, spec: GridSpec) -> DistanceField:
    mask = interior_mask(fp, spec)
    x, y = spec.centers()
    dist = np.zeros(spec.shape)
    pts = shapely.points(x[mask], y[mask])
    dist[mask] = shapely.distance(pts, fp.boundary_lines)
    return DistanceField(spec, dist, mask)


def compute_vf(fp, boundary, tree, scanner, spec: GridSpec, n_threads: int = 1) -> VisibilityField:
    """Angular measure of boundary seen within range, per interior cell.

    Overlapping directions from different segments (possible through
    transparent windows) count once.
    """
    engine = VisibilityEngine(boundary, None, scanner, domain=fp, tree=tree)
    mask = interior_mask(fp, spec)
    x, y = spec.centers()
    pts = np.column_stack((x[mask], y[mask]))
    recs = engine.records(pts, n_threads=n_threads, check_domain=False)
    theta = np.full(spec.shape, np.nan)
    theta[mask] = np.clip([r.theta for r in recs], 0.0, TWO_PI)
    return VisibilityField(spec, theta)


# -- export ---------------------------------------------------------------------


def export_field(field, path, write_csv: bool = False) -> dict:
    """Write ``field`` as plain PGM (P2) plus a JSON sidecar (and CSV).

    Rows are written top (max y) to bottom.  Exterior cells become pixel 0
    and are counted in the sidecar.  Returns the written paths.
    """
    path = Path(path)
    values = np.asarray(field.values, dtype=float)
    exterior = np.isnan(values)
    if field.kind == "vf":
        scale = TWO_PI
    else:
        scale = float(np.nanmax(values)) if np.any(~exterior) else 1.0
        scale = scale or 1.0
    pix = np.zeros(values.shape, dtype=np.int64)
    inside = ~exterior
    pix[inside] = np.rint(np.clip(values[inside] / scale, 0.0, 1.0) * PGM_MAX).astype(np.int64)
    spec = field.spec
    lines = ["P2", f"# vfplan {field.kind} field", f"{spec.width} {spec.height}", str(PGM_MAX)]
    for row in pix[::-1]:
        lines.append(" ".join(map(str, row.tolist())))
    path.write_text("\n".join(lines) + "\n", encoding="ascii")

    sidecar = {
        **spec.to_dict(),
        "kind": field.kind,
        "scale_max": scale,
        "sentinel": "exterior",
        "sentinel_pixel": 0,
        "exterior_cells": int(exterior.sum()),
        "row_order": "top_to_bottom",
    }
    side_path = path.with_suffix(".json")
    side_path.write_text(json.dumps(sidecar, indent=2), encoding="utf-8")
    out = {"pgm": path, "sidecar": side_path}
    if write_csv:
        csv_path = path.with_suffix(".csv")
        with open(csv_path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["row", "col", "x", "y", "value"])
            for r in range(spec.height):
                for c in range(spec.width):
                    x, y = spec.cell_center(r, c)
                    v = values[r, c]
                    w.writerow([r, c, repr(x), repr(y), "nan" if np.isnan(v) else repr(float(v))])
        out["csv"] = csv_path
    return out


def read_field_csv(path) -> np.ndarray:
    """Inverse of the CSV written by :func:`export_field` (NaN = exterior)."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        for rec in reader:
            rows.append((int(rec["row"]), int(rec["col"]), float(rec["value"])))
    h = max(r for r, _, _ in rows) + 1
    w = max(c for _, c, _ in rows) + 1
    out = np.full((h, w), np.nan)
    for r, c, v in rows:
        out[r, c] = v
    return out


def read_pgm(path) -> np.ndarray:
    """Plain PGM reader returning rows in grid order (row 0 = min y)."""
    tokens = []
    for line in Path(path).read_text(encoding="ascii").splitlines():
        line = line.split("#", 1)[0]
        tokens.extend(line.split())
    if tokens[0] != "P2":
        raise ValueError("not a plain PGM file")
    w, h = int(tokens[1]), int(tokens[2])
    data = np.array(tokens[4 : 4 + w * h], dtype=np.int64).reshape(h, w)
    return data[::-1]
