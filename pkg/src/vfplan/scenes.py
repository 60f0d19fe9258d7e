"""Synthetic floorplans used by the tests, the acceptance suite and the CLI.

Every builder returns a floorplan JSON object (a plain dict); use
:func:`load_scene` for a parsed :class:`~vfplan.floorplan.Floorplan`.
"""
from __future__ import annotations

import math

import shapely
from shapely.geometry import Polygon, box
from shapely.ops import unary_union

from .floorplan import floorplan_from_dict


def _rect(x0, y0, x1, y1):
    return [[x0, y0], [x1, y0], [x1, y1], [x0, y1]]


def _ring(coords):
    return [[round(x, 9), round(y, 9)] for x, y in list(coords)[:-1]]


def _from_polygon(poly: Polygon) -> dict:
    poly = shapely.normalize(poly)
    return {
        "units": "meters",
        "outer": _ring(poly.exterior.coords),
        "holes": [_ring(h.coords) for h in poly.interiors],
    }


def square(size=10.0):
    return {"units": "meters", "outer": _rect(0, 0, size, size)}


def rectangle(width=10.0, height=4.0):
    return {"units": "meters", "outer": _rect(0, 0, width, height)}


def closet():
    return rectangle(1.0, 1.0)


def corridor(length=40.0, width=2.0):
    return rectangle(length, width)


def l_shape():
    return {
        "units": "meters",
        "outer": [[0, 0], [12, 0], [12, 5], [5, 5], [5, 12], [0, 12]],
    }


def two_rooms(room=6.0, wall=0.2, door=1.6):
    """Two square rooms side by side, joined by a door through the shared wall."""
    lo = (room - door) / 2
    x1 = room + wall
    return {
        "units": "meters",
        "outer": [
            [0, 0], [room, 0], [room, lo], [x1, lo], [x1, 0], [x1 + room, 0],
            [x1 + room, room], [x1, room], [x1, lo + door], [room, lo + door],
            [room, room], [0, room],
        ],
    }


def square_with_hole(size=10.0, hole=4.0):
    lo = (size - hole) / 2
    return {
        "units": "meters",
        "outer": _rect(0, 0, size, size),
        "holes": [_rect(lo, lo, lo + hole, lo + hole)],
    }


def ngon(n=64, radius=5.0):
    pts = [
        [round(radius * math.cos(2 * math.pi * k / n), 9), round(radius * math.sin(2 * math.pi * k / n), 9)]
        for k in range(n)
    ]
    return {"units": "meters", "outer": pts}


def room_grid(nx, ny, room_w, room_h, wall=0.2, door=1.6):
    """``nx`` x ``ny`` rooms separated by walls, a centered door between every adjacent pair.

    Interior wall junctions end up as "+"-shaped holes.
    """
    parts = []
    for i in range(nx):
        for j in range(ny):
            x0 = i * (room_w + wall)
            y0 = j * (room_h + wall)
            parts.append(box(x0, y0, x0 + room_w, y0 + room_h))
            if i + 1 < nx:
                yc = y0 + room_h / 2
                parts.append(box(x0 + room_w - 1e-9, yc - door / 2, x0 + room_w + wall + 1e-9, yc + door / 2))
            if j + 1 < ny:
                xc = x0 + room_w / 2
                parts.append(box(xc - door / 2, y0 + room_h - 1e-9, xc + door / 2, y0 + room_h + wall + 1e-9))
    poly = unary_union(parts)
    poly = shapely.set_precision(poly, 1e-6)
    return _from_polygon(poly)


def multi_room():
    """Six 6 x 5 m rooms in a 3 x 2 grid."""
    return room_grid(3, 2, 6.0, 5.0)


def office():
    """Twenty rooms, 5 x 4 grid, about 60 x 40 m."""
    return room_grid(5, 4, 11.84, 9.85)


def town(nx=3, ny=2, block_w=40.0, block_h=30.0, street=16.0):
    """Outdoor street network: building blocks are holes in an open yard."""
    width = nx * block_w + (nx + 1) * street
    height = ny * block_h + (ny + 1) * street
    holes = []
    for i in range(nx):
        for j in range(ny):
            x0 = street + i * (block_w + street)
            y0 = street + j * (block_h + street)
            holes.append(_rect(x0, y0, x0 + block_w, y0 + block_h))
    return {"units": "meters", "outer": _rect(0, 0, width, height), "holes": holes}


SCENES = {
    "square": square,
    "rectangle": rectangle,
    "closet": closet,
    "corridor": corridor,
    "l_shape": l_shape,
    "two_rooms": two_rooms,
    "square_with_hole": square_with_hole,
    "ngon64": ngon,
    "multi_room": multi_room,
    "office": office,
    "town": town,
}


def scene_dict(name: str) -> dict:
    try:
        return SCENES[name]()
    except KeyError:
        raise KeyError(f"unknown scene {name!r}; choose from {sorted(SCENES)}") from None


def load_scene(name: str):
    return floorplan_from_dict(scene_dict(name))
