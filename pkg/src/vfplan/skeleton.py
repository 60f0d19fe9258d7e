"""Grid medial-axis skeleton, joints, ridges and candidate refinement.

The interior mask is thinned in distance order, reduced to a minimal
8-connected curve set, and spurs are pruned when they are short or when
the boundary on their two sides is nearly parallel (grid noise).  Pixels with three or
more skeleton neighbours form joint clusters; the rest decomposes into
ridges between converging points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage
import shapely
from skimage.morphology import medial_axis

from .exceptions import SkeletonError

JOINT, MIDPOINT, ENDPOINT = "joint", "inserted-midpoint", "endpoint"

# tips whose nearest-boundary directions span less than this are noise
MIN_SEPARATION = math.radians(60.0)

# neighbour offsets, clockwise from north (row axis points to +y)
_OFFSETS = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)]
_EIGHT = np.ones((3, 3), dtype=int)


@dataclass(frozen=True, eq=False)
class SkeletonGrid:
    spec: object
    mask: np.ndarray

    @property
    def cells(self):
        """Skeleton cells as (row, col) in row-major order."""
        r, c = np.nonzero(self.mask)
        return list(zip(r.tolist(), c.tolist()))

    def degree(self) -> np.ndarray:
        return _degree(self.mask)

    def n_components(self) -> int:
        return int(ndimage.label(self.mask, structure=_EIGHT)[1])


@dataclass(frozen=True)
class ConvergingPoint:
    position: tuple
    kind: str
    id: int
    cell: tuple


@dataclass(frozen=True)
class ConvergingLine:
    endpoints: tuple
    path: tuple
    length: float

    @property
    def closed(self) -> bool:
        return self.endpoints[0] == self.endpoints[1]


def _degree(mask):
    m = mask.astype(np.int32)
    return np.where(mask, ndimage.convolve(m, _EIGHT, mode="constant") - m, 0)


def _build_simple_lut():
    # 3x3 positions of the clockwise neighbours
    pos = [(1 + dr, 1 + dc) for dr, dc in _OFFSETS]
    four = {0, 2, 4, 6}
    lut = np.zeros(256, dtype=bool)
    for code in range(256):
        fg = {pos[k] for k in range(8) if code >> k & 1}
        bg = {pos[k] for k in range(8) if not code >> k & 1}

        def components(cells, diag):
            seen, count, comps = set(), 0, []
            for start in sorted(cells):
                if start in seen:
                    continue
                count += 1
                stack, comp = [start], []
                seen.add(start)
                while stack:
                    r, c = stack.pop()
                    comp.append((r, c))
                    for dr in (-1, 0, 1):
                        for dc in (-1, 0, 1):
                            if (dr, dc) == (0, 0) or (not diag and dr and dc):
                                continue
                            nb = (r + dr, c + dc)
                            if nb in cells and nb not in seen:
                                seen.add(nb)
                                stack.append(nb)
                comps.append(comp)
            return comps

        t8 = len(components(fg, diag=True))
        four_adj = {pos[k] for k in four}
        t4 = sum(1 for comp in components(bg, diag=False) if four_adj & set(comp))
        lut[code] = t8 == 1 and t4 == 1
    return lut


_SIMPLE = _build_simple_lut()


def _code(mask, r, c):
    h, w = mask.shape
    code = 0
    for k, (dr, dc) in enumerate(_OFFSETS):
        rr, cc = r + dr, c + dc
        if 0 <= rr < h and 0 <= cc < w and mask[rr, cc]:
            code |= 1 << k
    return code


def _codes(mask):
    m = np.pad(mask, 1).astype(np.int32)
    h, w = mask.shape
    code = np.zeros(mask.shape, dtype=np.int32)
    for k, (dr, dc) in enumerate(_OFFSETS):
        code |= m[1 + dr : 1 + dr + h, 1 + dc : 1 + dc + w] << k
    return code


def minimal_thin(mask: np.ndarray) -> np.ndarray:
    """Delete simple pixels with >= 2 neighbours until none is left.

    Topology and line tips are preserved; the result has no 2x2 block and
    no redundant staircase pixels.  Sweeps are row-major, so the output is
    deterministic.
    """
    mask = mask.copy()
    while True:
        codes = _codes(mask)
        deg = _degree(mask)
        cand = mask & _SIMPLE[codes] & (deg >= 2)
        if not cand.any():
            return mask
        changed = False
        for r, c in zip(*np.nonzero(cand)):
            code = _code(mask, r, c)
            if _SIMPLE[code] and bin(code).count("1") >= 2:
                mask[r, c] = False
                changed = True
        if not changed:
            return mask


def _neighbours(mask, r, c):
    h, w = mask.shape
    out = []
    for dr, dc in _OFFSETS:
        rr, cc = r + dr, c + dc
        if 0 <= rr < h and 0 <= cc < w and mask[rr, cc]:
            out.append((rr, cc))
    return out


def _prune_spurs(mask, max_len_cells):
    """Remove endpoint-to-junction branches shorter than ``max_len_cells``."""
    for _ in range(100):
        deg = _degree(mask)
        removed = False
        ends = list(zip(*np.nonzero(mask & (deg == 1))))
        to_clear = []
        for start in ends:
            path, length = [start], 0.0
            prev, cur = None, start
            reached_junction = False
            while True:
                nxt = [n for n in _neighbours(mask, *cur) if n != prev and n not in path]
                if not nxt:
                    break
                n = min(nxt)
                length += math.hypot(n[0] - cur[0], n[1] - cur[1])
                prev, cur = cur, n
                if deg[cur] >= 3:
                    reached_junction = True
                    break
                path.append(cur)
                if length >= max_len_cells:
                    break
            if reached_junction and length < max_len_cells:
                to_clear.extend(path)
        if to_clear:
            for cell in to_clear:
                mask[cell] = False
            mask = minimal_thin(mask)
            removed = True
        if not removed:
            return mask
    return mask


def separation_angle(fp, spec, cells) -> np.ndarray:
    """Widest angle between nearest-boundary directions in each 3x3 block.

    Large on true medial ridges (the nearest wall jumps across them),
    small on ridges that only follow a slight bend of one wall.
    """
    cells = np.asarray(cells, dtype=float).reshape(-1, 2)
    if cells.size == 0:
        return np.empty(0)
    off = np.array([(dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1)], dtype=float)
    rc = cells[:, None, :] + off[None, :, :]
    x = spec.origin[0] + (rc[..., 1] + 0.5) * spec.resolution
    y = spec.origin[1] + (rc[..., 0] + 0.5) * spec.resolution
    flat = shapely.points(x.ravel(), y.ravel())
    inside = shapely.contains_xy(fp.polygon, x.ravel(), y.ravel()).reshape(x.shape)
    feet = shapely.get_coordinates(shapely.shortest_line(flat, fp.boundary_lines))[1::2]
    u = feet.reshape(*x.shape, 2) - np.stack((x, y), axis=-1)
    norm = np.hypot(u[..., 0], u[..., 1])
    u = u / np.where(norm > 0, norm, 1.0)[..., None]
    dots = np.einsum("nik,njk->nij", u, u)
    ok = inside[:, :, None] & inside[:, None, :] & (norm > 0)[:, :, None] & (norm > 0)[:, None, :]
    dots = np.where(ok, dots, 1.0)
    return np.arccos(np.clip(dots.min(axis=(1, 2)), -1.0, 1.0))


def _peel_insignificant(mask, fp, spec):
    """Erode tips while their separation angle is below the threshold."""
    cells = list(zip(*np.nonzero(mask)))
    sep = dict(zip(cells, separation_angle(fp, spec, cells)))
    deg = _degree(mask)
    queue = sorted(c for c in cells if deg[c] == 1)
    while queue:
        cell = queue.pop(0)
        if not mask[cell] or sep[cell] >= MIN_SEPARATION:
            continue
        nbrs = _neighbours(mask, *cell)
        if len(nbrs) != 1:
            continue
        mask[cell] = False
        nb = nbrs[0]
        if len(_neighbours(mask, *nb)) == 1:
            queue.append(nb)
    return mask


def extract_skeleton(dist, fp, r_min: float = 0.0) -> SkeletonGrid:
    """Thin the interior of ``dist`` to a one-pixel medial-axis skeleton.

    Spurs are pruned when shorter than ``max(3 cells, r_min)`` or when the
    two walls they separate are nearly parallel.  Raises
    :class:`SkeletonError` when the grid is too coarse to resolve the
    interior or splits it into pieces.
    """
    spec = dist.spec
    res = spec.resolution
    mask = np.asarray(dist.interior, dtype=bool)
    if not mask.any() or float(dist.dist[mask].max()) < res:
        raise SkeletonError(
            f"interior is thinner than two cells at resolution {res} m; use a finer resolution"
        )
    if ndimage.label(mask, structure=_EIGHT)[1] > 1:
        raise SkeletonError(
            f"interior falls apart into several pieces at resolution {res} m "
            "(a passage is narrower than a cell); use a finer resolution"
        )
    # fixed tie-break seed keeps the thinning order reproducible
    sk = medial_axis(mask, rng=0)
    sk = minimal_thin(sk & mask)
    sk = _peel_insignificant(sk, fp, spec)
    sk = _prune_spurs(sk, max(3.0, r_min / res))
    if ndimage.label(sk, structure=_EIGHT)[1] != 1:
        raise SkeletonError(f"skeleton is disconnected at resolution {res} m; use a finer resolution")
    return SkeletonGrid(spec, sk)


def _clusters(sk: SkeletonGrid):
    deg = sk.degree()
    cand = sk.mask & (deg >= 3)
    labels, n = ndimage.label(cand, structure=_EIGHT)
    return labels, n


def _center(spec, cell):
    x, y = spec.cell_center(*cell)
    return (float(x), float(y))


def detect_joints(sk: SkeletonGrid) -> list:
    """Joints (one per cluster of >=3-neighbour pixels), then leaf endpoints."""
    labels, n = _clusters(sk)
    points = []
    for lab in range(1, n + 1):
        rr, cc = np.nonzero(labels == lab)
        cr, cc_ = rr.mean(), cc.mean()
        d2 = (rr - cr) ** 2 + (cc - cc_) ** 2
        k = int(np.argmin(d2))  # first minimum is lowest row-major index
        cell = (int(rr[k]), int(cc[k]))
        points.append(ConvergingPoint(_center(sk.spec, cell), JOINT, len(points), cell))
    deg = sk.degree()
    for r, c in zip(*np.nonzero(sk.mask & (deg <= 1))):
        cell = (int(r), int(c))
        points.append(ConvergingPoint(_center(sk.spec, cell), ENDPOINT, len(points), cell))
    return points


def _polyline_length(pts):
    pts = np.asarray(pts, dtype=float)
    if len(pts) < 2:
        return 0.0
    return float(np.sum(np.hypot(*np.diff(pts, axis=0).T)))


def build_converging_lines(sk: SkeletonGrid, points: list) -> tuple:
    """Split the skeleton into ridges between converging points.

    Returns ``(lines, points)``; ``points`` extends the input with one
    synthetic anchor per joint-free closed loop (its lowest row-major cell).
    """
    spec = sk.spec
    points = list(points)
    labels, n = _clusters(sk)
    cluster_joint = {}
    for p in points:
        if p.kind == JOINT:
            cluster_joint[int(labels[p.cell])] = p.id
    endpoint_at = {p.cell: p.id for p in points if p.kind == ENDPOINT}

    path_mask = sk.mask & (labels == 0)
    comp, n_comp = ndimage.label(path_mask, structure=_EIGHT)
    lines = []
    # components in order of their first row-major cell
    for lab in range(1, n_comp + 1):
        rr, cc = np.nonzero(comp == lab)
        cells = set(zip(rr.tolist(), cc.tolist()))

        def path_nbrs(cell):
            return [x for x in _neighbours(path_mask, *cell) if x in cells]

        def joint_nbrs(cell):
            out = []
            for x in _neighbours(sk.mask, *cell):
                lab_j = int(labels[x])
                if lab_j and cluster_joint[lab_j] not in out:
                    out.append(cluster_joint[lab_j])
            return sorted(out)

        ends = sorted(c for c in cells if len(path_nbrs(c)) <= 1)
        if not ends:
            # closed loop of path pixels, no joint on it
            anchor = min(cells)
            pid = len(points)
            points.append(ConvergingPoint(_center(spec, anchor), JOINT, pid, anchor))
            order = _walk(anchor, path_nbrs, cells)
            pos = [_center(spec, c) for c in order] + [_center(spec, anchor)]
            lines.append(ConvergingLine((pid, pid), tuple(order), _polyline_length(pos)))
            continue
        start = ends[0]
        order = _walk(start, path_nbrs, cells)
        head, tail = order[0], order[-1]
        start_j = joint_nbrs(head)
        end_j = joint_nbrs(tail)
        if len(order) == 1:
            # a single pixel bridging clusters (or a cluster and a tip)
            ids = start_j
            if head in endpoint_at:
                ids = [*ids, endpoint_at[head]]
            if len(ids) == 1:
                ids = ids * 2
            u, v = ids[0], ids[-1]
        else:
            u = start_j[0] if start_j else endpoint_at.get(head)
            v = end_j[-1] if end_j else endpoint_at.get(tail)
            if u is None or v is None:
                raise SkeletonError("ridge end is neither a joint nor a leaf tip")
        pu = points[u].position
        pv = points[v].position
        pos = [pu] + [_center(spec, c) for c in order] + [pv]
        if points[u].cell == order[0]:
            pos = pos[1:]
        if points[v].cell == order[-1]:
            pos = pos[:-1]
        lines.append(ConvergingLine((u, v), tuple(order), _polyline_length(pos)))
    return lines, points


def _walk(start, nbrs, cells):
    order, seen = [start], {start}
    cur = start
    while True:
        nxt = sorted(x for x in nbrs(cur) if x not in seen)
        if not nxt:
            return order
        cur = nxt[0]
        seen.add(cur)
        order.append(cur)


def refine_candidates(lines, points, overlap_fn, tau: float, spec, flagged=None) -> list:
    """Insert arc-length midpoints until adjacent candidates overlap >= tau.

    ``overlap_fn(pos_a, pos_b)`` returns the overlap ratio of two positions.
    A closed ridge counts as violating whenever ``tau > 0``.  Sub-ridges
    with no interior cell are never split; their violating end pairs are
    appended to ``flagged``.
    """
    points = list(points)
    if tau <= 0:
        return points
    for line in lines:
        u, v = line.endpoints
        # endpoint cells may sit on the path itself; never split onto them
        ends = {points[u].cell, points[v].cell}
        cells = list(line.path)
        while cells and cells[0] in ends:
            cells.pop(0)
        while cells and cells[-1] in ends:
            cells.pop()
        stack = [(u, v, cells)]
        while stack:
            u, v, cells = stack.pop()
            if u == v:
                violating = True
            else:
                violating = overlap_fn(points[u].position, points[v].position) < tau
            if not violating:
                continue
            if not cells:
                if flagged is not None:
                    flagged.append((u, v))
                continue
            pos = np.array(
                [points[u].position] + [_center(spec, c) for c in cells] + [points[v].position]
            )
            arc = np.concatenate(([0.0], np.cumsum(np.hypot(*np.diff(pos, axis=0).T))))
            inner = arc[1:-1]
            k = int(np.argmin(np.abs(inner - arc[-1] / 2)))
            cell = cells[k]
            m = len(points)
            points.append(ConvergingPoint(_center(spec, cell), MIDPOINT, m, cell))
            # right half first on the stack so the left half is refined first
            stack.append((m, v, cells[k + 1 :]))
            stack.append((u, m, cells[:k]))
    return points


def discard_near_walls(points, dist, r_min: float) -> list:
    """Drop candidates closer than ``r_min`` to the boundary."""
    return [p for p in points if dist.dist[p.cell] >= r_min]
