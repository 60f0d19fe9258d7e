"""Slow, independent reference implementations for small instances.

None of these share code with the production visibility or planning
paths; the tests compare the two.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
import shapely

from .exceptions import OracleLimitError

MAX_CANDIDATES = 18


@dataclass(frozen=True)
class ExactSolution:
    opt_cover: int
    opt_full: int | None
    cover_witness: tuple
    full_witness: tuple | None

    def to_dict(self):
        return {
            "opt_cover": self.opt_cover,
            "opt_full": self.opt_full,
            "cover_witness": list(self.cover_witness),
            "full_witness": None if self.full_witness is None else list(self.full_witness),
        }


def _connected(subset, adj) -> bool:
    parent = {v: v for v in subset}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in itertools.combinations(subset, 2):
        if adj[a][b]:
            parent[find(a)] = find(b)
    return len({find(v) for v in subset}) == 1


def exact_solve(coverage, adjacency, max_candidates: int = MAX_CANDIDATES) -> ExactSolution:
    """Minimum covering subsets by exhaustive enumeration.

    ``coverage`` is a boolean candidates x segments matrix and
    ``adjacency`` a boolean candidates x candidates matrix (overlap >= tau).
    Subsets are tried in increasing size, lexicographically within a size;
    the first hit is the witness.  ``opt_full`` additionally requires the
    induced adjacency graph to be connected (``None`` if impossible).
    """
    cov = np.asarray(coverage, dtype=bool)
    m, n = cov.shape
    if m > max_candidates:
        raise OracleLimitError(f"{m} candidates exceed the exhaustive-search cap of {max_candidates}")
    adj = np.asarray(adjacency, dtype=bool).tolist()
    full = (1 << n) - 1
    masks = [sum(1 << int(j) for j in np.flatnonzero(row)) for row in cov]
    if n == 0:
        return ExactSolution(0, 0, (), ())
    opt_cover = cover_witness = None
    for k in range(1, m + 1):
        for subset in itertools.combinations(range(m), k):
            acc = 0
            for i in subset:
                acc |= masks[i]
            if acc != full:
                continue
            if opt_cover is None:
                opt_cover, cover_witness = k, subset
            if _connected(subset, adj):
                return ExactSolution(opt_cover, k, cover_witness, subset)
    if opt_cover is None:
        raise OracleLimitError("no subset of candidates covers every segment")
    return ExactSolution(opt_cover, None, cover_witness, None)


def _segment_coords(occluders) -> np.ndarray:
    """``(n, 2, 2)`` array from coordinate pairs or objects with ``a``/``b``."""
    occ = [(o.a, o.b) if hasattr(o, "a") else o for o in occluders]
    return np.asarray(occ, dtype=float).reshape(-1, 2, 2)


def brute_line_of_sight(p, q, occluders) -> bool:
    """Segment p-q is clear iff its interior meets no occluder interior."""
    occ = _segment_coords(occluders)
    if len(occ) == 0:
        return True
    line = shapely.linestrings([p, q])
    walls = shapely.linestrings(occ)
    return not bool(np.any(shapely.relate_pattern(line, walls, "T********")))


def sampling_visibility_oracle(p, target, scanner, occluders, rays: int = 10**6, seed=None, chunk: int = 1 << 16) -> float:
    """Valid observed angle of ``target`` from ``p`` by dense ray casting.

    Rays are spaced ``2*pi/rays`` apart (random phase when ``seed`` is
    given).  A ray scores if it hits the target inside the scanner annulus
    with nothing strictly in front.  Error is below a few ray spacings.
    """
    p = np.asarray(p, dtype=float)
    a = np.asarray(target[0], dtype=float)
    b = np.asarray(target[1], dtype=float)
    occ = _segment_coords(occluders)
    step = 2 * math.pi / rays
    phase = 0.5 if seed is None else float(np.random.default_rng(seed).random())

    # only rays inside the angular span of the target can score
    ua, ub = a - p, b - p
    ang_a = math.atan2(ua[1], ua[0])
    width = math.atan2(ua[0] * ub[1] - ua[1] * ub[0], float(ua @ ub))
    lo = ang_a + min(0.0, width)
    hi = lo + abs(width)
    k0 = math.floor(lo / step - phase)
    k1 = math.ceil(hi / step - phase)
    hits = 0
    for start in range(k0, k1 + 1, chunk):
        k = np.arange(start, min(start + chunk, k1 + 1))
        phi = (k + phase) * step
        d = np.stack((np.cos(phi), np.sin(phi)), axis=1)
        t_hit = _ray_segment(p, d, a, b)
        ok = np.isfinite(t_hit) & (t_hit >= scanner.r_min) & (t_hit <= scanner.r_max)
        if not ok.any():
            continue
        d, t_hit = d[ok], t_hit[ok]
        blocked = np.zeros(len(d), dtype=bool)
        for oa, ob in occ:
            t_occ = _ray_segment(p, d, oa, ob)
            blocked |= t_occ < t_hit * (1 - 1e-9) - 1e-12
        hits += int((~blocked).sum())
    return hits * step


def _ray_segment(p, d, a, b):
    """Distance along unit rays ``d`` from ``p`` to segment a-b (inf on miss)."""
    e = b - a
    w = a - p
    den = d[:, 0] * e[1] - d[:, 1] * e[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (w[0] * e[1] - w[1] * e[0]) / den
        u = (w[0] * d[:, 1] - w[1] * d[:, 0]) / den
    ok = (np.abs(den) > 1e-15) & (t > 0) & (u >= 0) & (u <= 1)
    return np.where(ok, t, np.inf)


def single_removal_violations(selected, connector_ids, coverage, adjacency) -> list:
    """Non-connector viewpoints whose removal keeps coverage and connectivity."""
    cov = np.asarray(coverage, dtype=bool)
    adj = np.asarray(adjacency, dtype=bool).tolist()
    bad = []
    for v in selected:
        if v in connector_ids:
            continue
        rest = [u for u in selected if u != v]
        if rest and cov[rest].any(axis=0).all() and _connected(rest, adj):
            bad.append(v)
    return bad
