"""Estimator-style front end for the whole planning pipeline.

``ViewpointPlanner().fit(floorplan)`` runs every stage and stores the
results in trailing-underscore attributes; ``transform(points)`` evaluates
the visibility field at arbitrary positions.
"""
from __future__ import annotations

import json
import time
from os import PathLike
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .config import PlanConfig
from .floorplan import Floorplan, floorplan_from_dict, load_floorplan, parse_floorplan, partition_boundary
from .metrics import compute_report
from .overlap import overlap_matrix, overlap_value
from .planner import CandidateGraph, build_coverage_table, plan_network
from .skeleton import (
    ConvergingPoint,
    build_converging_lines,
    detect_joints,
    discard_near_walls,
    extract_skeleton,
    refine_candidates,
)
from .vfield import GridSpec, compute_distance_field, compute_vf
from .visibility import ScannerModel, VisibilityEngine, build_bsp


def check_floorplan(X) -> Floorplan:
    """Accept a Floorplan, a decoded JSON dict, JSON text/bytes or a path."""
    if isinstance(X, Floorplan):
        return X
    if isinstance(X, dict):
        return floorplan_from_dict(X)
    if isinstance(X, (bytes, bytearray)):
        return parse_floorplan(X)
    if isinstance(X, (str, PathLike)):
        text = str(X)
        if isinstance(X, PathLike) or not text.lstrip().startswith("{"):
            return load_floorplan(Path(X))
        return parse_floorplan(text)
    raise TypeError(f"expected a floorplan, dict, JSON text or path; got {type(X).__name__}")


def check_points(X) -> np.ndarray:
    """Coerce to a finite ``(n, 2)`` float array."""
    pts = np.asarray(X, dtype=float)
    if pts.ndim == 1 and pts.size == 2:
        pts = pts.reshape(1, 2)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError(f"points must have shape (n, 2), got {pts.shape}")
    if not np.isfinite(pts).all():
        raise ValueError("points must be finite")
    return pts


class ViewpointPlanner(TransformerMixin, BaseEstimator):
    """Plan a connected viewpoint network covering a floorplan's walls.

    Parameters left as ``None`` take the value of ``profile``.
    """

    def __init__(
        self,
        profile="indoor",
        r_min=None,
        r_max=None,
        resolution=None,
        partition_length=None,
        tau=None,
        overlap_metric=None,
        include_openings=False,
        windows_opaque=False,
        reinforce_cycles=False,
        n_threads=1,
    ):
        self.profile = profile
        self.r_min = r_min
        self.r_max = r_max
        self.resolution = resolution
        self.partition_length = partition_length
        self.tau = tau
        self.overlap_metric = overlap_metric
        self.include_openings = include_openings
        self.windows_opaque = windows_opaque
        self.reinforce_cycles = reinforce_cycles
        self.n_threads = n_threads

    def get_config(self) -> PlanConfig:
        params = self.get_params()
        params.pop("n_threads")
        return PlanConfig.from_profile(params.pop("profile"), **params)

    def fit(self, X, y=None):
        cfg = self.get_config()
        threads = int(self.n_threads or 1)
        timings = {}
        clock = time.perf_counter

        t = clock()
        fp = check_floorplan(X)
        boundary = partition_boundary(fp, cfg.partition_length, include_openings=cfg.include_openings)
        scanner = ScannerModel(cfg.r_min, cfg.r_max)
        tree = build_bsp(fp.occluders(cfg.windows_opaque), domain=fp)
        engine = VisibilityEngine(boundary, None, scanner, domain=fp, tree=tree)
        timings["geometry"] = clock() - t

        t = clock()
        grid = GridSpec.covering(fp, cfg.resolution)
        dist = compute_distance_field(fp, grid)
        timings["distance_field"] = clock() - t

        t = clock()
        sk = extract_skeleton(dist, fp, cfg.r_min)
        points = detect_joints(sk)
        lines, points = build_converging_lines(sk, points)
        timings["skeleton"] = clock() - t

        t = clock()
        cache = {}

        def record_at(pos):
            if pos not in cache:
                cache[pos] = engine.record(pos)
            return cache[pos]

        def overlap_fn(pa, pb):
            return overlap_value(record_at(pa), record_at(pb), cfg.overlap_metric)

        flagged = []
        points = refine_candidates(lines, points, overlap_fn, cfg.tau, grid, flagged=flagged)
        kept = discard_near_walls(points, dist, cfg.r_min)
        candidates = [ConvergingPoint(p.position, p.kind, k, p.cell) for k, p in enumerate(kept)]
        timings["refine"] = clock() - t

        t = clock()
        positions = np.array([c.position for c in candidates], dtype=float).reshape(-1, 2)
        missing = [c.position for c in candidates if c.position not in cache]
        for pos, rec in zip(missing, engine.records(missing, n_threads=threads)):
            cache[pos] = rec
        records = [cache[c.position] for c in candidates]
        table = build_coverage_table(records, engine, cfg.coverage_fraction)
        timings["coverage_table"] = clock() - t

        t = clock()
        overlap = overlap_matrix(records, cfg.overlap_metric, n_threads=threads)
        graph = CandidateGraph(overlap, cfg.tau, positions)
        timings["overlap_graph"] = clock() - t

        t = clock()
        net = plan_network(table, graph, reinforce=cfg.reinforce_cycles)
        report = compute_report(net, table, graph)
        timings["planning"] = clock() - t

        self.config_ = cfg
        self.floorplan_ = fp
        self.boundary_ = boundary
        self.scanner_ = scanner
        self.tree_ = tree
        self.engine_ = engine
        self.grid_ = grid
        self.distance_field_ = dist
        self.skeleton_ = sk
        self.lines_ = lines
        self.skeleton_points_ = points
        self.refine_flags_ = flagged
        self.candidates_ = candidates
        self.records_ = records
        self.coverage_table_ = table
        self.overlap_ = overlap
        self.graph_ = graph
        self.report_ = report
        self.network_ = type(net)(**{**net.__dict__, "metrics": report.to_dict()})
        self.timings_ = timings
        return self

    def transform(self, X):
        """Visibility-field value (radians) at each point; NaN outside the floorplan."""
        check_is_fitted(self, "engine_")
        pts = check_points(X)
        inside = self.floorplan_.contains(pts)
        out = np.full(len(pts), np.nan)
        for k in np.flatnonzero(inside):
            out[k] = min(self.engine_.record(pts[k], check_domain=False).theta, 2 * np.pi)
        return out

    def visibility_field(self):
        check_is_fitted(self, "engine_")
        return compute_vf(
            self.floorplan_, self.boundary_, self.tree_, self.scanner_, self.grid_, n_threads=int(self.n_threads or 1)
        )

    def network_dict(self) -> dict:
        check_is_fitted(self, "network_")
        return self.network_.to_dict(self.graph_, self.config_.to_dict())

    def network_json(self) -> str:
        return json.dumps(self.network_dict(), indent=2) + "\n"
