"""Overlap ratios between viewpoint pairs.

Length-based ratios compare the boundary length both viewpoints see with
what each sees alone; angle-based ratios do the same with the angles that
the common part subtends at each viewpoint.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import intervals as iv
from .exceptions import ContractError

METRICS = ("min_len", "mean_len", "union_len", "union_ang", "mean_ang")
DEFAULT_METRIC = "mean_len"
LENGTH_METRICS = {"min_len", "mean_len", "union_len"}


def normalize_metric(name: str) -> str:
    """Accept ``mean-len`` as well as ``mean_len``."""
    key = name.strip().lower().replace("-", "_")
    if key not in METRICS:
        raise ValueError(f"unknown overlap metric {name!r}; choose from {', '.join(METRICS)}")
    return key


@dataclass(frozen=True)
class OverlapResult:
    l_ab: float
    theta_a_ab: float
    theta_b_ab: float
    l_a: float
    l_b: float
    theta_a: float
    theta_b: float
    ratios: dict

    def __getitem__(self, metric):
        return self.ratios[normalize_metric(metric)]


def _div(num, den):
    return min(max(num / den, 0.0), 1.0) if den > 0 else 0.0


def ratios_from_measures(l_a, l_b, l_ab, theta_a, theta_b, theta_a_ab, theta_b_ab) -> dict:
    """All five ratios from the raw measures; zero-visibility terms give 0."""
    ang_a = _div(theta_a_ab, 2 * theta_a)
    ang_b = _div(theta_b_ab, 2 * theta_b)
    return {
        "min_len": _div(l_ab, min(l_a, l_b)),
        "mean_len": _div(2 * l_ab, l_a + l_b),
        "union_len": _div(l_ab, l_a + l_b - l_ab),
        "union_ang": _div(theta_a_ab + theta_b_ab, theta_a + theta_b),
        "mean_ang": ang_a + ang_b,
    }


def _check_pair(rec_a, rec_b):
    if rec_a.boundary_key != rec_b.boundary_key:
        raise ContractError("visibility records were computed against different boundary sets")


def common_spans(rec_a, rec_b):
    """Boundary spans (arc coordinate) visible from both viewpoints."""
    _check_pair(rec_a, rec_b)
    return iv.intersect(rec_a.spans, rec_b.spans)


def intersect_visible(rec_a, rec_b) -> tuple:
    """``(L_ab, theta_a_ab, theta_b_ab)`` for the commonly visible boundary."""
    both = common_spans(rec_a, rec_b)
    if both[0].size == 0:
        return 0.0, 0.0, 0.0
    return iv.measure(both), rec_a.angle_of(both), rec_b.angle_of(both)


def overlap_ratios(rec_a, rec_b) -> OverlapResult:
    l_ab, ta_ab, tb_ab = intersect_visible(rec_a, rec_b)
    # the common part cannot exceed either side; clamp float drift
    l_a, l_b = rec_a.length, rec_b.length
    l_ab = min(l_ab, l_a, l_b)
    ta_ab = min(ta_ab, rec_a.theta)
    tb_ab = min(tb_ab, rec_b.theta)
    ratios = ratios_from_measures(l_a, l_b, l_ab, rec_a.theta, rec_b.theta, ta_ab, tb_ab)
    return OverlapResult(l_ab, ta_ab, tb_ab, l_a, l_b, rec_a.theta, rec_b.theta, ratios)


def overlap_value(rec_a, rec_b, metric: str = DEFAULT_METRIC) -> float:
    """One ratio, skipping the angle computations for length metrics."""
    metric = normalize_metric(metric)
    if metric not in LENGTH_METRICS:
        return overlap_ratios(rec_a, rec_b).ratios[metric]
    both = common_spans(rec_a, rec_b)
    l_a, l_b = rec_a.length, rec_b.length
    l_ab = min(iv.measure(both), l_a, l_b)
    return ratios_from_measures(l_a, l_b, l_ab, 0.0, 0.0, 0.0, 0.0)[metric]


def overlap_matrix(records, metric: str = DEFAULT_METRIC, n_threads: int = 1) -> np.ndarray:
    """Symmetric pairwise ratio matrix; the diagonal is each record's self-overlap."""
    metric = normalize_metric(metric)
    m = len(records)
    out = np.zeros((m, m))
    rows = list(range(m))

    def row(i):
        return [overlap_value(records[i], records[j], metric) for j in range(i, m)]

    if n_threads and n_threads > 1 and m > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            results = list(pool.map(row, rows))
    else:
        results = [row(i) for i in rows]
    for i, vals in enumerate(results):
        out[i, i:] = vals
        out[i:, i] = vals
    return out
