"""Vectorised 1D interval-set arithmetic.

Interval sets are pairs of float arrays ``(starts, ends)``, sorted and
pairwise disjoint once passed through :func:`merge`.
"""
import numpy as np

TOL = 1e-12

EMPTY = (np.empty(0), np.empty(0))


def merge(starts, ends, tol=TOL):
    """Sort and union possibly overlapping intervals; drop empty ones."""
    starts = np.asarray(starts, dtype=float)
    ends = np.asarray(ends, dtype=float)
    keep = ends > starts
    starts, ends = starts[keep], ends[keep]
    if starts.size == 0:
        return np.empty(0), np.empty(0)
    order = np.lexsort((ends, starts))
    starts, ends = starts[order], ends[order]
    reach = np.maximum.accumulate(ends)
    new = np.empty(starts.size, dtype=bool)
    new[0] = True
    new[1:] = starts[1:] > reach[:-1] + tol
    group = np.cumsum(new) - 1
    out_s = starts[new]
    out_e = np.full(out_s.size, -np.inf)
    np.maximum.at(out_e, group, ends)
    return out_s, out_e


def intersect(a, b):
    """Intersection of two merged interval sets; returns a merged set."""
    a_s, a_e = a
    b_s, b_e = b
    if a_s.size == 0 or b_s.size == 0:
        return np.empty(0), np.empty(0)
    lo = np.searchsorted(a_e, b_s, side="right")
    hi = np.searchsorted(a_s, b_e, side="left")
    counts = np.maximum(hi - lo, 0)
    if counts.sum() == 0:
        return np.empty(0), np.empty(0)
    bi = np.repeat(np.arange(b_s.size), counts)
    offsets = np.arange(bi.size) - np.repeat(np.cumsum(counts) - counts, counts)
    ai = np.repeat(lo, counts) + offsets
    s = np.maximum(a_s[ai], b_s[bi])
    e = np.minimum(a_e[ai], b_e[bi])
    keep = e > s
    return s[keep], e[keep]


def subtract(a, b):
    """Set difference ``a - b`` of merged interval sets."""
    a_s, a_e = a
    b_s, b_e = b
    if a_s.size == 0 or b_s.size == 0:
        return a_s.copy(), a_e.copy()
    # complement of b, bounded by the hull of a
    lo = min(a_s[0], b_s[0]) - 1.0
    hi = max(a_e[-1], b_e[-1]) + 1.0
    c_s = np.concatenate(([lo], b_e))
    c_e = np.concatenate((b_s, [hi]))
    return intersect((a_s, a_e), (c_s, c_e))


def measure(a):
    return float(np.sum(a[1] - a[0]))


def cumulative(a):
    """Breakpoints ``(x, F)`` of ``F(x) = |a ∩ (-inf, x]|`` for np.interp."""
    a_s, a_e = a
    if a_s.size == 0:
        return np.array([0.0, 1.0]), np.array([0.0, 0.0])
    x = np.empty(2 * a_s.size)
    x[0::2] = a_s
    x[1::2] = a_e
    f = np.zeros(x.size)
    f[1::2] = np.cumsum(a_e - a_s)
    f[2::2] = f[1:-1:2]
    return x, f


def measure_within(a, starts, ends):
    """Measure of ``a ∩ [starts[i], ends[i]]`` for every query interval."""
    x, f = cumulative(a)
    return np.interp(ends, x, f) - np.interp(starts, x, f)


def angular_union_measure(starts, widths):
    """Total measure of a union of arcs on the circle.

    ``starts`` are arbitrary angles and ``widths`` in [0, 2π]; arcs that
    wrap past 2π are split.
    """
    starts = np.mod(np.asarray(starts, dtype=float), 2 * np.pi)
    widths = np.clip(np.asarray(widths, dtype=float), 0.0, 2 * np.pi)
    ends = starts + widths
    wrap = ends > 2 * np.pi
    s = np.concatenate((starts, np.zeros(int(wrap.sum()))))
    e = np.concatenate((np.minimum(ends, 2 * np.pi), ends[wrap] - 2 * np.pi))
    return min(measure(merge(s, e, tol=0.0)), 2 * np.pi)
