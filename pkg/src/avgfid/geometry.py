"""Planar convex hull and origin-to-hull distance."""

from __future__ import annotations

import numpy as np

ORIENT_TOL = 1e-12


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points) -> np.ndarray:
    """Monotone-chain hull of (N, 2) points, counter-clockwise, no repeats.

    Collinear boundary points are dropped. Degenerate inputs return one or two
    points.
    """
    pts = np.unique(np.asarray(points, dtype=float).reshape(-1, 2), axis=0)
    if len(pts) <= 2:
        return pts
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in pts[::-1]:
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def point_segment_distance(p, a, b) -> float:
    p, a, b = (np.asarray(x, dtype=float) for x in (p, a, b))
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.hypot(*(p - a)))
    t = min(1.0, max(0.0, float((p - a) @ ab) / denom))
    return float(np.hypot(*(p - (a + t * ab))))


def origin_hull_distance(points, tol: float = ORIENT_TOL) -> float:
    """Euclidean distance from the origin to the convex hull of ``points``.

    Returns exactly 0.0 when the origin lies strictly inside the hull, as
    judged by every edge orientation exceeding ``tol``.
    """
    hull = convex_hull(points)
    origin = np.zeros(2)
    if len(hull) == 1:
        return float(np.hypot(*hull[0]))
    if len(hull) == 2:
        return point_segment_distance(origin, hull[0], hull[1])
    edges = list(zip(hull, np.roll(hull, -1, axis=0)))
    if all(_cross(a, b, origin) > tol for a, b in edges):
        return 0.0
    return min(point_segment_distance(origin, a, b) for a, b in edges)
