"""Small 2D geometry kit for contour construction, placement and routing.

Everything works on plain (x, y) tuples or (N, 2) float arrays, cm units.
"""

from __future__ import annotations

import math

import numpy as np

# Chord tolerance used whenever an arc is flattened for a geometric predicate.
ARC_FLATTEN_TOL = 0.01


def rot90(v):
    """Counter-clockwise perpendicular."""
    return np.array([-v[1], v[0]])


def _orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def segments_intersect(p0, p1, q0, q1, eps: float = 1e-12) -> bool:
    """True when the closed segments share any point (touching counts)."""
    d1 = _orient(q0, q1, p0)
    d2 = _orient(q0, q1, p1)
    d3 = _orient(p0, p1, q0)
    d4 = _orient(p0, p1, q1)
    if ((d1 > eps and d2 < -eps) or (d1 < -eps and d2 > eps)) and \
       ((d3 > eps and d4 < -eps) or (d3 < -eps and d4 > eps)):
        return True

    def on_seg(a, b, c) -> bool:
        if abs(_orient(a, b, c)) > eps:
            return False
        return (min(a[0], b[0]) - eps <= c[0] <= max(a[0], b[0]) + eps and
                min(a[1], b[1]) - eps <= c[1] <= max(a[1], b[1]) + eps)

    return (on_seg(q0, q1, p0) or on_seg(q0, q1, p1) or
            on_seg(p0, p1, q0) or on_seg(p0, p1, q1))


def point_segment_distance(p, a, b) -> float:
    p = np.asarray(p, dtype=float)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return float(np.linalg.norm(p - a))
    t = float((p - a) @ ab) / denom
    t = min(1.0, max(0.0, t))
    return float(np.linalg.norm(p - (a + t * ab)))


def segment_segment_distance(p0, p1, q0, q1) -> float:
    if segments_intersect(p0, p1, q0, q1):
        return 0.0
    return min(
        point_segment_distance(p0, q0, q1),
        point_segment_distance(p1, q0, q1),
        point_segment_distance(q0, p0, p1),
        point_segment_distance(q1, p0, p1),
    )


def point_polyline_distance(p, points) -> float:
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        return float(np.linalg.norm(np.asarray(p, dtype=float) - pts[0]))
    segs = np.stack([pts[:-1], pts[1:]], axis=1)
    return float(points_segments_distance(np.asarray(p, dtype=float)[None, :],
                                           segs).min())


def polyline_length(points) -> float:
    pts = np.asarray(points, dtype=float)
    return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())


def point_at_fraction(points, frac: float) -> np.ndarray:
    """Point at arc-length fraction `frac` (0..1) along a polyline."""
    pts = np.asarray(points, dtype=float)
    seg = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    total = float(seg.sum())
    if total == 0.0:
        return pts[0].copy()
    target = min(1.0, max(0.0, frac)) * total
    acc = 0.0
    for i, L in enumerate(seg):
        if acc + L >= target or i == len(seg) - 1:
            t = 0.0 if L == 0.0 else (target - acc) / L
            return pts[i] + t * (pts[i + 1] - pts[i])
        acc += L
    return pts[-1].copy()


def signed_area(polygon) -> float:
    pts = np.asarray(polygon, dtype=float)
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def points_in_polygon(points, polygon) -> np.ndarray:
    """Vectorized ray-casting containment test; boundary points are
    unreliable, callers needing clearance should also check distance to the
    boundary."""
    p = np.atleast_2d(np.asarray(points, dtype=float))
    poly = np.asarray(polygon, dtype=float)
    x0, y0 = poly[:, 0], poly[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    px = p[:, 0][:, None]
    py = p[:, 1][:, None]
    straddles = (y0[None, :] > py) != (y1[None, :] > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = x0[None, :] + (py - y0[None, :]) / (y1 - y0)[None, :] * (x1 - x0)[None, :]
    hits = straddles & (px < xi)
    return (hits.sum(axis=1) % 2).astype(bool)


def point_in_polygon(p, polygon) -> bool:
    return bool(points_in_polygon(np.asarray(p, dtype=float)[None, :], polygon)[0])


def point_polygon_boundary_distance(p, polygon) -> float:
    return float(points_segments_distance(
        np.asarray(p, dtype=float)[None, :], polygon_segments(polygon)).min())


def points_segments_distance(points, segs) -> np.ndarray:
    """Distances from k points to m segments, shape (k, m).

    `segs` has shape (m, 2, 2) = (segment, endpoint, xy).
    """
    p = np.asarray(points, dtype=float)[:, None, :]      # (k, 1, 2)
    a = np.asarray(segs, dtype=float)[None, :, 0, :]     # (1, m, 2)
    b = np.asarray(segs, dtype=float)[None, :, 1, :]
    ab = b - a
    denom = np.einsum("...i,...i->...", ab, ab)
    t = np.einsum("...i,...i->...", p - a, ab) / np.where(denom == 0.0, 1.0, denom)
    t = np.clip(np.where(denom == 0.0, 0.0, t), 0.0, 1.0)
    foot = a + t[..., None] * ab
    return np.linalg.norm(p - foot, axis=-1)


def _cross_matrix(o, d, p):
    """Orientation of points p relative to rays (o, d), broadcast over axes."""
    return d[..., 0] * (p[..., 1] - o[..., 1]) - d[..., 1] * (p[..., 0] - o[..., 0])


def segments_intersect_matrix(segs_a, segs_b, eps: float = 1e-9) -> np.ndarray:
    """Boolean (n, m) matrix: closed segments intersect (touching counts)."""
    A = np.asarray(segs_a, dtype=float)
    B = np.asarray(segs_b, dtype=float)
    a0, a1 = A[:, None, 0, :], A[:, None, 1, :]
    b0, b1 = B[None, :, 0, :], B[None, :, 1, :]
    da = a1 - a0
    db = b1 - b0
    d1 = _cross_matrix(b0, db, a0)
    d2 = _cross_matrix(b0, db, a1)
    d3 = _cross_matrix(a0, da, b0)
    d4 = _cross_matrix(a0, da, b1)
    tol = 1e-12
    proper = (((d1 > tol) & (d2 < -tol)) | ((d1 < -tol) & (d2 > tol))) & \
             (((d3 > tol) & (d4 < -tol)) | ((d3 < -tol) & (d4 > tol)))
    # Touching / collinear contact shows up as near-zero endpoint distance.
    close = segseg_distance_matrix(A, B, assume_disjoint=True) <= eps
    return proper | close


def segseg_distance_matrix(segs_a, segs_b, assume_disjoint: bool = False) -> np.ndarray:
    """Min distances between all segment pairs, shape (n, m).

    With assume_disjoint=True skips the crossing test and returns the
    endpoint-attained distance (exact only for non-crossing pairs).
    """
    A = np.asarray(segs_a, dtype=float)
    B = np.asarray(segs_b, dtype=float)
    d = np.minimum(
        np.minimum(points_segments_distance(A[:, 0, :], B),
                   points_segments_distance(A[:, 1, :], B)),
        np.minimum(points_segments_distance(B[:, 0, :], A).T,
                   points_segments_distance(B[:, 1, :], A).T),
    )
    if not assume_disjoint:
        d = np.where(segments_intersect_matrix(A, B), 0.0, d)
    return d


def polyline_segments(points) -> np.ndarray:
    """(n-1, 2, 2) segment array for an open polyline."""
    pts = np.asarray(points, dtype=float)
    return np.stack([pts[:-1], pts[1:]], axis=1)


def polygon_segments(points) -> np.ndarray:
    """(n, 2, 2) segment array for a closed polygon (last edge wraps)."""
    pts = np.asarray(points, dtype=float)
    return np.stack([pts, np.roll(pts, -1, axis=0)], axis=1)


def polygon_is_simple(points, eps: float = 1e-9) -> bool:
    """True when no two non-adjacent polygon edges touch or cross."""
    segs = polygon_segments(points)
    n = len(segs)
    hit = segments_intersect_matrix(segs, segs, eps=eps)
    idx = np.arange(n)
    adjacent = (np.abs(idx[:, None] - idx[None, :]) <= 1) | \
               (np.abs(idx[:, None] - idx[None, :]) == n - 1)
    return not bool(np.any(hit & ~adjacent))


def flatten_arc(center, radius: float, a0: float, a1: float,
                tol: float = ARC_FLATTEN_TOL) -> np.ndarray:
    """Sample a CCW arc from angle a0 to a1 (a1 > a0) with chord error <= tol."""
    sweep = a1 - a0
    if sweep <= 0:
        sweep += 2.0 * math.pi
    if radius <= tol:
        step = sweep
    else:
        step = 2.0 * math.acos(max(-1.0, 1.0 - tol / radius))
    n = max(2, int(math.ceil(sweep / step)) + 1)
    angles = a0 + sweep * np.linspace(0.0, 1.0, n)
    cx, cy = float(center[0]), float(center[1])
    return np.stack([cx + radius * np.cos(angles), cy + radius * np.sin(angles)], axis=-1)
