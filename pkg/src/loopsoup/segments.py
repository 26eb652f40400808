"""Exact segment predicates and polyline distance kernels.

Intersection tests use a floating-point orientation filter with an exact
rational fallback, so results carry no tolerance: touching endpoints and
collinear overlaps count as intersections, near-misses never do.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

# orientation filter constant for the 2x2 determinant of coordinate
# differences (sign is provably correct when |det| exceeds bound * detsum)
_ORIENT_BOUND = 3.3306690738754716e-16


def _orient_exact(ax, ay, bx, by, cx, cy) -> int:
    ax, ay, bx, by, cx, cy = (Fraction(v) for v in (ax, ay, bx, by, cx, cy))
    det = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return (det > 0) - (det < 0)


def orient(a, b, c) -> int:
    """Sign of the cross product (b-a) x (c-a); exact for float inputs."""
    t1 = (b[0] - a[0]) * (c[1] - a[1])
    t2 = (b[1] - a[1]) * (c[0] - a[0])
    det = t1 - t2
    if abs(det) > _ORIENT_BOUND * (abs(t1) + abs(t2)):
        return 1 if det > 0 else -1
    return _orient_exact(a[0], a[1], b[0], b[1], c[0], c[1])


def _on_segment(a, b, p) -> bool:
    # assumes p collinear with segment ab
    return (min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]))


def segments_intersect(p1, p2, p3, p4) -> bool:
    """Closed-segment intersection, exact (endpoint touches included)."""
    d1 = orient(p3, p4, p1)
    d2 = orient(p3, p4, p2)
    d3 = orient(p1, p2, p3)
    d4 = orient(p1, p2, p4)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and \
       ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    if d1 == 0 and _on_segment(p3, p4, p1):
        return True
    if d2 == 0 and _on_segment(p3, p4, p2):
        return True
    if d3 == 0 and _on_segment(p1, p2, p3):
        return True
    if d4 == 0 and _on_segment(p1, p2, p4):
        return True
    return False


def segment_crossing(p1, p2, p3, p4):
    """Interior crossing point of two properly crossing segments, else None."""
    d1 = orient(p3, p4, p1)
    d2 = orient(p3, p4, p2)
    d3 = orient(p1, p2, p3)
    d4 = orient(p1, p2, p4)
    if not (((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0))
            and ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0))):
        return None
    r = np.asarray(p2, dtype=float) - np.asarray(p1, dtype=float)
    s = np.asarray(p4, dtype=float) - np.asarray(p3, dtype=float)
    denom = r[0] * s[1] - r[1] * s[0]
    qp = np.asarray(p3, dtype=float) - np.asarray(p1, dtype=float)
    t = (qp[0] * s[1] - qp[1] * s[0]) / denom
    return np.asarray(p1, dtype=float) + t * r


def _orient_batch(ax, ay, bx, by, cx, cy):
    """Vectorized orientation signs with exact fallback on unsure entries."""
    t1 = (bx - ax) * (cy - ay)
    t2 = (by - ay) * (cx - ax)
    det = t1 - t2
    sign = np.sign(det).astype(np.int8)
    unsure = np.abs(det) <= _ORIENT_BOUND * (np.abs(t1) + np.abs(t2))
    for i in np.flatnonzero(unsure):
        sign.flat[i] = _orient_exact(ax.flat[i] if np.ndim(ax) else ax,
                                     ay.flat[i] if np.ndim(ay) else ay,
                                     bx.flat[i] if np.ndim(bx) else bx,
                                     by.flat[i] if np.ndim(by) else by,
                                     cx.flat[i], cy.flat[i])
    return sign


def polylines_intersect(pts_a: np.ndarray, pts_b: np.ndarray, chunk: int = 512) -> bool:
    """True iff any segment of one polyline meets any segment of the other."""
    a0 = pts_a[:-1]
    a1 = pts_a[1:]
    b0 = pts_b[:-1]
    b1 = pts_b[1:]
    # bbox prefilter per segment
    a_lo = np.minimum(a0, a1)
    a_hi = np.maximum(a0, a1)
    b_lo = np.minimum(b0, b1)
    b_hi = np.maximum(b0, b1)
    for start in range(0, len(a0), chunk):
        sl = slice(start, start + chunk)
        overlap = ((a_lo[sl, None, 0] <= b_hi[None, :, 0]) & (a_hi[sl, None, 0] >= b_lo[None, :, 0])
                   & (a_lo[sl, None, 1] <= b_hi[None, :, 1]) & (a_hi[sl, None, 1] >= b_lo[None, :, 1]))
        ii, jj = np.nonzero(overlap)
        if len(ii) == 0:
            continue
        ii = ii + start
        if _candidate_pairs_intersect(a0, a1, b0, b1, ii, jj):
            return True
    return False


def _candidate_pairs_intersect(a0, a1, b0, b1, ii, jj) -> bool:
    d1 = _orient_batch(b0[jj, 0], b0[jj, 1], b1[jj, 0], b1[jj, 1], a0[ii, 0], a0[ii, 1])
    d2 = _orient_batch(b0[jj, 0], b0[jj, 1], b1[jj, 0], b1[jj, 1], a1[ii, 0], a1[ii, 1])
    d3 = _orient_batch(a0[ii, 0], a0[ii, 1], a1[ii, 0], a1[ii, 1], b0[jj, 0], b0[jj, 1])
    d4 = _orient_batch(a0[ii, 0], a0[ii, 1], a1[ii, 0], a1[ii, 1], b1[jj, 0], b1[jj, 1])
    proper = (d1 * d2 < 0) & (d3 * d4 < 0)
    if np.any(proper):
        return True
    degenerate = (d1 == 0) | (d2 == 0) | (d3 == 0) | (d4 == 0)
    for k in np.flatnonzero(degenerate):
        i, j = ii[k], jj[k]
        if segments_intersect(a0[i], a1[i], b0[j], b1[j]):
            return True
    return False


def points_to_segments_min(pts: np.ndarray, seg_pts: np.ndarray, chunk: int = 512) -> float:
    """Min distance from a point cloud to a polyline's segments (exact)."""
    a = seg_pts[:-1]
    d = seg_pts[1:] - a
    dd = np.einsum("ij,ij->i", d, d)
    dd_safe = np.where(dd == 0.0, 1.0, dd)
    best = np.inf
    for start in range(0, len(pts), chunk):
        p = pts[start:start + chunk]
        w = p[:, None, :] - a[None, :, :]
        t = np.einsum("kij,ij->ki", w, d) / dd_safe
        np.clip(t, 0.0, 1.0, out=t)
        closest = a[None, :, :] + t[:, :, None] * d[None, :, :]
        diff = p[:, None, :] - closest
        dist2 = np.einsum("kij,kij->ki", diff, diff)
        best = min(best, float(dist2.min()))
    return float(np.sqrt(best))


def polyline_min_distance(pts_a: np.ndarray, pts_b: np.ndarray) -> float:
    """Min Euclidean distance between two non-intersecting polylines.

    For disjoint closed segments the closest pair always involves a segment
    endpoint, so vertex-to-segment scans in both directions are exact.
    """
    return min(points_to_segments_min(pts_a, pts_b),
               points_to_segments_min(pts_b, pts_a))


def bbox_gap(pts_a: np.ndarray, pts_b: np.ndarray) -> float:
    """Distance between the two axis-aligned bounding boxes (a lower bound)."""
    a_lo, a_hi = pts_a.min(axis=0), pts_a.max(axis=0)
    b_lo, b_hi = pts_b.min(axis=0), pts_b.max(axis=0)
    gap = np.maximum(0.0, np.maximum(b_lo - a_hi, a_lo - b_hi))
    return float(np.hypot(gap[0], gap[1]))
