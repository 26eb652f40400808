"""Rasterized planar topology and the curve/set metrics.

A RasterSet is an occupancy grid over a framed window: a guaranteed ring of
empty cells emulates the plane's single unbounded component, so "exterior"
is well defined as the flood fill from the frame.  The standard dual pair of
connectivities is used throughout: 4-connectivity for the empty complement,
8-connectivity (implicitly, via cell sharing) for content.

Conventions:
  * grid[iy, ix]; cell (ix, iy) is the closed square of side h centered at
    origin + (ix*h, iy*h).  The origin is the *center* of cell (0, 0).
  * rasterization is conservative: a cell is marked iff its closed square
    meets a polyline segment.  Lattice loops at h = 1/N land exactly on
    their vertex cells.
  * set dilations and Hausdorff distances are evaluated on cell centers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .segments import polylines_intersect

DEFAULT_CELL_BUDGET = 1 << 26

_PLUS = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)

# grid-search slack for delta_connected: a ball center is never farther than
# pitch * sqrt(2)/2 from a grid point, pitch = delta/8
DELTA_SLACK = math.sqrt(2.0) / 8.0


class GridBudgetError(ValueError):
    """Requested raster exceeds the configured cell budget."""


@dataclass(frozen=True)
class GridFrame:
    origin: tuple[float, float]     # physical center of cell (0, 0)
    h: float
    shape: tuple[int, int]          # (rows, cols) = (y, x)

    @property
    def cells(self) -> int:
        return self.shape[0] * self.shape[1]


def frame_for(bbox, h: float, margin: int = 2, budget: int = DEFAULT_CELL_BUDGET) -> GridFrame:
    """Frame whose cell centers hit bbox's min corner, with an empty ring."""
    if h <= 0:
        raise ValueError("spacing h must be positive")
    xmin, ymin, xmax, ymax = bbox
    w = int(math.ceil((xmax - xmin) / h - 1e-9)) + 1 + 2 * margin
    hh = int(math.ceil((ymax - ymin) / h - 1e-9)) + 1 + 2 * margin
    if w * hh > budget:
        raise GridBudgetError(f"{w}x{hh} cells exceed budget {budget}")
    return GridFrame((xmin - margin * h, ymin - margin * h), h, (hh, w))


@dataclass(eq=False)
class RasterSet:
    frame: GridFrame
    grid: np.ndarray            # bool (rows, cols)

    @property
    def h(self) -> float:
        return self.frame.h

    @property
    def origin(self) -> tuple[float, float]:
        return self.frame.origin

    @property
    def count(self) -> int:
        return int(self.grid.sum())

    def cell_centers(self) -> np.ndarray:
        iy, ix = np.nonzero(self.grid)
        ox, oy = self.frame.origin
        return np.column_stack([ox + ix * self.h, oy + iy * self.h])

    def empty_like(self) -> "RasterSet":
        return RasterSet(self.frame, np.zeros_like(self.grid))


@dataclass(eq=False)
class TopologyDecomposition:
    exterior: RasterSet
    hull: RasterSet
    outer_boundary: RasterSet


def _gather_points(items) -> list[np.ndarray]:
    arrays = []
    for it in items:
        pts = it if isinstance(it, np.ndarray) else it.points
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        arrays.append(pts)
    if not arrays:
        raise ValueError("nothing to rasterize")
    return arrays


def rasterize(items, h: float, frame: GridFrame | None = None, margin: int = 2,
              budget: int = DEFAULT_CELL_BUDGET) -> RasterSet:
    """Conservative supercover raster of loops / point arrays at spacing h.

    ``items`` may be loop objects (anything with ``.points``) or raw (k, 2)
    arrays.  With ``frame`` given, the result lives on that shared grid and
    content must fit inside its margin ring.
    """
    arrays = _gather_points(items)
    if frame is None:
        lo = np.min([a.min(axis=0) for a in arrays], axis=0)
        hi = np.max([a.max(axis=0) for a in arrays], axis=0)
        frame = frame_for((lo[0], lo[1], hi[0], hi[1]), h, margin, budget)
    grid = np.zeros(frame.shape, dtype=bool)
    for pts in arrays:
        _mark_polyline(grid, frame, pts)
    rows, cols = frame.shape
    if grid[0, :].any() or grid[-1, :].any() or grid[:, 0].any() or grid[:, -1].any():
        raise ValueError("content touches the frame border; enlarge the frame")
    return RasterSet(frame, grid)


def _mark_polyline(grid, frame: GridFrame, pts: np.ndarray) -> None:
    ox, oy = frame.origin
    h = frame.h
    t = (pts - (ox, oy)) / h
    rows, cols = frame.shape
    # aligned fast path: all points on cell centers, consecutive points in
    # the same or 4-adjacent cells (lattice loops at h = 1/N)
    idx = np.rint(t)
    if np.all(np.abs(t - idx) < 1e-9):
        steps = np.abs(np.diff(idx, axis=0)).sum(axis=1) if len(idx) > 1 else np.zeros(0)
        if np.all(steps <= 1.0):
            ix = idx[:, 0].astype(np.int64)
            iy = idx[:, 1].astype(np.int64)
            if ix.min() < 0 or iy.min() < 0 or ix.max() >= cols or iy.max() >= rows:
                raise ValueError("points fall outside the provided frame")
            grid[iy, ix] = True
            return
    if len(pts) == 1:
        _mark_segment(grid, frame, t[0], t[0])
        return
    for i in range(len(pts) - 1):
        _mark_segment(grid, frame, t[i], t[i + 1])


def _mark_segment(grid, frame: GridFrame, a, b) -> None:
    """Mark every cell whose closed unit square meets segment a-b.

    a, b are in cell units (cell (ix, iy) spans [ix - 1/2, ix + 1/2] x ...).
    """
    rows, cols = frame.shape
    fuzz = 1e-12
    ix0 = int(math.ceil(min(a[0], b[0]) - 0.5 - fuzz))
    ix1 = int(math.floor(max(a[0], b[0]) + 0.5 + fuzz))
    iy0 = int(math.ceil(min(a[1], b[1]) - 0.5 - fuzz))
    iy1 = int(math.floor(max(a[1], b[1]) + 0.5 + fuzz))
    if ix0 < 0 or iy0 < 0 or ix1 >= cols or iy1 >= rows:
        raise ValueError("points fall outside the provided frame")
    cx = np.arange(ix0, ix1 + 1, dtype=float)
    cy = np.arange(iy0, iy1 + 1, dtype=float)
    gx, gy = np.meshgrid(cx, cy)
    hit = _segment_box_hits(a, b, gx, gy, 0.5 + fuzz)
    grid[iy0:iy1 + 1, ix0:ix1 + 1] |= hit


def _segment_box_hits(a, b, cx, cy, half):
    """Liang-Barsky slab clip of segment a-b against squares centered (cx, cy)."""
    t0 = np.zeros_like(cx)
    t1 = np.ones_like(cx)
    ok = np.ones(cx.shape, dtype=bool)
    for axis in (0, 1):
        p0 = a[axis]
        d = b[axis] - a[axis]
        lo = (cx if axis == 0 else cy) - half
        hi = (cx if axis == 0 else cy) + half
        if d == 0.0:
            ok &= (p0 >= lo) & (p0 <= hi)
        else:
            ta = (lo - p0) / d
            tb = (hi - p0) / d
            tmin = np.minimum(ta, tb)
            tmax = np.maximum(ta, tb)
            t0 = np.maximum(t0, tmin)
            t1 = np.minimum(t1, tmax)
    return ok & (t0 <= t1)


def rasterize_domain(domain, frame: GridFrame) -> RasterSet:
    """Cells of the frame whose centers lie in the domain."""
    rows, cols = frame.shape
    ox, oy = frame.origin
    xs = ox + np.arange(cols) * frame.h
    ys = oy + np.arange(rows) * frame.h
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    grid = domain.contains(pts).reshape(rows, cols)
    return RasterSet(frame, grid)


def decompose(raster: RasterSet) -> TopologyDecomposition:
    """Exterior / hull / outer boundary of the occupied set.

    exterior: 4-connected flood of empty cells from the frame ring;
    hull: its complement; outer boundary: hull cells 4-adjacent to exterior.
    """
    grid = raster.grid
    if grid[0, :].any() or grid[-1, :].any() or grid[:, 0].any() or grid[:, -1].any():
        raise ValueError("frame margin violated: occupied cell on the border")
    labels, _ = ndimage.label(~grid, structure=_PLUS)
    exterior = labels == labels[0, 0]
    hull = ~exterior
    outer = hull & ndimage.binary_dilation(exterior, structure=_PLUS)
    return TopologyDecomposition(
        exterior=RasterSet(raster.frame, exterior),
        hull=RasterSet(raster.frame, hull),
        outer_boundary=RasterSet(raster.frame, outer),
    )


# ---------------------------------------------------------------------------
# metrics
# ---------------------------------------------------------------------------

def _as_point_cloud(obj) -> np.ndarray:
    if isinstance(obj, RasterSet):
        return obj.cell_centers()
    return np.atleast_2d(np.asarray(obj, dtype=float))


def _aligned(a: RasterSet, b: RasterSet) -> bool:
    if not math.isclose(a.h, b.h, rel_tol=1e-12, abs_tol=0.0):
        return False
    dx = (b.origin[0] - a.origin[0]) / a.h
    dy = (b.origin[1] - a.origin[1]) / a.h
    return abs(dx - round(dx)) < 1e-6 and abs(dy - round(dy)) < 1e-6


def directed_hausdorff(A, B) -> float:
    """sup over A of the distance to B, on cell centers / points."""
    pa, pb = _as_point_cloud(A), _as_point_cloud(B)
    if len(pa) == 0 or len(pb) == 0:
        raise ValueError("directed_hausdorff of an empty set")
    d, _ = cKDTree(pb).query(pa)
    return float(np.max(d))


def contains_dilated(A, B, radius: float, h: float | None = None) -> bool:
    """A inside the radius-dilation of B, on cell centers.

    The dilation is conservative for the continuum sets the rasters stand
    for: the effective radius is radius + h/sqrt(2) (half cell diagonal).
    """
    if h is None:
        h = A.h if isinstance(A, RasterSet) else 0.0
    pa, pb = _as_point_cloud(A), _as_point_cloud(B)
    if len(pa) == 0:
        return True
    if len(pb) == 0:
        return False
    return directed_hausdorff(pa, pb) <= radius + h / math.sqrt(2.0)


def hausdorff(A, B) -> float:
    """Hausdorff distance between two rasters or point sets (exact on centers)."""
    if isinstance(A, RasterSet) and isinstance(B, RasterSet) and _aligned(A, B):
        return _hausdorff_rasters(A, B)
    pa, pb = _as_point_cloud(A), _as_point_cloud(B)
    if len(pa) == 0 or len(pb) == 0:
        raise ValueError("hausdorff of an empty set")
    ta, tb = cKDTree(pa), cKDTree(pb)
    d_ab = float(np.max(tb.query(pa)[0]))
    d_ba = float(np.max(ta.query(pb)[0]))
    return max(d_ab, d_ba)


def _hausdorff_rasters(A: RasterSet, B: RasterSet) -> float:
    if A.count == 0 or B.count == 0:
        raise ValueError("hausdorff of an empty set")
    h = A.h
    # embed both grids in a common index space
    offx = round((B.origin[0] - A.origin[0]) / h)
    offy = round((B.origin[1] - A.origin[1]) / h)
    rows = max(A.grid.shape[0], B.grid.shape[0] + offy) - min(0, offy)
    cols = max(A.grid.shape[1], B.grid.shape[1] + offx) - min(0, offx)
    ay0, ax0 = -min(0, offy), -min(0, offx)
    by0, bx0 = ay0 + offy, ax0 + offx
    occ_a = np.zeros((rows, cols), dtype=bool)
    occ_b = np.zeros((rows, cols), dtype=bool)
    occ_a[ay0:ay0 + A.grid.shape[0], ax0:ax0 + A.grid.shape[1]] = A.grid
    occ_b[by0:by0 + B.grid.shape[0], bx0:bx0 + B.grid.shape[1]] = B.grid
    # exact Euclidean distance transform: two passes, one per direction
    d_to_b = ndimage.distance_transform_edt(~occ_b, sampling=h)
    d_to_a = ndimage.distance_transform_edt(~occ_a, sampling=h)
    return float(max(d_to_b[occ_a].max(), d_to_a[occ_b].max()))


def hausdorff_star(col_a, col_b) -> float:
    """Induced Hausdorff distance between two collections of sets."""
    col_a, col_b = list(col_a), list(col_b)
    if not col_a or not col_b:
        raise ValueError("hausdorff_star of an empty collection")
    d = np.array([[hausdorff(a, b) for b in col_b] for a in col_a])
    return float(max(d.min(axis=1).max(), d.min(axis=0).max()))


def _normalized_times(pts: np.ndarray) -> np.ndarray:
    return np.linspace(0.0, 1.0, len(pts))


def d_inf(a, b) -> float:
    """Sup distance under normalized time plus time-length difference.

    Exact for the polylines: both curves are piecewise linear between the
    union of their sample times, where the pointwise distance is convex.
    """
    pa, pb = a.points, b.points
    if len(pa) < 2 or len(pb) < 2:
        raise ValueError("loops need at least 2 sample points")
    ua, ub = _normalized_times(pa), _normalized_times(pb)
    u = np.union1d(ua, ub)
    xa = np.interp(u, ua, pa[:, 0])
    ya = np.interp(u, ua, pa[:, 1])
    xb = np.interp(u, ub, pb[:, 0])
    yb = np.interp(u, ub, pb[:, 1])
    sup = float(np.max(np.hypot(xa - xb, ya - yb)))
    return sup + abs(a.time_length - b.time_length)


def d_inf_slack(a, b) -> float:
    """Discretization slack: bound on extra sup distance if each polyline is
    replaced by an underlying curve that deviates at most one inter-sample
    displacement from its linear interpolant."""
    da = float(np.max(np.hypot(*np.diff(a.points, axis=0).T))) if len(a.points) > 1 else 0.0
    db = float(np.max(np.hypot(*np.diff(b.points, axis=0).T))) if len(b.points) > 1 else 0.0
    return da + db


# ---------------------------------------------------------------------------
# delta-connectivity
# ---------------------------------------------------------------------------

def _curve_point(pts: np.ndarray, u: float) -> np.ndarray:
    t = _normalized_times(pts)
    return np.array([np.interp(u, t, pts[:, 0]), np.interp(u, t, pts[:, 1])])


def _inside_intervals(pts: np.ndarray, c, rad: float):
    """Maximal parameter intervals (in [0,1]) where the polyline is strictly
    inside the open ball B(c, rad), with sampled sub-polylines."""
    k = len(pts) - 1
    raw = []
    r2 = rad * rad
    for i in range(k):
        p = pts[i] - c
        d = pts[i + 1] - pts[i]
        aa = d @ d
        bb = 2.0 * (p @ d)
        cc = p @ p - r2
        if aa == 0.0:
            if cc < 0.0:
                raw.append((i / k, (i + 1) / k))
            continue
        disc = bb * bb - 4.0 * aa * cc
        if disc <= 0.0:
            continue
        sq = math.sqrt(disc)
        s0 = max(0.0, (-bb - sq) / (2.0 * aa))
        s1 = min(1.0, (-bb + sq) / (2.0 * aa))
        if s0 < s1:
            raw.append(((i + s0) / k, (i + s1) / k))
    merged = []
    for lo, hi in raw:
        if merged and lo <= merged[-1][1]:
            merged[-1] = (merged[-1][0], max(merged[-1][1], hi))
        else:
            merged.append((lo, hi))
    return merged


def _arc_points(pts: np.ndarray, lo: float, hi: float) -> np.ndarray:
    t = _normalized_times(pts)
    inner = t[(t > lo) & (t < hi)]
    us = np.concatenate([[lo], inner, [hi]])
    xs = np.interp(us, t, pts[:, 0])
    ys = np.interp(us, t, pts[:, 1])
    return np.column_stack([xs, ys])


def _ball_connected(pts: np.ndarray, us: float, ut: float, c, rad: float) -> bool:
    gs = _curve_point(pts, us)
    gt = _curve_point(pts, ut)
    if (gs - c) @ (gs - c) >= rad * rad or (gt - c) @ (gt - c) >= rad * rad:
        return False
    intervals = _inside_intervals(pts, c, rad)
    arc_s = arc_t = None
    for i, (lo, hi) in enumerate(intervals):
        if lo <= us <= hi:
            arc_s = i
        if lo <= ut <= hi:
            arc_t = i
    if arc_s is None or arc_t is None:
        return False
    if arc_s == arc_t:
        return True
    arcs = [_arc_points(pts, lo, hi) for lo, hi in intervals]
    parent = list(range(len(arcs)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i in range(len(arcs)):
        for j in range(i + 1, len(arcs)):
            if find(i) != find(j) and polylines_intersect(arcs[i], arcs[j]):
                parent[find(i)] = find(j)
    return find(arc_s) == find(arc_t)


def delta_connected(loop, s: float, t: float, delta: float) -> str:
    """Three-valued test of the ball-connectivity predicate.

    Returns "yes" when some searched ball of diameter delta connects the two
    curve points, "no" when even balls inflated by the grid slack all fail,
    and "undecided" in between.  Ball centers are searched on a pitch
    delta/8 grid around gamma(s); any connecting ball must contain gamma(s),
    so the search region is exhaustive up to the published slack.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    t_len = loop.time_length
    if not (0.0 <= s <= t_len and 0.0 <= t <= t_len):
        raise ValueError("s, t must lie in [0, time_length]")
    if s == t:
        return "yes"
    pts = loop.points
    us, ut = s / t_len, t / t_len
    gs = _curve_point(pts, us)
    gt = _curve_point(pts, ut)
    if float(np.hypot(*(gs - gt))) >= delta:
        return "no"
    pitch = delta / 8.0
    reach = delta * (1.0 + DELTA_SLACK) / 2.0 + pitch
    nc = int(math.ceil(reach / pitch))
    offsets = np.arange(-nc, nc + 1) * pitch
    centers = [gs + np.array([dx, dy]) for dx in offsets for dy in offsets]
    for c in centers:
        if _ball_connected(pts, us, ut, c, delta / 2.0):
            return "yes"
    inflated = delta * (1.0 + DELTA_SLACK) / 2.0
    for c in centers:
        if _ball_connected(pts, us, ut, c, inflated):
            return "undecided"
    return "no"


# ---------------------------------------------------------------------------
# debug output
# ---------------------------------------------------------------------------

def write_pgm(raster: RasterSet, path) -> None:
    """Binary PGM dump: occupied cells black, empty white, row 0 at top."""
    rows, cols = raster.grid.shape
    img = np.where(raster.grid[::-1, :], 0, 255).astype(np.uint8)
    with open(path, "wb") as fh:
        fh.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def _svg_rects(grid: np.ndarray, color: str) -> list[str]:
    rows, _ = grid.shape
    out = []
    for iy in range(rows):
        row = grid[iy]
        xs = np.flatnonzero(row)
        if len(xs) == 0:
            continue
        # merge horizontal runs to keep files small
        breaks = np.nonzero(np.diff(xs) > 1)[0]
        starts = np.concatenate([[0], breaks + 1])
        ends = np.concatenate([breaks, [len(xs) - 1]])
        y = rows - 1 - iy
        for s0, e0 in zip(starts, ends):
            out.append(f'<rect x="{xs[s0]}" y="{y}" width="{xs[e0] - xs[s0] + 1}" '
                       f'height="1" fill="{color}"/>')
    return out


def decomposition_svg(source: RasterSet, topo: TopologyDecomposition, path) -> None:
    """Layered SVG: hull gray, occupancy black, outer boundary red."""
    rows, cols = source.grid.shape
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {cols} {rows}">']
    parts += _svg_rects(topo.hull.grid, "#bbbbbb")
    parts += _svg_rects(source.grid, "#000000")
    parts += _svg_rects(topo.outer_boundary.grid, "#cc0000")
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
