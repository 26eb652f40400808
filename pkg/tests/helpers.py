"""Shared fixtures and independent oracles for the test suite.

Oracles here deliberately avoid the package's own indexing/partition code:
cluster structure is recomputed with shapely predicates plus a plain BFS
closure, distances with direct numpy brute force.
"""

from __future__ import annotations

import itertools
from collections import deque
from fractions import Fraction

import numpy as np
from shapely.geometry import LineString

from loopsoup.plane_geom import GridFrame, RasterSet, frame_for, rasterize


class PolyLoop:
    """Minimal object satisfying the loop protocol used by geometry code."""

    def __init__(self, points, time_length=1.0):
        self.points = np.asarray(points, dtype=float)
        self.time_length = float(time_length)


def translated(loop, v):
    return PolyLoop(loop.points + np.asarray(v, dtype=float), loop.time_length)


def bowtie(scale=1.0):
    """Closed figure-eight whose central crossing is transversal."""
    pts = scale * np.array([[-1.0, -1.0], [1.0, 1.0], [1.0, -1.0], [-1.0, 1.0], [-1.0, -1.0]])
    return PolyLoop(pts)


def dense_bowtie(scale=1.0, per_edge=48):
    pts = bowtie(scale).points
    out = []
    for a, b in zip(pts[:-1], pts[1:]):
        ts = np.linspace(0.0, 1.0, per_edge, endpoint=False)[:, None]
        out.append(a + ts * (b - a))
    out.append(pts[-1:])
    return PolyLoop(np.vstack(out))


def square_loop(x0, y0, side, time_length=1.0):
    pts = np.array([[x0, y0], [x0 + side, y0], [x0 + side, y0 + side],
                    [x0, y0 + side], [x0, y0]], dtype=float)
    return PolyLoop(pts, time_length)


def circle_loop(cx, cy, r, k=64, time_length=1.0):
    t = np.linspace(0.0, 2.0 * np.pi, k + 1)
    pts = np.column_stack([cx + r * np.cos(t), cy + r * np.sin(t)])
    pts[-1] = pts[0]
    return PolyLoop(pts, time_length)


# ---------------------------------------------------------------------------
# random raster pairs for the topology inclusion suite
# ---------------------------------------------------------------------------

def random_shapes(rng, n_shapes=None, extent=40.0):
    """Polyline shapes (loops, arcs, walks) within [0, extent]^2."""
    if n_shapes is None:
        n_shapes = int(rng.integers(2, 6))
    shapes = []
    for _ in range(n_shapes):
        kind = rng.integers(3)
        cx, cy = rng.uniform(8.0, extent - 8.0, size=2)
        if kind == 0:
            side = rng.uniform(4.0, 10.0)
            shapes.append(square_loop(cx - side / 2, cy - side / 2, side).points)
        elif kind == 1:
            shapes.append(circle_loop(cx, cy, rng.uniform(2.5, 7.0), k=48).points)
        else:
            steps = rng.uniform(-3.0, 3.0, size=(int(rng.integers(4, 10)), 2))
            pts = np.vstack([[cx, cy], [cx, cy] + np.cumsum(steps, axis=0)])
            pts = np.clip(pts, 6.0, extent - 6.0)
            shapes.append(pts)
    return shapes


def raster_of(shapes, frame: GridFrame) -> RasterSet:
    return rasterize(shapes, frame.h, frame=frame)


def standard_frame(extent=40.0, h=1.0) -> GridFrame:
    return frame_for((0.0, 0.0, extent, extent), h, margin=3)


def perturb_shapes(shapes, rng, amplitude):
    """Translate every shape by one vector of length <= amplitude, plus a
    small independent jitter per shape."""
    v = rng.uniform(-1.0, 1.0, size=2)
    norm = np.hypot(*v) or 1.0
    v = v / norm * rng.uniform(0.0, amplitude)
    out = []
    for pts in shapes:
        j = rng.uniform(-amplitude / 4.0, amplitude / 4.0, size=2)
        out.append(pts + v + j)
    return out


# ---------------------------------------------------------------------------
# topology decomposition and dilation-inclusion checks
#
# Raster quantities stand in for the continuum sets they represent (unions
# of closed cells): cell centers sit within h/sqrt(2) of those sets, so
# hypotheses are checked with an h*sqrt(2) tightening and conclusions are
# allowed the 2h quantization slack.
# ---------------------------------------------------------------------------

SQ2 = float(np.sqrt(2.0))


def decomposition_invariants_ok(raster, topo) -> bool:
    from scipy import ndimage
    ext, hull, ob = topo.exterior.grid, topo.hull.grid, topo.outer_boundary.grid
    if (ext & hull).any() or not (ext | hull).all():
        return False
    if not (ob <= hull).all():
        return False
    plus = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
    near_ext = ndimage.binary_dilation(ext, structure=plus)
    if not (ob <= near_ext).all():
        return False
    if ob.any() != hull.any():
        return False
    return bool((raster.grid <= hull).all())


def _directed(P, Q) -> float:
    from loopsoup.plane_geom import directed_hausdorff
    if len(P) == 0:
        return 0.0
    return directed_hausdorff(P, Q)


def inclusion_check(source: RasterSet, target: RasterSet, radius: float) -> bool:
    """source cell centers within ``radius`` of target cell centers."""
    src = source.cell_centers()
    tgt = target.cell_centers()
    if len(src) == 0:
        return True
    if len(tgt) == 0:
        return False
    return _directed(src, tgt) <= radius


def dilation_hypotheses_hold(A, topo_a, B, topo_b, delta, h) -> bool:
    """Certified continuum hypotheses: d_H(A, B) < delta and
    Ext A inside the delta-dilated Ext B."""
    from loopsoup.plane_geom import hausdorff
    if hausdorff(A, B) >= delta - h / SQ2:
        return False
    return inclusion_check(topo_a.exterior, topo_b.exterior, delta - h * SQ2)


def dilation_conclusions_hold(topo_a, topo_b, delta, h) -> bool:
    """Boundary of A within 2 delta of boundary of B, hull of B within
    2 delta of hull of A; 2h quantization slack allowed."""
    ok1 = inclusion_check(topo_a.outer_boundary, topo_b.outer_boundary,
                          2.0 * delta + 2.0 * h)
    ok2 = inclusion_check(topo_b.hull, topo_a.hull, 2.0 * delta + 2.0 * h)
    return ok1 and ok2


# ---------------------------------------------------------------------------
# brute-force oracles
# ---------------------------------------------------------------------------

def oracle_edges_shapely(soup):
    """All-pairs intersection edges via shapely (independent predicate)."""
    lines = [LineString(loop.points) for loop in soup.loops]
    edges = set()
    for i in range(len(lines)):
        for j in range(i + 1, len(lines)):
            if lines[i].intersects(lines[j]):
                edges.add((i, j))
    return edges


def oracle_edges_lattice(soup):
    """All-pairs shared-vertex edges via plain set intersection."""
    vsets = [set(map(tuple, loop.source.vertices.tolist())) for loop in soup.loops]
    edges = set()
    for i in range(len(vsets)):
        for j in range(i + 1, len(vsets)):
            if vsets[i] & vsets[j]:
                edges.add((i, j))
    return edges


def oracle_components(n, edges):
    """Transitive closure by BFS, independent of the union-find path."""
    adj = {i: [] for i in range(n)}
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    seen, comps = set(), []
    for s in range(n):
        if s in seen:
            continue
        comp, queue = [], deque([s])
        seen.add(s)
        while queue:
            v = queue.popleft()
            comp.append(v)
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        comps.append(sorted(comp))
    return sorted(comps)


def oracle_min_gap(soup, edges):
    """Brute-force min distance over non-intersecting pairs (numpy direct)."""
    best, best_pair = np.inf, None
    pts = [loop.points for loop in soup.loops]
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if (i, j) in edges:
                continue
            d = min(_pts_to_segs(pts[i], pts[j]), _pts_to_segs(pts[j], pts[i]))
            if d < best:
                best, best_pair = d, (i, j)
    return best, best_pair


def _pts_to_segs(P, S):
    a, b = S[:-1], S[1:]
    d = b - a
    dd = (d * d).sum(axis=1)
    dd[dd == 0] = 1.0
    t = np.clip(((P[:, None, :] - a) * d).sum(axis=2) / dd, 0.0, 1.0)
    c = a + t[:, :, None] * d
    return float(np.sqrt(((P[:, None, :] - c) ** 2).sum(axis=2).min()))


def oracle_best_matching(dist, eps):
    """Maximum matching size by exhaustive assignment enumeration (small n)."""
    n_a, n_b = dist.shape
    best = 0
    for perm in itertools.permutations(range(n_b), min(n_a, n_b)):
        size = sum(1 for i, j in enumerate(perm) if dist[i, j] <= eps)
        best = max(best, size)
    return best


def enumerate_closed_walks(n):
    """Every closed 2n-step walk as a step string, with its loop-measure mass."""
    moves = {"E": (1, 0), "N": (0, 1), "W": (-1, 0), "S": (0, -1)}
    walks = {}
    for seq in itertools.product("ENWS", repeat=2 * n):
        x = y = 0
        for ch in seq:
            dx, dy = moves[ch]
            x += dx
            y += dy
        if x == 0 and y == 0:
            walks["".join(seq)] = Fraction(1, 2 * n * 4 ** (2 * n))
    return walks
