"""Intersection graph of a soup, cluster partition, nesting, carpet.

Intersection predicates are exact per soup kind: lattice loops intersect iff
they share a lattice vertex (axis-aligned unit segments meet only at shared
vertices), continuum loops iff some pair of polyline segments intersects
(zero tolerance; crossings between sample points are acknowledged
discretization bias).  All clusters of one soup are rasterized on a shared
frame so cross-cluster cell arithmetic is direct indexing.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .domain import domain_from_dict
from .loops import Soup
from .plane_geom import (GridFrame, RasterSet, TopologyDecomposition, decompose,
                         frame_for, rasterize, rasterize_domain)
from .segments import polylines_intersect


class OverlapError(RuntimeError):
    """Two clusters of one partition share occupied cells (upstream bug)."""


class EmptyTruncationError(ValueError):
    """No loop of the cluster survives the time-length cutoff."""


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[max(ra, rb)] = min(ra, rb)


@dataclass(eq=False)
class IntersectionGraph:
    n: int
    edges: list = field(default_factory=list)   # (i, j) with i < j

    def adjacency(self) -> dict:
        adj = defaultdict(list)
        for i, j in self.edges:
            adj[i].append(j)
            adj[j].append(i)
        return adj

    def components(self) -> list[list[int]]:
        uf = _UnionFind(self.n)
        for i, j in self.edges:
            uf.union(i, j)
        comps = defaultdict(list)
        for i in range(self.n):
            comps[uf.find(i)].append(i)
        return [sorted(c) for _, c in sorted(comps.items())]


def build_graph(soup: Soup) -> IntersectionGraph:
    """Edges between intersecting loops, via a spatial index."""
    if len(soup) == 0:
        raise ValueError("soup is empty")
    if soup.kind == "lattice":
        return _build_graph_lattice(soup)
    return _build_graph_continuum(soup)


def _build_graph_lattice(soup: Soup) -> IntersectionGraph:
    at_vertex = defaultdict(list)
    for i, loop in enumerate(soup.loops):
        verts = loop.source.vertices[:-1]
        for v in set(map(tuple, verts.tolist())):
            at_vertex[v].append(i)
    edges = set()
    for ids in at_vertex.values():
        if len(ids) > 1:
            for a in range(len(ids)):
                for b in range(a + 1, len(ids)):
                    edges.add((ids[a], ids[b]))
    return IntersectionGraph(len(soup.loops), sorted(edges))


def _build_graph_continuum(soup: Soup) -> IntersectionGraph:
    pts = [loop.points for loop in soup.loops]
    seg_lens = np.concatenate([np.hypot(*np.diff(p, axis=0).T) for p in pts])
    cell = 2.0 * float(np.median(seg_lens)) if seg_lens.size and np.median(seg_lens) > 0 else 1.0
    buckets = defaultdict(set)
    for i, p in enumerate(pts):
        lo = np.floor(np.minimum(p[:-1], p[1:]) / cell).astype(np.int64)
        hi = np.floor(np.maximum(p[:-1], p[1:]) / cell).astype(np.int64)
        for (x0, y0), (x1, y1) in zip(lo.tolist(), hi.tolist()):
            for cx in range(x0, x1 + 1):
                for cy in range(y0, y1 + 1):
                    buckets[(cx, cy)].add(i)
    candidates = set()
    for ids in buckets.values():
        if len(ids) > 1:
            ids = sorted(ids)
            for a in range(len(ids)):
                for b in range(a + 1, len(ids)):
                    candidates.add((ids[a], ids[b]))
    edges = [(i, j) for i, j in sorted(candidates) if polylines_intersect(pts[i], pts[j])]
    return IntersectionGraph(len(soup.loops), edges)


@dataclass(eq=False)
class Cluster:
    id: int
    loop_ids: list
    loops: list
    edges: list
    raster: RasterSet
    topology: TopologyDecomposition
    diameter: float
    outermost: bool | None = None
    parent: int | None = None

    @property
    def hull_cells(self) -> int:
        return self.topology.hull.count

    @property
    def outer_boundary_cells(self) -> int:
        return self.topology.outer_boundary.count

    def rep_cell(self) -> tuple[int, int]:
        iy, ix = np.nonzero(self.raster.grid)
        return int(iy[0]), int(ix[0])


def default_spacing(soup: Soup) -> float:
    if soup.kind == "lattice":
        return 1.0 / soup.meta["N"]
    return min(1.0 / 256.0, soup.meta["t_min"] / 8.0)


def soup_frame(soup: Soup, h: float) -> GridFrame:
    meta_dom = soup.meta.get("domain")
    if meta_dom is not None:
        return frame_for(domain_from_dict(meta_dom).rect, h)
    pts = np.vstack([loop.points for loop in soup.loops])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    return frame_for((lo[0], lo[1], hi[0], hi[1]), h)


def _convex_hull(pts: np.ndarray) -> np.ndarray:
    """Andrew's monotone chain; robust to collinear/duplicate input."""
    pts = np.unique(pts, axis=0)
    if len(pts) <= 2:
        return pts
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]

    def half(iterable):
        out = []
        for p in iterable:
            while len(out) >= 2:
                o, a = out[-2], out[-1]
                if (a[0] - o[0]) * (p[1] - o[1]) - (a[1] - o[1]) * (p[0] - o[0]) <= 0:
                    out.pop()
                else:
                    break
            out.append(p)
        return out

    lower = half(pts)
    upper = half(pts[::-1])
    return np.array(lower[:-1] + upper[:-1])


def _diameter(centers: np.ndarray) -> float:
    if len(centers) <= 1:
        return 0.0
    hull = _convex_hull(centers)
    diff = hull[:, None, :] - hull[None, :, :]
    return float(np.sqrt((diff ** 2).sum(axis=2).max()))


def partition(soup: Soup, graph: IntersectionGraph | None = None,
              h: float | None = None, frame: GridFrame | None = None) -> list[Cluster]:
    """Connected components of the intersection graph as rasterized clusters."""
    if graph is None:
        graph = build_graph(soup)
    if h is None:
        h = default_spacing(soup)
    if frame is None:
        frame = soup_frame(soup, h)
    edge_set = set(graph.edges)
    clusters = []
    for cid, comp in enumerate(graph.components()):
        comp_loops = [soup.loops[i] for i in comp]
        raster = rasterize(comp_loops, h, frame=frame)
        topo = decompose(raster)
        in_comp = set(comp)
        edges = [(i, j) for (i, j) in edge_set if i in in_comp and j in in_comp]
        clusters.append(Cluster(
            id=cid,
            loop_ids=list(comp),
            loops=comp_loops,
            edges=sorted(edges),
            raster=raster,
            topology=topo,
            diameter=_diameter(raster.cell_centers()),
        ))
    return clusters


def outermost_order(clusters: list[Cluster]) -> list[Cluster]:
    """Annotate parent / outermost via representative-cell containment.

    A cluster disjoint from another lies entirely in its exterior or
    entirely in its hull, so one occupied cell decides containment.
    """
    for c in clusters:
        c.parent = None
        c.outermost = None
    for c in clusters:
        rep = c.rep_cell()
        enclosing = []
        for other in clusters:
            if other is c:
                continue
            if other.raster.grid[rep]:
                raise OverlapError(
                    f"clusters {c.id} and {other.id} share cell {rep}; partition bug upstream")
            if other.topology.hull.grid[rep]:
                enclosing.append(other)
        if enclosing:
            parent = min(enclosing, key=lambda o: (o.hull_cells, o.id))
            c.parent = parent.id
        c.outermost = c.parent is None
    return clusters


def carpet(domain, outermost_clusters: list[Cluster], h: float | None = None,
           frame: GridFrame | None = None) -> RasterSet:
    """Domain raster minus every outermost cluster's (hull minus boundary)."""
    for c in outermost_clusters:
        if not c.outermost:
            raise ValueError(f"cluster {c.id} is not outermost")
    if frame is None:
        if outermost_clusters:
            frame = outermost_clusters[0].raster.frame
        else:
            if h is None:
                raise ValueError("need h or a frame when no clusters are given")
            frame = frame_for(domain.rect, h)
    grid = rasterize_domain(domain, frame).grid.copy()
    for c in outermost_clusters:
        grid &= ~(c.topology.hull.grid & ~c.topology.outer_boundary.grid)
    return RasterSet(frame, grid)


def finite_subcluster_truncation(cluster: Cluster, t_keep: float) -> Cluster:
    """Largest connected subcluster among loops of time length >= t_keep."""
    if t_keep <= 0:
        raise ValueError("t_keep must be positive")
    kept = [i for i, loop in zip(cluster.loop_ids, cluster.loops)
            if loop.time_length >= t_keep]
    if not kept:
        raise EmptyTruncationError(
            f"no loop of cluster {cluster.id} has time length >= {t_keep}")
    kept_set = set(kept)
    sub_edges = [(i, j) for (i, j) in cluster.edges if i in kept_set and j in kept_set]
    index = {gid: k for k, gid in enumerate(kept)}
    uf = _UnionFind(len(kept))
    for i, j in sub_edges:
        uf.union(index[i], index[j])
    comps = defaultdict(list)
    for gid in kept:
        comps[uf.find(index[gid])].append(gid)
    comp = sorted(comps.values(), key=lambda c: (-len(c), min(c)))[0]
    comp_set = set(comp)
    by_id = dict(zip(cluster.loop_ids, cluster.loops))
    loops = [by_id[i] for i in comp]
    raster = rasterize(loops, cluster.raster.h, frame=cluster.raster.frame)
    return Cluster(
        id=cluster.id,
        loop_ids=sorted(comp),
        loops=loops,
        edges=sorted((i, j) for (i, j) in sub_edges if i in comp_set and j in comp_set),
        raster=raster,
        topology=decompose(raster),
        diameter=_diameter(raster.cell_centers()),
    )


def cluster_report(clusters: list[Cluster]) -> list[dict]:
    return [{
        "id": c.id,
        "loop_ids": list(c.loop_ids),
        "diameter": c.diameter,
        "hull_area_cells": c.hull_cells,
        "outer_boundary_cells": c.outer_boundary_cells,
        "outermost": c.outermost,
        "parent": c.parent,
    } for c in clusters]


def write_cluster_report(clusters: list[Cluster], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"clusters": cluster_report(clusters)}, fh, sort_keys=True, indent=2)
        fh.write("\n")


_DEPTH_COLORS = ["#cc0000", "#0044cc", "#009933", "#aa6600", "#7700aa", "#007788"]


def nesting_depth(clusters: list[Cluster]) -> dict:
    by_id = {c.id: c for c in clusters}
    depth = {}
    for c in clusters:
        d, cur = 0, c
        while cur.parent is not None:
            cur = by_id[cur.parent]
            d += 1
        depth[c.id] = d
    return depth


def clusters_svg(clusters: list[Cluster], path) -> None:
    """Outer boundaries colored by nesting depth, one rect run per row."""
    from .plane_geom import _svg_rects
    if not clusters:
        raise ValueError("no clusters to draw")
    rows, cols = clusters[0].raster.grid.shape
    depth = nesting_depth(clusters)
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {cols} {rows}">']
    for c in clusters:
        color = _DEPTH_COLORS[depth[c.id] % len(_DEPTH_COLORS)]
        parts += _svg_rects(c.topology.outer_boundary.grid, color)
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
