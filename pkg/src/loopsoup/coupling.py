"""Cross-soup loop matching and gap / overlap statistics.

match_loops is a diagnostic: the one-to-one correspondence it looks for
exists on a shared probability space we cannot realize, so matching two
independently sampled soups is expected to fail while matching a soup
against its own perturbation or refinement is expected to succeed.

overlap is defined through a universal quantifier over perturbations and is
not exactly computable; overlap_bracket ships certified-direction brackets
and labels them heuristic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .loops import Soup
from .plane_geom import d_inf
from .segments import (bbox_gap, polyline_min_distance, polylines_intersect,
                       segment_crossing)
from .streams import stream


class NotIntersectingError(ValueError):
    """overlap is only defined for intersecting loops."""


@dataclass(eq=False)
class MatchReport:
    pairs: list = field(default_factory=list)       # (id_a, id_b, d_inf)
    unmatched_a: list = field(default_factory=list)
    unmatched_b: list = field(default_factory=list)
    max_pair_distance: float = 0.0
    eps: float = 0.0

    @property
    def perfect(self) -> bool:
        return not self.unmatched_a and not self.unmatched_b

    def to_dict(self) -> dict:
        return {
            "pairs": [[a, b, d] for a, b, d in self.pairs],
            "unmatched_a": self.unmatched_a,
            "unmatched_b": self.unmatched_b,
            "max_pair_distance": self.max_pair_distance,
            "eps": self.eps,
            "perfect": self.perfect,
        }


def match_loops(soup_a: Soup, soup_b: Soup, eps: float) -> MatchReport:
    """Maximum-cardinality matching among loop pairs with d_inf <= eps."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    la, lb = soup_a.loops, soup_b.loops
    adj = [[] for _ in la]
    dist = {}
    for i, a in enumerate(la):
        for j, b in enumerate(lb):
            if abs(a.time_length - b.time_length) > eps:
                continue
            if bbox_gap(a.points, b.points) + abs(a.time_length - b.time_length) > eps:
                continue
            d = d_inf(a, b)
            if d <= eps:
                adj[i].append(j)
                dist[(i, j)] = d

    # Kuhn's augmenting paths; deterministic in id order
    match_of_b = {}

    def try_augment(i, seen):
        for j in adj[i]:
            if j in seen:
                continue
            seen.add(j)
            if j not in match_of_b or try_augment(match_of_b[j], seen):
                match_of_b[j] = i
                return True
        return False

    for i in range(len(la)):
        try_augment(i, set())

    pairs = sorted((i, j, dist[(i, j)]) for j, i in match_of_b.items())
    matched_a = {i for i, _, _ in pairs}
    matched_b = {j for _, j, _ in pairs}
    return MatchReport(
        pairs=pairs,
        unmatched_a=[i for i in range(len(la)) if i not in matched_a],
        unmatched_b=[j for j in range(len(lb)) if j not in matched_b],
        max_pair_distance=max((d for _, _, d in pairs), default=0.0),
        eps=eps,
    )


def min_gap(soup: Soup, graph=None):
    """Minimum Euclidean distance over non-intersecting loop pairs.

    Returns (value, (i, j)); (inf, None) when every pair intersects.
    """
    if len(soup) < 2:
        raise ValueError("min_gap needs at least 2 loops")
    if graph is None:
        from .clusters import build_graph
        graph = build_graph(soup)
    intersecting = set(graph.edges)
    pts = [loop.points for loop in soup.loops]
    candidates = []
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if (i, j) not in intersecting:
                candidates.append((bbox_gap(pts[i], pts[j]), i, j))
    if not candidates:
        return math.inf, None
    candidates.sort()
    best, best_pair = math.inf, None
    for bound, i, j in candidates:
        if bound >= best:
            break
        d = polyline_min_distance(pts[i], pts[j])
        if d < best:
            best, best_pair = d, (i, j)
    return best, best_pair


# ---------------------------------------------------------------------------
# overlap brackets
# ---------------------------------------------------------------------------

@dataclass
class OverlapBracket:
    lower: float
    upper: float
    label: str = "heuristic"


_N_DIRECTIONS = 16


def _float_key(x: float) -> int:
    return int(np.float64(x).view(np.uint64))


def _jitter(pts: np.ndarray, eps: float, rng) -> np.ndarray:
    d = rng.normal(0.0, eps / 3.0, size=pts.shape)
    norms = np.hypot(d[:, 0], d[:, 1])
    over = norms > eps
    d[over] *= (eps / norms[over])[:, None]
    closed = bool(np.all(pts[0] == pts[-1]))
    if closed:
        d[-1] = d[0]
    return pts + d


def _separates(pts1, pts2, eps: float, trials: int, seed: int) -> bool:
    """Search for an eps-perturbation pair with disjoint polylines."""
    for k in range(_N_DIRECTIONS):
        ang = 2.0 * math.pi * k / _N_DIRECTIONS
        v = eps * np.array([math.cos(ang), math.sin(ang)])
        if not polylines_intersect(pts1 + v, pts2):
            return True
        if not polylines_intersect(pts1 + v, pts2 - v):
            # both shifted by eps, still a valid perturbation pair
            return True
    rng = stream(seed, _float_key(eps))
    for _ in range(trials):
        if not polylines_intersect(_jitter(pts1, eps, rng), _jitter(pts2, eps, rng)):
            return True
    return False


def _strand(pts: np.ndarray, seg: int, s_loc: float, p: np.ndarray, radius: float):
    """Sub-polyline through point p on segment ``seg`` cut at |x - p| = radius.

    Returns the strand points with both endpoints exactly on the circle, or
    None when the curve ends (or fully wraps) inside the ball.
    """
    k = len(pts) - 1
    closed = bool(np.all(pts[0] == pts[-1]))
    r2 = radius * radius

    def exit_on(a, b):
        # first crossing of |a + t (b - a) - p| = radius with t in (0, 1]
        d = b - a
        w = a - p
        aa = d @ d
        if aa == 0.0:
            return None
        bb = 2.0 * (w @ d)
        cc = w @ w - r2
        disc = bb * bb - 4.0 * aa * cc
        if disc < 0.0:
            return None
        sq = math.sqrt(disc)
        for t in sorted(((-bb - sq) / (2 * aa), (-bb + sq) / (2 * aa))):
            if 0.0 < t <= 1.0:
                return a + t * d
        return None

    def walk(start_pt, seg0, forward: bool):
        out = []
        cur = start_pt
        j = seg0
        for _ in range(k + 1):
            nxt = pts[j + 1] if forward else pts[j]
            if (nxt - p) @ (nxt - p) <= r2:
                out.append(nxt)
                cur = nxt
                j = j + 1 if forward else j - 1
                if closed:
                    j %= k
                elif not (0 <= j < k):
                    return None     # open curve ends inside the ball
            else:
                hit = exit_on(cur, nxt)
                if hit is None:
                    return None
                out.append(hit)
                return out
        return None                 # wrapped the whole loop inside the ball

    fwd = walk(pts[seg] + s_loc * (pts[seg + 1] - pts[seg]), seg, True)
    x0 = pts[seg] + s_loc * (pts[seg + 1] - pts[seg])
    bwd = walk(x0, seg, False)
    if fwd is None or bwd is None:
        return None
    return np.array(list(reversed(bwd)) + [x0] + fwd)


def _line_offsets(strand: np.ndarray, p: np.ndarray):
    """(max deviation from the endpoint chord, offset of p, chord angle)."""
    a, b = strand[0], strand[-1]
    u = b - a
    norm = float(np.hypot(u[0], u[1]))
    if norm == 0.0:
        return None
    u = u / norm
    n = np.array([-u[1], u[0]])
    dev = float(np.max(np.abs((strand - a) @ n)))
    off = float(abs((p - a) @ n))
    return dev, off, math.atan2(u[1], u[0])


def _crossings(pts1, pts2, cap: int = 16):
    found = []
    for i in range(len(pts1) - 1):
        for j in range(len(pts2) - 1):
            x = segment_crossing(pts1[i], pts1[i + 1], pts2[j], pts2[j + 1])
            if x is not None:
                # local parameter of x on segment i of curve 1
                d = pts1[i + 1] - pts1[i]
                s = float(((x - pts1[i]) @ d) / (d @ d))
                found.append((i, s, j, x))
                if len(found) >= cap:
                    return found
    return found


def _certify(pts1, pts2, eps: float) -> bool:
    """Sufficient condition that every eps-perturbation pair still intersects.

    At a proper crossing p, extract the strand of each curve through p cut
    at radius 4 eps.  If each strand runs side to side within a narrow tube
    around its chord and the tubes cross at a wide enough angle, perturbed
    strands are forced through interleaved ports of the circle of radius
    2 eps around p and must intersect (Jordan argument).
    """
    radius = 4.0 * eps
    rho = 2.0 * eps
    for i, s, j, p in _crossings(pts1, pts2):
        s1 = _strand(pts1, i, s, p, radius)
        if s1 is None:
            continue
        d2 = pts2[j + 1] - pts2[j]
        t = float(((p - pts2[j]) @ d2) / (d2 @ d2))
        s2 = _strand(pts2, j, t, p, radius)
        if s2 is None:
            continue
        g1 = _line_offsets(s1, p)
        g2 = _line_offsets(s2, p)
        if g1 is None or g2 is None:
            continue
        w1, o1, ang1 = g1
        w2, o2, ang2 = g2
        if w1 + o1 + eps >= rho or w2 + o2 + eps >= rho:
            continue
        alpha1 = math.asin((w1 + o1 + eps) / rho)
        alpha2 = math.asin((w2 + o2 + eps) / rho)
        phi = abs(ang1 - ang2) % math.pi
        delta = min(phi, math.pi - phi)
        if alpha1 + alpha2 < delta:
            return True
    return False


def overlap_bracket(loop1, loop2, trials: int = 8, eps_grid=None, seed: int = 0) -> OverlapBracket:
    """Heuristic lower/upper brackets of the overlap of two intersecting loops.

    upper: twice the smallest grid eps at which some searched perturbation
    pair separates the curves (inf when none does).  lower: twice the
    largest grid eps at which the crossing certificate fires (0 when none
    does).  Refining the grid (superset) never worsens either bracket.
    """
    pts1, pts2 = loop1.points, loop2.points
    if not polylines_intersect(pts1, pts2):
        raise NotIntersectingError("loops do not intersect; overlap undefined")
    if eps_grid is None:
        scale = max(np.ptp(pts1, axis=0).max(), np.ptp(pts2, axis=0).max())
        eps_grid = scale * np.geomspace(1e-3, 0.5, 10)
    eps_grid = np.sort(np.asarray(eps_grid, dtype=float))
    if np.any(eps_grid <= 0):
        raise ValueError("eps_grid values must be positive")

    upper = math.inf
    for eps in eps_grid:
        if _separates(pts1, pts2, float(eps), trials, seed):
            upper = 2.0 * float(eps)
            break
    lower = 0.0
    for eps in eps_grid[::-1]:
        if _certify(pts1, pts2, float(eps)):
            lower = 2.0 * float(eps)
            break
    if lower > upper:
        raise AssertionError(
            f"bracket inversion (lower={lower}, upper={upper}); certificate bug")
    return OverlapBracket(lower=lower, upper=upper)


def self_approach(loop, tau_sep: float, eps: float) -> int:
    """Count sample-time pairs at least tau_sep apart that come within eps.

    Time separation is cyclic for closed curves.  A profile decreasing in
    eps at fixed tau_sep is the near-touching diagnostic.
    """
    if tau_sep <= 0:
        raise ValueError("tau_sep must be positive")
    pts = loop.points
    T = loop.time_length
    closed = bool(np.all(pts[0] == pts[-1]))
    if closed:
        pts = pts[:-1]
    k = len(pts)
    times = np.arange(k) * (T / (k if closed else k - 1))
    dt = np.abs(times[:, None] - times[None, :])
    if closed:
        dt = np.minimum(dt, T - dt)
    diff = pts[:, None, :] - pts[None, :, :]
    close = (diff[:, :, 0] ** 2 + diff[:, :, 1] ** 2) <= eps * eps
    mask = np.triu(np.ones((k, k), dtype=bool), 1)
    return int(np.count_nonzero(close & (dt >= tau_sep) & mask))
