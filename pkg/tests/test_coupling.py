import math

import numpy as np
import pytest

import loopsoup as ls
from loopsoup.brownian_soup import sample_bridge_curve
from loopsoup.coupling import (NotIntersectingError, match_loops, min_gap,
                               overlap_bracket, self_approach)
from loopsoup.lattice_soup import SoupConfig, sample_soup
from loopsoup.loops import Soup
from loopsoup.plane_geom import d_inf
from loopsoup.streams import stream

from helpers import (PolyLoop, bowtie, dense_bowtie, oracle_best_matching,
                     oracle_edges_shapely, oracle_min_gap, square_loop,
                     translated)


def soup_of(loops, kind="continuum", **meta):
    meta.setdefault("t_min", 0.05)
    return Soup(kind=kind, loops=list(loops), meta=meta)


def test_match_identity_is_perfect():
    loops = [square_loop(2.0 * i, 0.0, 1.0) for i in range(4)]
    soup = soup_of(loops)
    rep = match_loops(soup, soup, eps=1e-6)
    assert rep.perfect
    assert rep.pairs == [(i, i, 0.0) for i in range(4)]
    assert rep.max_pair_distance == 0.0


def test_match_translated_beyond_eps_is_empty():
    eps = 0.05
    loops = [square_loop(2.0 * i, 0.0, 1.0) for i in range(4)]
    soup_a = soup_of(loops)
    soup_b = soup_of([translated(l, (3.0 * eps, 0.0)) for l in loops])
    rep = match_loops(soup_a, soup_b, eps=eps)
    assert rep.pairs == []
    assert rep.unmatched_a == [0, 1, 2, 3] and rep.unmatched_b == [0, 1, 2, 3]


def test_match_respects_eps_and_is_valid_matching():
    rng = stream(51, 0)
    loops_a = [PolyLoop(rng.normal(size=(6, 2)), 1.0) for _ in range(6)]
    loops_b = [translated(l, rng.normal(scale=0.2, size=2)) for l in loops_a]
    eps = 0.4
    rep = match_loops(soup_of(loops_a), soup_of(loops_b), eps=eps)
    seen_a = [a for a, _, _ in rep.pairs]
    seen_b = [b for _, b, _ in rep.pairs]
    assert len(seen_a) == len(set(seen_a)) and len(seen_b) == len(set(seen_b))
    assert all(d <= eps for _, _, d in rep.pairs)
    assert rep.max_pair_distance == max((d for _, _, d in rep.pairs), default=0.0)


def test_match_size_equals_exhaustive_assignment():
    # 3x3 instance with a known optimum, oracle enumerates all assignments
    base = [square_loop(float(j), 0.0, 0.5) for j in range(3)]
    offs = [0.05, 0.45, 0.95]
    others = [translated(b, (o, 0.0)) for b, o in zip(base, offs)]
    eps = 0.5
    dist = np.array([[d_inf(a, b) for b in others] for a in base])
    rep = match_loops(soup_of(base), soup_of(others), eps=eps)
    assert len(rep.pairs) == oracle_best_matching(dist, eps)


def test_min_gap_simple_cases():
    a = square_loop(0.0, 0.0, 1.0)
    b = square_loop(2.0, 0.0, 1.0)   # unit gap between right and left edges
    val, pair = min_gap(soup_of([a, b]))
    assert val == 1.0 and pair == (0, 1)

    over = [square_loop(0.0, 0.0, 1.0), square_loop(0.5, 0.5, 1.0),
            square_loop(0.25, -0.5, 1.0)]
    val, pair = min_gap(soup_of(over))
    assert math.isinf(val) and pair is None

    with pytest.raises(ValueError):
        min_gap(soup_of([a]))


def test_min_gap_matches_oracle_lattice():
    rng = stream(52, 0)
    for rep in range(8):
        cfg = SoupConfig(ls.unit_square(), lam=float(rng.uniform(0.6, 1.2)),
                         N=18, t0=0.012, seed=3000 + rep)
        soup = sample_soup(cfg)
        if len(soup) < 2:
            continue
        edges = oracle_edges_shapely(soup)
        expect, _ = oracle_min_gap(soup, edges)
        got, got_pair = min_gap(soup)
        if math.isinf(expect):
            assert math.isinf(got)
        else:
            assert got == pytest.approx(expect, abs=1e-12)
            # the returned pair attains the minimum (ties are legitimate)
            i, j = got_pair
            sub = soup_of([soup.loops[i], soup.loops[j]], kind="lattice", N=18)
            only, _ = oracle_min_gap(sub, set())
            assert only == pytest.approx(expect, abs=1e-12)


def test_overlap_bracket_ordering_and_cross():
    b = bowtie()
    grid = np.array([0.01, 0.02, 0.05, 0.1, 0.2])
    br = overlap_bracket(b, b, trials=4, eps_grid=grid)
    assert br.lower <= br.upper
    assert br.lower > 0.0          # identical loops with a transversal crossing
    assert br.label == "heuristic"


def test_overlap_bracket_transversal_clearance():
    # two long strands crossing at a right angle, clearance ~ strand length
    h = PolyLoop(np.array([[-2.0, 0.0], [2.0, 0.0], [2.0, 0.1],
                           [-2.0, 0.1], [-2.0, 0.0]]))
    v = PolyLoop(np.array([[0.0, -2.0], [0.0, 2.0], [-0.1, 2.0],
                           [-0.1, -2.0], [0.0, -2.0]]))
    br = overlap_bracket(h, v, trials=4, eps_grid=np.array([0.005, 0.01, 0.02]))
    assert br.lower >= 0.01 and br.lower <= br.upper


def test_overlap_bracket_tangential_touch_refines_to_zero():
    s1 = square_loop(0.0, 0.0, 1.0)
    s2 = square_loop(-1.0, -1.0, 1.0)    # shares exactly the corner (0, 0)
    uppers = []
    for grid in ([0.1], [0.01, 0.1], [0.001, 0.01, 0.1]):
        br = overlap_bracket(s1, s2, trials=4, eps_grid=np.array(grid))
        assert br.lower == 0.0
        uppers.append(br.upper)
    assert uppers[0] >= uppers[1] >= uppers[2]
    assert uppers[-1] == pytest.approx(0.002)


def test_overlap_bracket_grid_refinement_monotone():
    b = bowtie()
    coarse = np.array([0.02, 0.1, 0.3])
    fine = np.array([0.01, 0.02, 0.05, 0.1, 0.2, 0.3])   # superset
    br_c = overlap_bracket(b, b, trials=4, eps_grid=coarse, seed=5)
    br_f = overlap_bracket(b, b, trials=4, eps_grid=fine, seed=5)
    assert br_f.lower >= br_c.lower
    assert br_f.upper <= br_c.upper


def test_overlap_requires_intersection():
    with pytest.raises(NotIntersectingError):
        overlap_bracket(square_loop(0, 0, 1), square_loop(3, 3, 1),
                        trials=2, eps_grid=np.array([0.1]))


def test_self_approach_segment_and_crossing():
    seg = PolyLoop(np.linspace([0.0, 0.0], [1.0, 0.0], 33), 1.0)
    assert self_approach(seg, tau_sep=0.2, eps=0.05) == 0

    eight = dense_bowtie()
    assert self_approach(eight, tau_sep=0.2, eps=0.05) >= 1


def test_self_approach_monotonicity():
    rng = stream(53, 0)
    loop = sample_bridge_curve((0.0, 0.0), 1.0, 256, rng)
    for tau in (0.1, 0.2):
        c1 = self_approach(loop, tau, 0.02)
        c2 = self_approach(loop, tau, 0.04)
        assert c1 <= c2
    assert self_approach(loop, 0.3, 0.04) <= self_approach(loop, 0.15, 0.04)
