"""Discretized Brownian loop soup: the continuum reference ensemble.

A loop rooted at z with duration t0 is the pinned process
z + B_t - (t/t0) B_{t0}, sampled at m+1 uniform times.  The soup intensity
over roots and durations has density lam / (2 pi t0^2) dt0 dA, so candidate
counts and the duration law have closed forms; the stay-in-D restriction is
applied by rejection on the sampled polyline, which misses excursions
between samples (reported, not corrected).
"""

from __future__ import annotations

import math

import numpy as np

from .domain import Domain, domain_to_dict
from .loops import ContinuumLoop, Soup
from .streams import stream

_MIN_M = 8


def candidate_mean(lam: float, area: float, t_min: float, t_max: float = math.inf) -> float:
    """Expected number of loops rooted in a region of given area."""
    inv_hi = 0.0 if math.isinf(t_max) else 1.0 / t_max
    return lam * area * (1.0 / t_min - inv_hi) / (2.0 * math.pi)


def sample_time_lengths(rng: np.random.Generator, k: int, t_min: float,
                        t_max: float = math.inf) -> np.ndarray:
    """Inverse-CDF draws from the density proportional to t^-2 on [t_min, t_max]."""
    inv_lo = 1.0 / t_min
    inv_hi = 0.0 if math.isinf(t_max) else 1.0 / t_max
    u = rng.random(k)
    return 1.0 / (inv_lo - u * (inv_lo - inv_hi))


def default_m(t0: float, h: float | None) -> int:
    """Sample count keeping inter-sample displacement std below the raster h."""
    if h is None or h <= 0:
        return 64
    return max(_MIN_M, 64, math.ceil(t0 / (h * h)))


def sample_bridge_curve(z, t0: float, m: int, rng: np.random.Generator) -> ContinuumLoop:
    """Pinned planar Brownian path from z back to z, m+1 uniform samples."""
    if m < _MIN_M:
        raise ValueError(f"m must be >= {_MIN_M}")
    if t0 <= 0:
        raise ValueError("t0 must be positive")
    incr = rng.normal(0.0, math.sqrt(t0 / m), size=(m, 2))
    walk = np.empty((m + 1, 2))
    walk[0] = 0.0
    np.cumsum(incr, axis=0, out=walk[1:])
    frac = np.linspace(0.0, 1.0, m + 1)[:, None]
    pts = walk - frac * walk[-1] + np.asarray(z, dtype=float)
    pts[0] = z
    pts[-1] = z
    return ContinuumLoop((z[0], z[1]), t0, pts)


def sample_soup(D: Domain, lam: float, t_min: float, t_max: float = math.inf,
                m: int | None = None, seed: int = 0, h: float | None = None) -> Soup:
    """Draw the loops of duration >= t_min which stay in D (on their samples).

    Candidates are rooted uniformly in the bounding rectangle of D with the
    t^-2 duration law; a candidate is kept iff all its sample points lie in
    D.  ``m`` fixes the per-loop sample count; when None it adapts per loop
    via :func:`default_m` against the raster spacing ``h``.
    """
    if not (0 < t_min < t_max):
        raise ValueError(f"need 0 < t_min < t_max, got [{t_min}, {t_max}]")
    if lam < 0:
        raise ValueError("intensity must be nonnegative")
    x0, y0, x1, y1 = D.rect
    area = (x1 - x0) * (y1 - y0)
    mean = candidate_mean(lam, area, t_min, t_max)

    meta = {
        "domain": domain_to_dict(D),
        "lambda": lam,
        "t_min": t_min,
        "t_max": None if math.isinf(t_max) else t_max,
        "m": m,
        "h": h,
        "seed": seed,
        "candidate_mean": mean,
    }
    soup = Soup(kind="continuum", meta=meta, tail_mass=0.0)
    if lam == 0:
        meta.update({"candidates": 0, "rejected": 0})
        return soup

    rng = stream(seed, 0)
    count = int(rng.poisson(mean))
    rejected = 0
    for _ in range(count):
        z = (rng.uniform(x0, x1), rng.uniform(y0, y1))
        t0 = float(sample_time_lengths(rng, 1, t_min, t_max)[0])
        m_loop = m if m is not None else default_m(t0, h)
        loop = sample_bridge_curve(z, t0, m_loop, rng)
        if np.all(D.contains(loop.points)):
            soup.loops.append(loop)
        else:
            rejected += 1
    meta.update({"candidates": count, "rejected": rejected})
    return soup
