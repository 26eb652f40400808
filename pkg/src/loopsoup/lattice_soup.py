"""Exact sampling of the rooted random walk loop soup, restricted to N*D.

The loop measure assigns mass (1/t) 4^{-t} to every rooted closed
nearest-neighbor walk with t steps.  Summing over the C(2n,n)^2 closed walks
of length 2n rooted at a fixed vertex gives the per-root, per-half-length
weight

    r(n) = C(2n,n)^2 * 4^{-2n} / (2n)  ~  1 / (2 pi n^2),

so a soup with intensity lam is sampled by drawing, for each root z in N*D
and each half-length n in the truncation window, a Poisson(lam * r(n))
number of loops, each one a uniform closed walk at z.  Loops whose vertices
leave N*D are rejected, survivors are rescaled by N (space / N, time / 2N^2).

Uniform closed walks are drawn through the 45-degree rotation: two
independent one-dimensional +/-1 bridges a, b give 2D unit steps
((a+b)/2, (a-b)/2), a bijection onto the C(2n,n)^2 loops.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .domain import Domain, domain_to_dict
from .loops import LatticeLoop, ScaledLoop, Soup
from .streams import stream

_LOG4 = math.log(4.0)
_EXACT_N = 512          # exact big-integer ratio below, log-space above
_ROOT_BLOCK = 4096      # roots per sampling block (one stream per block)

THETA_LO = 16.0 / 9.0
THETA_HI = 2.0


class DomainTooSmallError(ValueError):
    """N*D contains no lattice root."""


class TailMassError(ValueError):
    """Truncation cap n_max leaves more expected tail loops than tolerated."""


def return_weight(n: int) -> float:
    """Total loop-measure mass of length-2n loops rooted at a fixed vertex."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n <= _EXACT_N:
        c = math.comb(2 * n, n)
        return float(Fraction(c * c, (1 << (4 * n)) * 2 * n))
    return math.exp(log_return_weight(n))


def log_return_weight(n: int) -> float:
    """log r(n), safe against overflow for any n."""
    lc = math.lgamma(2 * n + 1) - 2.0 * math.lgamma(n + 1)
    return 2.0 * lc - 2.0 * n * _LOG4 - math.log(2 * n)


def return_weight_tail_bound(n_max: int) -> float:
    """Upper bound for sum of r(n) over n > n_max.

    r(n) <= 1/(2 pi n^2) (central binomial bound), so the tail is below
    1/(2 pi n_max); a factor-2 safety margin is applied on top.
    """
    return 2.0 / (2.0 * math.pi * n_max)


@dataclass
class SoupConfig:
    """Parameters of one lattice soup draw."""

    domain: Domain
    lam: float
    N: int
    t0: float
    theta: float | None = None
    n_max: int | None = None          # default derived from tail_tol
    tail_tol: float = 1e-3            # expected loops lost to truncation
    seed: int = 0

    def validate(self) -> None:
        if self.lam < 0:
            raise ValueError("intensity must be nonnegative")
        if self.N < 1:
            raise ValueError("N must be a positive integer")
        if self.t0 <= 0:
            raise ValueError("t0 must be positive")
        if self.theta is not None:
            if not (THETA_LO < self.theta < THETA_HI):
                raise ValueError(f"theta must lie in (16/9, 2), got {self.theta}")
            if self.t0 < self.N ** (self.theta - 2.0) * (1.0 - 1e-12):
                raise ValueError("t0 must be at least N^(theta-2) when theta is set")

    def n_min(self) -> int:
        # keep loops with steps >= 2 N^2 t0, i.e. half-length n >= N^2 t0;
        # the tiny slack guards against float representation of t0
        return max(1, math.ceil(self.N * self.N * self.t0 - 1e-9))

    def to_dict(self) -> dict:
        return {
            "domain": domain_to_dict(self.domain),
            "lambda": self.lam,
            "N": self.N,
            "t0": self.t0,
            "theta": self.theta,
            "n_max": self.n_max,
            "tail_tol": self.tail_tol,
            "seed": self.seed,
        }


def default_n_max(lam: float, n_roots: int, tail_tol: float) -> int:
    """Smallest cap whose bounded tail mass stays below tail_tol."""
    if lam <= 0 or n_roots == 0:
        return 1
    return max(1, math.ceil(lam * n_roots * return_weight_tail_bound(1) / tail_tol))


def tail_mass(lam: float, n_roots: int, n_max: int) -> float:
    """Bounded expected number of loops lost by truncating at n_max."""
    return lam * n_roots * return_weight_tail_bound(n_max)


@lru_cache(maxsize=8)
def _length_cdf(n_min: int, n_max: int) -> np.ndarray:
    """Cumulative sums of r(n) for n in [n_min, n_max].

    Built from the exact ratio recurrence
    r(n+1) = r(n) * n (2n+1)^2 / (4 (n+1)^3), in float64 throughout.
    """
    count = n_max - n_min + 1
    w = np.empty(count, dtype=np.float64)
    w[0] = return_weight(n_min)
    if count > 1:
        n = np.arange(n_min, n_max, dtype=np.float64)
        ratio = n * (2.0 * n + 1.0) ** 2 / (4.0 * (n + 1.0) ** 3)
        np.cumprod(ratio, out=ratio)
        np.multiply(ratio, w[0], out=w[1:])
    return np.cumsum(w)


def window_mass(n_min: int, n_max: int) -> float:
    """Sum of r(n) over the sampling window."""
    return float(_length_cdf(n_min, n_max)[-1])


def sample_bridge(n: int, rng: np.random.Generator) -> LatticeLoop:
    """Uniform closed 2n-step walk rooted at the origin."""
    if n < 1:
        raise ValueError("n must be >= 1")
    signs = np.empty(2 * n, dtype=np.int8)
    signs[:n] = 1
    signs[n:] = -1
    a = rng.permutation(signs)
    b = rng.permutation(signs)
    steps = np.empty((2 * n, 2), dtype=np.int8)
    steps[:, 0] = (a + b) >> 1
    steps[:, 1] = (a - b) >> 1
    return LatticeLoop((0, 0), steps)


def sample_soup(cfg: SoupConfig) -> Soup:
    """Draw the truncated rescaled soup for ``cfg`` (pure in (cfg, seed))."""
    cfg.validate()
    roots = cfg.domain.lattice_points(cfg.N)
    n_roots = len(roots)
    if n_roots == 0:
        raise DomainTooSmallError(f"N*D contains no lattice point (N={cfg.N})")
    n_min = cfg.n_min()
    n_max = cfg.n_max if cfg.n_max is not None else max(n_min, default_n_max(cfg.lam, n_roots, cfg.tail_tol))
    tail = tail_mass(cfg.lam, n_roots, n_max)
    if n_max < n_min:
        raise TailMassError(f"n_max={n_max} is below the cutoff half-length {n_min}")
    if tail > cfg.tail_tol * (1.0 + 1e-9):
        raise TailMassError(
            f"truncation tail mass {tail:.3e} exceeds tolerance {cfg.tail_tol:.3e}; raise n_max"
        )

    meta = cfg.to_dict()
    meta.update({"n_min": n_min, "n_max": n_max, "n_roots": n_roots})
    soup = Soup(kind="lattice", meta=meta, tail_mass=tail)
    if cfg.lam == 0:
        meta["rejected"] = 0
        return soup

    cdf = _length_cdf(n_min, n_max)
    total_weight = cdf[-1]
    rejected = 0
    for b in range(0, n_roots, _ROOT_BLOCK):
        block = roots[b:b + _ROOT_BLOCK]
        rng = stream(cfg.seed, b // _ROOT_BLOCK)
        count = rng.poisson(cfg.lam * len(block) * total_weight)
        for _ in range(count):
            u = rng.uniform(0.0, total_weight)
            n = n_min + int(np.searchsorted(cdf, u, side="right"))
            n = min(n, n_max)  # guard the u == total_weight edge
            root = block[rng.integers(len(block))]
            loop = sample_bridge(n, rng).translated((root[0], root[1]))
            if cfg.domain.lattice_contains(loop.vertices, cfg.N):
                soup.loops.append(ScaledLoop(loop, cfg.N))
            else:
                rejected += 1
    meta["rejected"] = rejected
    return soup


@dataclass
class RegimeReport:
    """Whether (lam, theta, t0, N) sit inside the main convergence regime."""

    in_regime: bool
    checks: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)


def regime_check(cfg: SoupConfig) -> RegimeReport:
    """Annotate (never block) a configuration against the convergence regime."""
    checks = {
        "lambda_in_(0,1/2]": 0.0 < cfg.lam <= 0.5,
        "theta_in_(16/9,2)": cfg.theta is not None and THETA_LO < cfg.theta < THETA_HI,
    }
    if cfg.theta is not None:
        checks["t0_ge_N^(theta-2)"] = cfg.t0 >= cfg.N ** (cfg.theta - 2.0) * (1.0 - 1e-12)
    else:
        checks["t0_ge_N^(theta-2)"] = False
    notes = []
    if cfg.lam > 0.5:
        notes.append("supercritical: expect unique cluster")
    if cfg.theta is None:
        notes.append("theta unset: cutoff is decoupled from N")
    return RegimeReport(in_regime=all(checks.values()), checks=checks, notes=notes)
