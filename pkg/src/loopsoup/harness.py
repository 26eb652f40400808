"""Experiment orchestration: ensembles over (lambda, N), statistics, persistence.

Convergence in distribution is probed through scalar summaries compared
across N with two-sample Kolmogorov-Smirnov distances, not through induced
Hausdorff distances between independent draws (which do not vanish).  All
outputs are deterministic functions of the configuration: replica streams
derive from (base seed, lambda index, N index, replica index), and rows are
merged in key order whatever the execution schedule.
"""

from __future__ import annotations

import csv
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy
from scipy import stats as sps

from . import __version__
from .clusters import build_graph, carpet, outermost_order, partition
from .coupling import min_gap
from .domain import Domain, domain_to_dict
from .lattice_soup import SoupConfig, default_n_max, sample_soup, tail_mass
from .plane_geom import frame_for, rasterize_domain
from .streams import derive_seed

CSV_FIELDS = ["replica", "lambda", "N", "t0", "loops", "clusters", "outermost",
              "big005", "big01", "big02", "maxdiam", "hullfrac", "carpetfrac",
              "mingap", "ms"]

DEFAULT_THRESHOLDS = (0.05, 0.1, 0.2)
REPORT_STATS = ("maxdiam", "outermost", "carpetfrac")


class InsufficientReplicasError(ValueError):
    """Too few replicas (or N values) for a convergence report."""


@dataclass
class ExperimentConfig:
    domain: Domain
    lams: tuple
    Ns: tuple
    t0: float
    theta: float | None = None
    replicas: int = 1
    seed: int = 0
    thresholds: tuple = DEFAULT_THRESHOLDS
    tail_tol: float = 1e-3
    threads: int = 1
    timing: bool = False
    report_stats: tuple = REPORT_STATS

    def validate(self) -> None:
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if not self.lams or any(l < 0 for l in self.lams):
            raise ValueError("need nonnegative intensities")
        if list(self.Ns) != sorted(set(self.Ns)):
            raise ValueError("N list must be strictly increasing")
        for N in self.Ns:
            n_roots = len(self.domain.lattice_points(N))
            if n_roots == 0:
                raise ValueError(f"N={N}: domain contains no lattice root")
            n_min = SoupConfig(self.domain, 0.0, N, self.t0).n_min()
            for lam in self.lams:
                if lam > 0 and n_min > default_n_max(lam, n_roots, self.tail_tol):
                    raise ValueError(
                        f"N={N}, lambda={lam}: no admissible loop length above cutoff")

    def to_dict(self) -> dict:
        return {
            "domain": domain_to_dict(self.domain),
            "lambdas": list(self.lams),
            "Ns": list(self.Ns),
            "t0": self.t0,
            "theta": self.theta,
            "replicas": self.replicas,
            "seed": self.seed,
            "thresholds": list(self.thresholds),
            "tail_tol": self.tail_tol,
            "timing": self.timing,
            "report_stats": list(self.report_stats),
        }


@dataclass
class StatsRecord:
    replica: int
    lam: float
    N: int
    t0: float
    loops: int
    clusters: int
    outermost: int
    big005: int
    big01: int
    big02: int
    maxdiam: float
    hullfrac: float
    carpetfrac: float
    mingap: float
    ms: float

    def row(self) -> list:
        return [self.replica, self.lam, self.N, self.t0, self.loops,
                self.clusters, self.outermost, self.big005, self.big01,
                self.big02, self.maxdiam, self.hullfrac, self.carpetfrac,
                self.mingap, self.ms]


def replica_stats(domain: Domain, lam: float, N: int, t0: float,
                  seed: int, thresholds=DEFAULT_THRESHOLDS,
                  tail_tol: float = 1e-3, replica: int = 0,
                  timing: bool = False) -> StatsRecord:
    """Sample one lattice soup and summarize its cluster geometry."""
    start = time.perf_counter()
    cfg = SoupConfig(domain, lam, N, t0, tail_tol=tail_tol, seed=seed)
    soup = sample_soup(cfg)
    h = 1.0 / N
    frame = frame_for(domain.rect, h)
    domain_cells = rasterize_domain(domain, frame).count

    if len(soup) == 0:
        n_clusters = n_outer = 0
        bigs = [0, 0, 0]
        maxdiam = hullfrac = 0.0
        carpetfrac = 1.0
        gap = math.inf
    else:
        graph = build_graph(soup)
        clusters = partition(soup, graph, h=h, frame=frame)
        outermost_order(clusters)
        outer = [c for c in clusters if c.outermost]
        n_clusters = len(clusters)
        n_outer = len(outer)
        bigs = [sum(1 for c in outer if c.diameter > thr) for thr in thresholds]
        maxdiam = max(c.diameter for c in outer)
        hullfrac = max(c.hull_cells for c in outer) / domain_cells
        carpetfrac = carpet(domain, outer, frame=frame).count / domain_cells
        gap = min_gap(soup, graph)[0] if len(soup) >= 2 else math.inf

    ms = (time.perf_counter() - start) * 1000.0 if timing else 0.0
    return StatsRecord(replica=replica, lam=lam, N=N, t0=t0, loops=len(soup),
                       clusters=n_clusters, outermost=n_outer,
                       big005=bigs[0], big01=bigs[1], big02=bigs[2],
                       maxdiam=maxdiam, hullfrac=hullfrac,
                       carpetfrac=carpetfrac, mingap=gap, ms=ms)


def _replica_task(args):
    key, kwargs = args
    try:
        return key, replica_stats(**kwargs), None
    except Exception as exc:  # noqa: BLE001 - replica failures must not kill the run
        return key, None, f"{type(exc).__name__}: {exc}"


def run_ensemble(cfg: ExperimentConfig, out_dir=None) -> list[StatsRecord]:
    """All (lambda, N, replica) records, optionally persisted under out_dir.

    Failed replicas are logged to stderr and excluded; the manifest carries
    their keys.  Output bytes are identical for any thread count.
    """
    cfg.validate()
    tasks = []
    for li, lam in enumerate(cfg.lams):
        for ni, N in enumerate(cfg.Ns):
            for r in range(cfg.replicas):
                seed = derive_seed(cfg.seed, li, ni, r)
                tasks.append(((li, ni, r), {
                    "domain": cfg.domain, "lam": lam, "N": N, "t0": cfg.t0,
                    "seed": seed, "thresholds": cfg.thresholds,
                    "tail_tol": cfg.tail_tol, "replica": r,
                    "timing": cfg.timing,
                }))

    results = {}
    failures = {}
    if cfg.threads > 1:
        with ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            outcomes = list(pool.map(_replica_task, tasks))
    else:
        outcomes = [_replica_task(t) for t in tasks]
    for key, rec, err in outcomes:
        if err is None:
            results[key] = rec
        else:
            failures[key] = err
            print(f"replica {key} failed: {err}", file=sys.stderr)

    records = [results[k] for k in sorted(results)]
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_stats_csv(records, out / "stats.csv")
        manifest = {
            "config": cfg.to_dict(),
            "versions": {
                "loopsoup": __version__,
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
            "tail_masses": {
                f"lambda={lam},N={N}": tail_mass(
                    lam, len(cfg.domain.lattice_points(N)),
                    default_n_max(lam, len(cfg.domain.lattice_points(N)), cfg.tail_tol))
                for lam in cfg.lams for N in cfg.Ns
            },
            "failures": {str(k): v for k, v in sorted(failures.items())},
            "outputs": ["stats.csv"],
        }
        with open(out / "manifest.json", "w", encoding="utf-8") as fh:
            json.dump(manifest, fh, sort_keys=True, indent=2)
            fh.write("\n")
    return records


def write_stats_csv(records: list[StatsRecord], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_FIELDS)
        for rec in records:
            writer.writerow([repr(float(v)) if isinstance(v, float) else v
                             for v in rec.row()])


def read_stats_csv(path) -> list[StatsRecord]:
    records = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            records.append(StatsRecord(
                replica=int(row["replica"]), lam=float(row["lambda"]),
                N=int(row["N"]), t0=float(row["t0"]), loops=int(row["loops"]),
                clusters=int(row["clusters"]), outermost=int(row["outermost"]),
                big005=int(row["big005"]), big01=int(row["big01"]),
                big02=int(row["big02"]), maxdiam=float(row["maxdiam"]),
                hullfrac=float(row["hullfrac"]), carpetfrac=float(row["carpetfrac"]),
                mingap=float(row["mingap"]), ms=float(row["ms"])))
    return records


def convergence_report(records: list[StatsRecord], stats=REPORT_STATS,
                       min_replicas: int = 30) -> list[dict]:
    """KS distances between consecutive-N replica distributions, per lambda.

    Convergence in distribution predicts these distances shrink as N grows.
    """
    by_group = {}
    for rec in records:
        by_group.setdefault((rec.lam, rec.N), []).append(rec)
    lams = sorted({lam for lam, _ in by_group})
    rows = []
    for lam in lams:
        ns = sorted(n for l, n in by_group if l == lam)
        if len(ns) < 2:
            raise InsufficientReplicasError(f"lambda={lam}: need >= 2 values of N")
        for n_lo, n_hi in zip(ns[:-1], ns[1:]):
            a, b = by_group[(lam, n_lo)], by_group[(lam, n_hi)]
            if len(a) < min_replicas or len(b) < min_replicas:
                raise InsufficientReplicasError(
                    f"lambda={lam}: need >= {min_replicas} replicas per N for KS")
            for stat in stats:
                xa = np.array([getattr(rec, stat) for rec in a], dtype=float)
                xb = np.array([getattr(rec, stat) for rec in b], dtype=float)
                ks = float(sps.ks_2samp(xa, xb).statistic)
                rows.append({"lambda": lam, "n_lo": n_lo, "n_hi": n_hi,
                             "stat": stat, "ks": ks})
    return rows


def write_convergence_csv(rows: list[dict], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["lambda", "n_lo", "n_hi", "stat", "ks"])
        for r in rows:
            writer.writerow([repr(float(r["lambda"])), r["n_lo"], r["n_hi"],
                             r["stat"], repr(r["ks"])])


# ---------------------------------------------------------------------------
# intensity <-> CLE parameter
# ---------------------------------------------------------------------------

KAPPA_LO = 8.0 / 3.0
KAPPA_HI = 4.0


def kappa_lambda(kappa: float) -> float:
    """Loop soup intensity corresponding to the ensemble parameter kappa."""
    if not (KAPPA_LO < kappa <= KAPPA_HI):
        raise ValueError(f"kappa must lie in (8/3, 4], got {kappa}")
    return (3.0 * kappa - 8.0) * (6.0 - kappa) / (4.0 * kappa)


def lambda_kappa(lam: float) -> float:
    """Inverse map: the unique kappa in (8/3, 4] for an intensity in (0, 1/2].

    The quadratic's discriminant is factored as (2 - 4 lam)(50 - 4 lam) to
    avoid cancellation near lam = 1/2.
    """
    if not (0.0 < lam <= 0.5):
        raise ValueError(f"lambda must lie in (0, 1/2], got {lam}")
    disc = (2.0 - 4.0 * lam) * (50.0 - 4.0 * lam)
    return (26.0 - 4.0 * lam - math.sqrt(disc)) / 6.0
