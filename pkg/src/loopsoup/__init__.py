"""Loop soup sampling, cluster topology, and convergence diagnostics."""

__version__ = "0.1.0"

from .domain import Domain, parse_domain, rectangle, unit_disk, unit_square
from .loops import ContinuumLoop, LatticeLoop, ScaledLoop, Soup, read_soup, write_soup
from .lattice_soup import (RegimeReport, SoupConfig, regime_check, return_weight,
                           sample_bridge)
from .lattice_soup import sample_soup as sample_lattice_soup
from .brownian_soup import sample_bridge_curve
from .brownian_soup import sample_soup as sample_brownian_soup
from .plane_geom import (GridFrame, RasterSet, TopologyDecomposition, d_inf,
                         d_inf_slack, decompose, delta_connected, frame_for,
                         hausdorff, hausdorff_star, rasterize, rasterize_domain)
from .clusters import (Cluster, IntersectionGraph, build_graph, carpet,
                       finite_subcluster_truncation, outermost_order, partition)
from .coupling import (MatchReport, OverlapBracket, match_loops, min_gap,
                       overlap_bracket, self_approach)
from .harness import (ExperimentConfig, StatsRecord, convergence_report,
                      kappa_lambda, lambda_kappa, run_ensemble)

__all__ = [
    "Domain", "parse_domain", "rectangle", "unit_disk", "unit_square",
    "ContinuumLoop", "LatticeLoop", "ScaledLoop", "Soup", "read_soup", "write_soup",
    "RegimeReport", "SoupConfig", "regime_check", "return_weight", "sample_bridge",
    "sample_lattice_soup", "sample_bridge_curve", "sample_brownian_soup",
    "GridFrame", "RasterSet", "TopologyDecomposition", "d_inf", "d_inf_slack",
    "decompose", "delta_connected", "frame_for", "hausdorff", "hausdorff_star",
    "rasterize", "rasterize_domain",
    "Cluster", "IntersectionGraph", "build_graph", "carpet",
    "finite_subcluster_truncation", "outermost_order", "partition",
    "MatchReport", "OverlapBracket", "match_loops", "min_gap",
    "overlap_bracket", "self_approach",
    "ExperimentConfig", "StatsRecord", "convergence_report",
    "kappa_lambda", "lambda_kappa", "run_ensemble",
]
