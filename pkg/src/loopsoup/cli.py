"""Command-line front end.

Subcommands: sample, clusters, converge, match, gap, kappa, render.
Exit codes: 0 success, 1 runtime error, 2 usage error.  Errors print one
diagnostic line to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import __version__
from .brownian_soup import sample_soup as sample_brownian_soup
from .clusters import (build_graph, carpet, cluster_report, clusters_svg,
                       outermost_order, partition, write_cluster_report)
from .coupling import match_loops, min_gap
from .domain import parse_domain
from .harness import (ExperimentConfig, InsufficientReplicasError, convergence_report,
                      kappa_lambda, lambda_kappa, run_ensemble, write_convergence_csv)
from .lattice_soup import SoupConfig, regime_check
from .lattice_soup import sample_soup as sample_lattice_soup
from .loops import read_soup, write_soup
from .plane_geom import _svg_rects, decompose, rasterize


class UsageError(ValueError):
    pass


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v]


def _float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="loopsoup",
                                     description="loop soup sampling and cluster analysis")
    parser.add_argument("--version", action="version", version=f"loopsoup {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="sample one soup to a JSON-lines file")
    p.add_argument("--domain", default="square", help="square | disk | rect:x0,y0,x1,y1")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--n", type=int, default=64, help="lattice scale N")
    p.add_argument("--t0", type=float, required=True, help="time-length cutoff")
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--kind", choices=["lattice", "continuum"], default="lattice")
    p.add_argument("--m", type=int, default=None, help="continuum samples per loop")
    p.add_argument("--t-max", type=float, default=None, help="continuum duration cap")
    p.add_argument("--n-max", type=int, default=None, help="lattice half-length cap")
    p.add_argument("--tail-tol", type=float, default=1e-3)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("clusters", help="cluster analysis of a soup file")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--svg", default=None)
    p.add_argument("--h", type=float, default=None, help="raster spacing")
    p.set_defaults(func=cmd_clusters)

    p = sub.add_parser("converge", help="ensemble run with KS convergence table")
    p.add_argument("--domain", default="square")
    p.add_argument("--lambda", dest="lams", type=_float_list, required=True)
    p.add_argument("--n", dest="Ns", type=_int_list, required=True)
    p.add_argument("--t0", type=float, required=True)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--replicas", type=int, required=True)
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    p.add_argument("--timing", action="store_true", help="record wall time per replica")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("match", help="bipartite loop matching between two soups")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("gap", help="minimum gap over non-intersecting loop pairs")
    p.add_argument("--in", dest="inp", required=True)
    p.set_defaults(func=cmd_gap)

    p = sub.add_parser("kappa", help="intensity <-> CLE parameter arithmetic")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--kappa", type=float, default=None)
    g.add_argument("--lambda", dest="lam", type=float, default=None)
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser("render", help="render a soup file to SVG")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--svg", required=True)
    p.add_argument("--layer", choices=["loops", "hulls", "boundaries", "carpet"],
                   default="loops")
    p.add_argument("--h", type=float, default=None)
    p.set_defaults(func=cmd_render)

    # every subcommand accepts --seed and --out
    for sp in sub.choices.values():
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out", default=None)
    return parser


def cmd_sample(args) -> None:
    if args.out is None:
        raise UsageError("sample requires --out")
    domain = parse_domain(args.domain)
    if args.kind == "lattice":
        cfg = SoupConfig(domain, args.lam, args.n, args.t0, theta=args.theta,
                         n_max=args.n_max, tail_tol=args.tail_tol, seed=args.seed)
        soup = sample_lattice_soup(cfg)
        report = regime_check(cfg)
        soup.meta["regime"] = {"in_regime": report.in_regime,
                               "checks": report.checks, "notes": report.notes}
    else:
        t_max = math.inf if args.t_max is None else args.t_max
        h = min(1.0 / 256.0, args.t0 / 8.0)
        soup = sample_brownian_soup(domain, args.lam, args.t0, t_max=t_max,
                                    m=args.m, seed=args.seed, h=h)
    write_soup(args.out, soup)
    print(f"wrote {len(soup)} loops to {args.out}")


def _analyzed(soup, h):
    graph = build_graph(soup)
    clusters = partition(soup, graph, h=h)
    outermost_order(clusters)
    return graph, clusters


def cmd_clusters(args) -> None:
    if args.out is None:
        raise UsageError("clusters requires --out")
    soup = read_soup(args.inp)
    if len(soup) == 0:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump({"clusters": []}, fh, sort_keys=True, indent=2)
            fh.write("\n")
        print("wrote empty cluster report")
        return
    _, clusters = _analyzed(soup, args.h)
    write_cluster_report(clusters, args.out)
    if args.svg:
        clusters_svg(clusters, args.svg)
    n_outer = sum(1 for c in clusters if c.outermost)
    print(f"{len(clusters)} clusters ({n_outer} outermost) -> {args.out}")


def cmd_converge(args) -> None:
    if args.out is None:
        raise UsageError("converge requires --out DIR")
    if args.replicas < 30:
        raise UsageError(f"--replicas {args.replicas} is insufficient for KS "
                         "distances; need at least 30 per N")
    if len(args.Ns) < 2:
        raise UsageError("--n needs at least two scales for a convergence table")
    cfg = ExperimentConfig(domain=parse_domain(args.domain), lams=tuple(args.lams),
                           Ns=tuple(args.Ns), t0=args.t0, theta=args.theta,
                           replicas=args.replicas, seed=args.seed,
                           threads=args.threads, timing=args.timing)
    records = run_ensemble(cfg, out_dir=args.out)
    rows = convergence_report(records, stats=cfg.report_stats)
    write_convergence_csv(rows, Path(args.out) / "convergence.csv")
    manifest_path = Path(args.out) / "manifest.json"
    manifest = json.loads(manifest_path.read_text())
    manifest["outputs"].append("convergence.csv")
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")
    print(f"{len(records)} records -> {args.out}")


def cmd_match(args) -> None:
    if args.out is None:
        raise UsageError("match requires --out")
    report = match_loops(read_soup(args.a), read_soup(args.b), args.eps)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(f"{len(report.pairs)} pairs, {len(report.unmatched_a)}+"
          f"{len(report.unmatched_b)} unmatched -> {args.out}")


def cmd_gap(args) -> None:
    if args.out is None:
        raise UsageError("gap requires --out")
    soup = read_soup(args.inp)
    if len(soup) < 2:
        raise UsageError("gap needs a soup with at least 2 loops")
    value, pair = min_gap(soup)
    payload = {"min_gap": value, "pair": list(pair) if pair else None,
               "loops": len(soup), "all_intersecting": pair is None}
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")
    print(f"min_gap = {value} -> {args.out}")


def cmd_kappa(args) -> None:
    if args.kappa is not None:
        line = f"lambda = {kappa_lambda(args.kappa):.12g}"
    else:
        line = f"kappa = {lambda_kappa(args.lam):.12g}"
    print(line)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(line + "\n")


def cmd_render(args) -> None:
    soup = read_soup(args.inp)
    if len(soup) == 0:
        raise UsageError("nothing to render: soup is empty")
    if args.layer == "loops":
        _render_loops(soup, args.svg)
    else:
        from .clusters import default_spacing
        from .domain import domain_from_dict
        h = args.h or default_spacing(soup)
        _, clusters = _analyzed(soup, h)
        outer = [c for c in clusters if c.outermost]
        rows, cols = clusters[0].raster.grid.shape
        parts = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {cols} {rows}">']
        if args.layer == "hulls":
            for c in outer:
                parts += _svg_rects(c.topology.hull.grid, "#888888")
        elif args.layer == "boundaries":
            for c in outer:
                parts += _svg_rects(c.topology.outer_boundary.grid, "#cc0000")
        else:
            dom = domain_from_dict(soup.meta["domain"])
            parts += _svg_rects(carpet(dom, outer).grid, "#000000")
        parts.append("</svg>")
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write("\n".join(parts) + "\n")
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump({"svg": args.svg, "layer": args.layer, "loops": len(soup)}, fh)
            fh.write("\n")
    print(f"rendered {args.layer} -> {args.svg}")


def _render_loops(soup, path) -> None:
    pts_all = [loop.points for loop in soup.loops]
    import numpy as np
    lo = np.min([p.min(axis=0) for p in pts_all], axis=0)
    hi = np.max([p.max(axis=0) for p in pts_all], axis=0)
    span = max(hi[0] - lo[0], hi[1] - lo[1]) or 1.0
    scale = 1000.0 / span
    w = (hi[0] - lo[0]) * scale + 20
    hgt = (hi[1] - lo[1]) * scale + 20
    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w:.1f} {hgt:.1f}">']
    for p in pts_all:
        xs = (p[:, 0] - lo[0]) * scale + 10
        ys = hgt - ((p[:, 1] - lo[1]) * scale + 10)
        coords = " ".join(f"{x:.2f},{y:.2f}" for x, y in zip(xs, ys))
        parts.append(f'<polyline points="{coords}" fill="none" stroke="#000000" '
                     'stroke-width="1"/>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except (UsageError, InsufficientReplicasError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - single diagnostic line contract
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
