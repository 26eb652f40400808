"""Planar test domains: unit square, unit disk, axis-aligned rectangles.

Membership tests are closed (boundary points belong to the domain) and, for
lattice work, are evaluated on integer vertices of the blown-up domain N*D
so that square/rectangle tests are exact integer comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Domain:
    kind: str                                   # "square" | "disk" | "rect"
    rect: tuple[float, float, float, float]     # (xmin, ymin, xmax, ymax)

    @property
    def area(self) -> float:
        if self.kind == "disk":
            return float(np.pi)
        x0, y0, x1, y1 = self.rect
        return (x1 - x0) * (y1 - y0)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Closed membership for an array of points, shape (k, 2)."""
        pts = np.asarray(pts, dtype=float)
        if pts.ndim == 1:
            pts = pts[None, :]
        x, y = pts[:, 0], pts[:, 1]
        if self.kind == "disk":
            return x * x + y * y <= 1.0
        x0, y0, x1, y1 = self.rect
        return (x >= x0) & (x <= x1) & (y >= y0) & (y <= y1)

    def lattice_points(self, N: int) -> np.ndarray:
        """Integer points of N*D, shape (K, 2), in row-major order."""
        x0, y0, x1, y1 = self.rect
        ix = np.arange(int(np.ceil(x0 * N - 1e-9)), int(np.floor(x1 * N + 1e-9)) + 1)
        iy = np.arange(int(np.ceil(y0 * N - 1e-9)), int(np.floor(y1 * N + 1e-9)) + 1)
        gx, gy = np.meshgrid(ix, iy, indexing="ij")
        pts = np.column_stack([gx.ravel(), gy.ravel()])
        if self.kind == "disk":
            keep = pts[:, 0] ** 2 + pts[:, 1] ** 2 <= N * N
            pts = pts[keep]
        return pts

    def lattice_contains(self, vertices: np.ndarray, N: int) -> bool:
        """True iff every integer vertex lies in N*D (exact arithmetic)."""
        v = np.asarray(vertices)
        if self.kind == "disk":
            return bool(np.all(v[:, 0] ** 2 + v[:, 1] ** 2 <= N * N))
        x0, y0, x1, y1 = self.rect
        # scale the rectangle, not the vertices: integer-vs-float compare is exact
        return bool(
            np.all(v[:, 0] >= x0 * N) and np.all(v[:, 0] <= x1 * N)
            and np.all(v[:, 1] >= y0 * N) and np.all(v[:, 1] <= y1 * N)
        )


def unit_square() -> Domain:
    return Domain("square", (0.0, 0.0, 1.0, 1.0))


def unit_disk() -> Domain:
    return Domain("disk", (-1.0, -1.0, 1.0, 1.0))


def rectangle(xmin: float, ymin: float, xmax: float, ymax: float) -> Domain:
    if not (xmax > xmin and ymax > ymin):
        raise ValueError("degenerate rectangle")
    return Domain("rect", (float(xmin), float(ymin), float(xmax), float(ymax)))


def parse_domain(text: str) -> Domain:
    """Parse 'square', 'disk', or 'rect:x0,y0,x1,y1'."""
    if text == "square":
        return unit_square()
    if text == "disk":
        return unit_disk()
    if text.startswith("rect:"):
        parts = [float(v) for v in text[5:].split(",")]
        if len(parts) != 4:
            raise ValueError(f"bad rectangle string: {text!r}")
        return rectangle(*parts)
    raise ValueError(f"unknown domain: {text!r}")


def domain_to_dict(d: Domain) -> dict:
    return {"kind": d.kind, "rect": list(d.rect)}


def domain_from_dict(obj: dict) -> Domain:
    return Domain(obj["kind"], tuple(obj["rect"]))
