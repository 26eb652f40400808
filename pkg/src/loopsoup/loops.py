"""Loop types and soup containers.

Three concrete loop kinds share one informal protocol used by all geometry
code: ``points`` is an (k+1, 2) float array with points[0] == points[-1],
sampled at uniform time spacing, and ``time_length`` is the loop's duration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

STEP_CHARS = {(1, 0): "E", (0, 1): "N", (-1, 0): "W", (0, -1): "S"}


class LatticeLoop:
    """Closed nearest-neighbor walk on Z^2: a root plus 2n unit steps."""

    __slots__ = ("root", "steps", "_vertices")

    def __init__(self, root: tuple[int, int], steps: np.ndarray):
        self.root = (int(root[0]), int(root[1]))
        self.steps = steps
        self._vertices = None

    @property
    def nsteps(self) -> int:
        return self.steps.shape[0]

    @property
    def vertices(self) -> np.ndarray:
        """(2n+1, 2) int64 vertex sequence; first and last equal the root."""
        if self._vertices is None:
            v = np.empty((self.nsteps + 1, 2), dtype=np.int64)
            v[0] = self.root
            np.cumsum(self.steps, axis=0, out=v[1:])
            v[1:] += self.root
            self._vertices = v
        return self._vertices

    def translated(self, root: tuple[int, int]) -> "LatticeLoop":
        return LatticeLoop(root, self.steps)

    def step_string(self) -> str:
        return "".join(STEP_CHARS[(int(dx), int(dy))] for dx, dy in self.steps)

    def validate(self) -> None:
        n = self.nsteps
        if n < 2 or n % 2 != 0:
            raise ValueError(f"loop must have even length >= 2, got {n}")
        if not np.all(np.abs(self.steps).sum(axis=1) == 1):
            raise ValueError("steps must be unit moves")
        if tuple(self.vertices[-1]) != self.root:
            raise ValueError("walk does not return to its root")


class ScaledLoop:
    """A lattice loop under Brownian rescaling: space / N, time / (2 N^2)."""

    __slots__ = ("source", "scale", "_points")

    def __init__(self, source: LatticeLoop, scale: int):
        if scale < 1:
            raise ValueError("scale must be a positive integer")
        self.source = source
        self.scale = int(scale)
        self._points = None

    @property
    def time_length(self) -> float:
        return self.source.nsteps / (2.0 * self.scale * self.scale)

    @property
    def points(self) -> np.ndarray:
        if self._points is None:
            self._points = self.source.vertices / float(self.scale)
        return self._points


class ContinuumLoop:
    """Discretized planar loop: m+1 samples at uniform spacing t0/m."""

    __slots__ = ("root", "time_length", "points")

    def __init__(self, root: tuple[float, float], time_length: float, points: np.ndarray):
        self.root = (float(root[0]), float(root[1]))
        self.time_length = float(time_length)
        self.points = points

    @property
    def m(self) -> int:
        return self.points.shape[0] - 1

    def validate(self) -> None:
        if self.m < 8:
            raise ValueError("continuum loop needs at least 8 segments")
        if self.time_length <= 0:
            raise ValueError("time length must be positive")
        if not (np.all(self.points[0] == self.root) and np.all(self.points[-1] == self.root)):
            raise ValueError("loop must start and end at its root")


Loop = LatticeLoop | ScaledLoop | ContinuumLoop


@dataclass(eq=False)
class Soup:
    """A sampled loop collection plus the configuration that produced it."""

    kind: str                     # "lattice" | "continuum"
    loops: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    tail_mass: float = 0.0

    def __len__(self) -> int:
        return len(self.loops)

    def __iter__(self):
        return iter(self.loops)


def write_soup(path, soup: Soup) -> None:
    """JSON-lines dump: one header line, then one line per loop."""
    header = {"kind": soup.kind, "count": len(soup.loops), "tail_mass": soup.tail_mass}
    header.update(soup.meta)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for i, loop in enumerate(soup.loops):
            fh.write(json.dumps(_loop_record(i, soup.kind, loop)) + "\n")


def _loop_record(i: int, kind: str, loop) -> dict:
    if kind == "lattice":
        return {
            "id": i,
            "kind": "lattice",
            "N": loop.scale,
            "time_length": loop.time_length,
            "root": [int(loop.source.root[0]), int(loop.source.root[1])],
            "points": loop.points.tolist(),
        }
    return {
        "id": i,
        "kind": "continuum",
        "m": loop.m,
        "time_length": loop.time_length,
        "root": [loop.root[0], loop.root[1]],
        "points": loop.points.tolist(),
    }


def read_soup(path) -> Soup:
    with open(path, "r", encoding="utf-8") as fh:
        header = json.loads(fh.readline())
        kind = header["kind"]
        loops = []
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            loops.append(_loop_from_record(rec))
    meta = {k: v for k, v in header.items() if k not in ("kind", "count", "tail_mass")}
    soup = Soup(kind=kind, loops=loops, meta=meta, tail_mass=header.get("tail_mass", 0.0))
    if len(loops) != header.get("count", len(loops)):
        raise ValueError(f"{path}: header count {header['count']} != {len(loops)} loops")
    return soup


def _loop_from_record(rec: dict):
    pts = np.asarray(rec["points"], dtype=float)
    if rec["kind"] == "lattice":
        N = int(rec["N"])
        vertices = np.rint(pts * N).astype(np.int64)
        steps = np.diff(vertices, axis=0).astype(np.int8)
        return ScaledLoop(LatticeLoop(tuple(rec["root"]), steps), N)
    return ContinuumLoop(tuple(rec["root"]), float(rec["time_length"]), pts)
