"""Hypercube covers, box-counting dimension, cover partitioning, and support generators."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .rates import RateFit, fit_loglog


@dataclass(frozen=True)
class HypercubeCover:
    """Occupied cells of the side-``gamma`` grid anchored at the origin.

    ``cells`` holds integer anchor coordinates (cube = [c*gamma, (c+1)*gamma]
    per axis), sorted lexicographically; a cell's index in the tuple is its
    cube id everywhere downstream.
    """

    gamma: float
    dim: int
    cells: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.cells)

    def centers(self) -> np.ndarray:
        return (np.array(self.cells, dtype=np.float64) + 0.5) * self.gamma


@dataclass(frozen=True)
class CoverPartition:
    """Disjoint groups of cube ids whose members are pairwise >= gamma apart."""

    groups: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class DimEstimate:
    value: float
    scales: tuple[tuple[float, int], ...]
    fit: RateFit
    low_confidence: bool = False


def grid_cover(points, gamma: float) -> HypercubeCover:
    """Cells of the origin-anchored gamma-grid that contain at least one point."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise ValueError("points must be a nonempty (n, D) array")
    if not 0 < gamma <= 1:
        raise ValueError("gamma must be in (0, 1]")
    if np.any(pts < 0.0) or np.any(pts > 1.0):
        bad = np.argwhere((pts < 0.0) | (pts > 1.0))[0]
        raise ValueError(f"point {bad[0]} lies outside [0,1]^D at coordinate {bad[1]}")
    top = math.ceil(1.0 / gamma) - 1
    idx = np.minimum(np.floor(pts / gamma).astype(np.int64), top)
    cells = sorted(set(map(tuple, idx)))
    return HypercubeCover(gamma=float(gamma), dim=pts.shape[1], cells=tuple(cells))


def set_distance(cell_a, cell_b, gamma: float) -> float:
    """Max-norm distance between the closed cubes at two grid cells."""
    if len(cell_a) != len(cell_b):
        raise ValueError("cells must have the same dimension")
    gaps = [max(0, abs(a - b) - 1) for a, b in zip(cell_a, cell_b)]
    return gamma * max(gaps)


def partition_cover(cover: HypercubeCover) -> CoverPartition:
    """Greedily split the cover into groups of cubes pairwise >= gamma apart.

    Groups are extracted one at a time: scan remaining cubes in id order and
    admit each that keeps the current group gamma-separated. Two grid cubes
    are closer than gamma exactly when their integer coordinates differ by at
    most 1 on every axis, so membership checks reduce to neighbor lookups.
    The group count never exceeds 5^D (3^D for grid-anchored cells).
    """
    remaining = list(range(len(cover.cells)))
    coords = cover.cells
    groups = []
    while remaining:
        taken = set()
        group = []
        for cid in remaining:
            cell = coords[cid]
            if _has_neighbor(cell, taken):
                continue
            group.append(cid)
            taken.add(cell)
        groups.append(tuple(group))
        chosen = set(group)
        remaining = [cid for cid in remaining if cid not in chosen]
    return CoverPartition(groups=tuple(groups))


def _has_neighbor(cell, taken: set) -> bool:
    if not taken:
        return False
    dim = len(cell)
    # Moore neighborhood incl. the cell itself: all offsets in {-1,0,1}^D
    for flat in range(3**dim):
        probe = []
        rem = flat
        for axis in range(dim):
            probe.append(cell[axis] + (rem % 3) - 1)
            rem //= 3
        if tuple(probe) in taken:
            return True
    return False


def minkowski_dim(points, scales) -> DimEstimate:
    """Box-counting dimension: slope of log N(gamma) against log(1/gamma)."""
    scales = [float(s) for s in scales]
    if len(scales) < 3:
        raise ValueError("need at least 3 scales")
    if any(b >= a for a, b in zip(scales, scales[1:])):
        raise ValueError("scales must be strictly decreasing")
    counts = [len(grid_cover(points, g)) for g in scales]
    fit = fit_loglog([1.0 / g for g in scales], counts)
    low_confidence = all(c == 1 for c in counts)
    return DimEstimate(
        value=fit.slope,
        scales=tuple(zip(scales, counts)),
        fit=fit,
        low_confidence=low_confidence,
    )


# ---------------------------------------------------------------------------
# support generators


def sphere_support(d: int, ambient_dim: int, n: int, seed: int, radius: float = 0.45) -> np.ndarray:
    """Uniform sample on a d-sphere embedded in the first d+1 coordinates of [0,1]^D."""
    if d + 1 > ambient_dim:
        raise ValueError(f"d-sphere needs d+1 <= D, got d={d}, D={ambient_dim}")
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((n, d + 1))
    raw /= np.linalg.norm(raw, axis=1, keepdims=True)
    pts = np.full((n, ambient_dim), 0.5)
    pts[:, : d + 1] += radius * raw
    return pts


def koch_polyline(level: int) -> np.ndarray:
    """Vertices of the level-``level`` Koch curve from (0,0) to (1,0), peak up."""
    pts = np.array([[0.0, 0.0], [1.0, 0.0]])
    rot = np.array(
        [[math.cos(math.pi / 3), -math.sin(math.pi / 3)],
         [math.sin(math.pi / 3), math.cos(math.pi / 3)]]
    )
    for _ in range(level):
        p, q = pts[:-1], pts[1:]
        a = p + (q - p) / 3.0
        b = p + 2.0 * (q - p) / 3.0
        c = a + (b - a) @ rot.T
        stacked = np.stack([p, a, c, b], axis=1).reshape(-1, 2)
        pts = np.vstack([stacked, pts[-1]])
    return pts


def koch_support(n: int, seed: int, level: int = 7) -> np.ndarray:
    """Uniform sample on the level-``level`` Koch polyline (all segments equal length)."""
    verts = koch_polyline(level)
    p, q = verts[:-1], verts[1:]
    rng = np.random.default_rng(seed)
    seg = rng.integers(0, len(p), size=n)
    t = rng.random(n)
    return p[seg] + t[:, None] * (q[seg] - p[seg])


def _uniform_lp_half_ball(d: int, p: float, n: int, rng) -> np.ndarray:
    """Uniform sample in the unit l^p ball for p = 1/2 (Barthe et al. sampler)."""
    # |g_i| with density prop. to exp(-t^p): for p = 1/2, t = u^2 with u ~ Gamma(2, 1)
    u = rng.gamma(shape=2.0, scale=1.0, size=(n, d))
    g = np.sign(rng.random((n, d)) - 0.5) * u**2
    w = rng.exponential(scale=1.0, size=n)
    norm_term = u.sum(axis=1) + w
    return g / (norm_term**2)[:, None]


def lp_ball_union_support(
    d: int, ambient_dim: int, n: int, seed: int, radius: float = 0.4
) -> np.ndarray:
    """Equal mixture of uniform draws from concentric d-dimensional l^(1/2) and l^2 balls.

    Both solid balls sit in the first d coordinates, centered at the middle of
    the cube, with the remaining coordinates fixed at 1/2.
    """
    if d > ambient_dim:
        raise ValueError(f"need d <= D, got d={d}, D={ambient_dim}")
    rng = np.random.default_rng(seed)
    pick_l2 = rng.random(n) < 0.5
    out = np.empty((n, d))

    n2 = int(pick_l2.sum())
    if n2:
        dirs = rng.standard_normal((n2, d))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        r = rng.random(n2) ** (1.0 / d)
        out[pick_l2] = dirs * r[:, None]
    nh = n - n2
    if nh:
        out[~pick_l2] = _uniform_lp_half_ball(d, 0.5, nh, rng)

    pts = np.full((n, ambient_dim), 0.5)
    pts[:, :d] += radius * out
    return pts


@dataclass(frozen=True)
class SupportSpec:
    """Generator tag plus its parameters; ``sample`` draws n points per seed."""

    kind: str
    d: int = 1
    ambient_dim: int = 2
    level: int = 7

    def sample(self, n: int, seed: int) -> np.ndarray:
        return generate_support(
            self.kind, n, seed, d=self.d, ambient_dim=self.ambient_dim, level=self.level
        )


def generate_support(
    kind: str,
    n: int,
    seed: int,
    *,
    d: int = 1,
    ambient_dim: int = 2,
    level: int = 7,
) -> np.ndarray:
    """Draw n points in [0,1]^D from one of the built-in supports.

    Kinds: ``sphere`` (d-sphere in D ambient dims), ``koch`` (level-``level``
    Koch polyline, D=2), ``lp_ball_union`` (mixture of d-dimensional l^(1/2)
    and l^2 balls). Deterministic per seed.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if kind == "sphere":
        return sphere_support(d, ambient_dim, n, seed)
    if kind == "koch":
        return koch_support(n, seed, level=level)
    if kind == "lp_ball_union":
        return lp_ball_union_support(d, ambient_dim, n, seed)
    raise ValueError(f"unknown support kind: {kind!r}")


def save_points(path, points) -> None:
    """Write a point cloud as CSV with header x1,...,xD."""
    pts = np.asarray(points, dtype=np.float64)
    header = ",".join(f"x{i + 1}" for i in range(pts.shape[1]))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(header + "\n")
        for row in pts:
            fh.write(",".join(repr(v) for v in row) + "\n")


def load_points(path) -> np.ndarray:
    """Read a point cloud written by ``save_points``."""
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header.startswith("x1"):
            raise ValueError(f"unexpected point-cloud header: {header!r}")
        rows = [
            [float(tok) for tok in line.strip().split(",")]
            for line in fh
            if line.strip()
        ]
    if not rows:
        raise ValueError("point-cloud file has no rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise ValueError("ragged point-cloud rows")
    return np.array(rows, dtype=np.float64)
