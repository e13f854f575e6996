"""Finite point clouds standing in for compact sets.

Generators are deterministic, all values are immutable after
construction, and every cloud respects a global point budget (default
20000) so that downstream O(N^2) passes stay desk-sized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from capdim._backend import core
from capdim.errors import ContractError, DomainError, ParseError, SizeError

POINT_BUDGET = 20000


def _check_budget(count, budget, what):
    limit = POINT_BUDGET if budget is None else int(budget)
    if count > limit:
        raise SizeError("%s would produce %d points, over the budget of %d"
                        % (what, count, limit))


@dataclass(frozen=True)
class PointSet:
    """Deduplicated, nonempty cloud of points in R^n.

    ``points`` is an (N, n) float64 array, read-only after construction.
    Exact coordinate duplicates are merged, keeping first occurrence
    order.
    """

    points: np.ndarray
    label: str = ""

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] == 0 or pts.shape[1] == 0:
            raise ContractError("points must be a nonempty (N, n) array")
        if not np.isfinite(pts).all():
            raise ContractError("points must have finite coordinates")
        _, first = np.unique(pts, axis=0, return_index=True)
        if len(first) != pts.shape[0]:
            pts = pts[np.sort(first)]
        pts = np.ascontiguousarray(pts)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def ambient_dim(self):
        return self.points.shape[1]

    @property
    def count(self):
        return self.points.shape[0]


@dataclass(frozen=True)
class ResolutionStats:
    diameter: float
    median_nn_dist: float
    count: int


@dataclass(frozen=True)
class SimilarityMap:
    """x -> ratio * rotation @ x + translation with ratio in (0, 1)."""

    ratio: float
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        if not 0.0 < self.ratio < 1.0:
            raise DomainError("similarity ratio must lie in (0, 1)")
        rot = np.asarray(self.rotation, dtype=np.float64)
        trans = np.asarray(self.translation, dtype=np.float64)
        if rot.ndim != 2 or rot.shape[0] != rot.shape[1]:
            raise ContractError("rotation must be a square matrix")
        if trans.shape != (rot.shape[0],):
            raise ContractError("translation length must match rotation size")
        if np.abs(rot.T @ rot - np.eye(rot.shape[0])).max() > 1e-12:
            raise ContractError("rotation must be orthonormal to 1e-12")
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", trans)

    def apply(self, pts):
        return self.ratio * (pts @ self.rotation.T) + self.translation


@dataclass(frozen=True)
class IfsSystem:
    maps: tuple
    ambient_dim: int

    def __post_init__(self):
        maps = tuple(self.maps)
        if not maps:
            raise ContractError("an IFS needs at least one map")
        for m in maps:
            if m.rotation.shape[0] != self.ambient_dim:
                raise ContractError("map dimension differs from ambient_dim")
        object.__setattr__(self, "maps", maps)


def gen_grid(n, side_count, budget=None):
    """Lattice of side_count^n evenly spaced points on the unit cube."""
    if n < 1 or side_count < 2:
        raise DomainError("need n >= 1 and side_count >= 2")
    _check_budget(side_count ** n, budget, "gen_grid")
    axis = np.linspace(0.0, 1.0, side_count)
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    pts = np.column_stack([m.ravel() for m in mesh])
    return PointSet(pts, label="grid(n=%d, side=%d)" % (n, side_count))


def gen_cantor(ratio, level, budget=None):
    """Left endpoints of the level-`level` intervals of the two-map
    self-similar set {x -> ratio*x, x -> ratio*x + (1-ratio)} on [0, 1].

    ratio must lie in (0, 1/2]; ratio = 1/2 degenerates to a uniform
    grid. Ordering is lexicographic in map indices.
    """
    if not 0.0 < ratio <= 0.5:
        raise DomainError("cantor ratio must lie in (0, 1/2]")
    if level < 0:
        raise DomainError("level must be >= 0")
    _check_budget(2 ** level, budget, "gen_cantor")
    pts = np.array([0.0])
    for _ in range(level):
        pts = np.concatenate([ratio * pts, ratio * pts + (1.0 - ratio)])
    return PointSet(pts[:, None], label="cantor(ratio=%g, level=%d)" % (ratio, level))


def gen_ifs(system, depth, seed_point, budget=None):
    """All depth-fold map compositions applied to seed_point,
    lexicographic in map indices (outermost map is the major key)."""
    if depth < 0:
        raise DomainError("depth must be >= 0")
    _check_budget(len(system.maps) ** depth, budget, "gen_ifs")
    seed = np.asarray(seed_point, dtype=np.float64)
    if seed.shape != (system.ambient_dim,):
        raise ContractError("seed_point must have length ambient_dim")
    pts = seed[None, :]
    for _ in range(depth):
        pts = np.concatenate([m.apply(pts) for m in system.maps])
    return PointSet(pts, label="ifs(maps=%d, depth=%d)" % (len(system.maps), depth))


def product(a, b, budget=None):
    """Cartesian product cloud in R^(dim a + dim b)."""
    _check_budget(a.count * b.count, budget, "product")
    left = np.repeat(a.points, b.count, axis=0)
    right = np.tile(b.points, (a.count, 1))
    return PointSet(np.hstack([left, right]),
                    label="(%s) x (%s)" % (a.label, b.label))


def resolution(p):
    """Exact diameter, median nearest-neighbor distance, and count."""
    cached = getattr(p, "_resolution_cache", None)
    if cached is not None:
        return cached
    diam, med = core.pair_stats(p.points)
    stats = ResolutionStats(diameter=diam, median_nn_dist=med, count=p.count)
    object.__setattr__(p, "_resolution_cache", stats)
    return stats


def save_csv(p, path):
    """One point per line, comma-separated, 17 significant digits."""
    with open(path, "w") as fh:
        if p.label:
            fh.write("# label: %s\n" % p.label)
        for row in p.points:
            fh.write(",".join("%.17g" % x for x in row) + "\n")


def load_csv(path, label=None):
    """Inverse of save_csv; '#' lines are comments, blank lines skipped."""
    rows = []
    width = None
    file_label = ""
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("label:") and not file_label:
                    file_label = body[len("label:"):].strip()
                continue
            fields = line.split(",")
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise ParseError("expected %d fields, found %d"
                                 % (width, len(fields)), line=lineno)
            try:
                rows.append([float(f) for f in fields])
            except ValueError:
                raise ParseError("non-numeric field in %r" % line, line=lineno)
    if not rows:
        raise ParseError("no data rows in %s" % path)
    return PointSet(np.asarray(rows), label=file_label if label is None else label)
