"""Mesh-cube covering counts and box-dimension estimates.

Covering numbers are counted over half-open coordinate mesh cubes of
diameter r (side r/sqrt(n)): a point x lands in the cube indexed by
floor(x * sqrt(n) / r) componentwise. Computed index values within
1e-12 of an integer boundary are left to floor, i.e. they stay in the
lower cell unless they reach the boundary exactly (the tie rule: the
exact boundary value belongs to the upper, half-open cell).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from capdim.errors import ContractError, DomainError, ResolutionError
from capdim.pointcloud import resolution

GUARD_FACTOR = 8.0
SLOPE_WINDOW = 3


@dataclass(frozen=True)
class ScaleGrid:
    """Dyadic scales r_max * 2^-i for i = 0..levels-1."""

    r_max: float
    levels: int

    def __post_init__(self):
        if self.r_max <= 0.0:
            raise DomainError("r_max must be positive")
        if self.levels < 2:
            raise DomainError("need at least 2 levels")

    @property
    def scales(self):
        return self.r_max * 2.0 ** -np.arange(self.levels)


@dataclass(frozen=True)
class CoverCount:
    r: float
    count: int


@dataclass(frozen=True)
class DimensionEstimate:
    """Fitted log-log slope with window min/max bounds.

    slope is the OLS fit; lower/upper are the extremes of two-point
    slopes over the finest `window` consecutive scale pairs, widened if
    necessary so that lower <= slope <= upper always holds.
    """

    slope: float
    lower: float
    upper: float
    stderr: float
    window: int


def fit_loglog(neg_log_r, log_values, window=SLOPE_WINDOW, clip_hi=None):
    """OLS slope of log_values against neg_log_r plus windowed bounds."""
    x = np.asarray(neg_log_r, dtype=np.float64)
    y = np.asarray(log_values, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1 or len(x) < 2:
        raise ContractError("need matching 1-d arrays with >= 2 entries")
    xc = x - x.mean()
    sxx = float(xc @ xc)
    slope = float(xc @ (y - y.mean())) / sxx
    resid = y - y.mean() - slope * xc
    if len(x) > 2:
        stderr = math.sqrt(float(resid @ resid) / (len(x) - 2) / sxx)
    else:
        stderr = 0.0
    pair = (y[1:] - y[:-1]) / (x[1:] - x[:-1])
    tail = pair[-window:]
    lo = float(tail.min())
    hi = float(tail.max())
    lo = max(lo, 0.0)
    slope = max(slope, 0.0)
    if clip_hi is not None:
        lo = min(lo, clip_hi)
        hi = min(hi, clip_hi)
        slope = min(slope, clip_hi)
    return DimensionEstimate(slope=slope, lower=min(lo, slope),
                             upper=max(hi, slope), stderr=stderr,
                             window=min(window, len(pair)))


def check_guard(p, grid, guard_factor=GUARD_FACTOR):
    """Raise ResolutionError for any scale under guard_factor * median_nn."""
    guard = guard_factor * resolution(p).median_nn_dist
    for r in grid.scales:
        if r < guard:
            raise ResolutionError(
                "scale %.6g is below the resolution guard %.6g "
                "(%g x median nearest-neighbor distance)" % (r, guard, guard_factor),
                scale=float(r))


def mesh_count(p, r):
    """Number of half-open mesh cubes of diameter r meeting the cloud."""
    if r <= 0.0:
        raise DomainError("scale r must be positive")
    factor = math.sqrt(p.ambient_dim) / r
    idx = np.floor(p.points * factor).astype(np.int64)
    count = np.unique(idx, axis=0).shape[0]
    return CoverCount(r=float(r), count=int(count))


def box_dimension(p, grid, guard_factor=GUARD_FACTOR):
    """Box-dimension estimate from mesh counts over a dyadic scale grid."""
    if grid.levels < 4:
        raise ContractError("box_dimension needs at least 4 levels")
    check_guard(p, grid, guard_factor)
    scales = grid.scales
    counts = np.array([mesh_count(p, r).count for r in scales], dtype=np.float64)
    return fit_loglog(-np.log(scales), np.log(counts))
