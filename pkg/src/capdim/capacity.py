"""Kernel energies, potentials, and equilibrium capacities.

The kernel is the bounded cutoff power law min{1, (r/|x|)^s}: equal to 1
inside the cutoff radius (so coincident points are never singular) and
decaying like |x|^-s outside. The capacity of a cloud is the reciprocal
of the minimal quadratic energy over probability weights on its atoms.

The minimizer is found by pairwise conditional gradient on the simplex
(vertex steps with exact quadratic line search); the stopping rule is
the relative duality gap, recomputed from scratch before returning so
the certificate never relies on incrementally updated quantities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from capdim._backend import core
from capdim.errors import ContractError, ConvergenceError, DomainError

# Above this size the solver stops caching the N x N kernel matrix and
# recomputes kernel columns on demand (insertion-order cache, bounded).
MATRIX_CACHE_MAX = 4000

DEFAULT_TOL = 1e-6
MAX_ITER_FACTOR = 200


@dataclass(frozen=True)
class KernelSpec:
    """Exponent s > 0 and cutoff scale r > 0 of the kernel."""

    s: float
    r: float

    def __post_init__(self):
        if not self.s > 0.0:
            raise DomainError("kernel exponent s must be positive")
        if not self.r > 0.0:
            raise DomainError("kernel scale r must be positive")


@dataclass(frozen=True)
class WeightVector:
    """Probability weights aligned with a cloud's atoms."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.ascontiguousarray(self.weights, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ContractError("weights must be a nonempty 1-d array")
        if w.min() < 0.0:
            raise ContractError("weights must be nonnegative")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise ContractError("weights must sum to 1 within 1e-12")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return self.weights.size


@dataclass(frozen=True)
class EquilibriumResult:
    weights: WeightVector
    energy: float
    capacity: float
    gap: float
    iterations: int


def kernel_value(k, x):
    """min{1, (r/|x|)^s}; equals 1 whenever |x| <= r, including x = 0."""
    d = float(np.linalg.norm(np.asarray(x, dtype=np.float64)))
    if d <= k.r:
        return 1.0
    return min(1.0, (k.r / d) ** k.s)


def _check_aligned(p, w):
    if len(w) != p.count:
        raise ContractError("weight vector length %d does not match %d atoms"
                            % (len(w), p.count))


def atom_potentials(p, w, k):
    """Potential of the weighted cloud at each of its own atoms."""
    _check_aligned(p, w)
    return core.potential_vector(p.points, k.s, k.r, w.weights)


def potential(p, w, k, x):
    """Potential sum_j w_j * phi(x - p_j) at an arbitrary point x."""
    _check_aligned(p, w)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (p.ambient_dim,):
        raise ContractError("x must have the cloud's ambient dimension")
    d = np.sqrt(((p.points - x) ** 2).sum(axis=1))
    with np.errstate(divide="ignore"):
        vals = np.minimum(1.0, (k.r / d) ** k.s)
    vals[d <= k.r] = 1.0
    return float(w.weights @ vals)


def energy(p, w, k):
    """Double sum of kernel values; matrix-free, O(N^2) time, O(N) memory."""
    pots = atom_potentials(p, w, k)
    return float(w.weights @ pots)


def equilibrium(p, k, tol=DEFAULT_TOL, max_iter=None, start=None):
    """Energy-minimizing probability weights and capacity of a cloud.

    On success the weights satisfy the discrete equilibrium certificate:
    every atom's potential is >= energy * (1 - tol), with equality
    (within tol * energy) on atoms carrying weight. Raises
    ConvergenceError carrying the best iterate if max_iter (default
    200 * N pairwise steps) is hit first.

    `start` optionally warm-starts the solver from a feasible weight
    vector (used by scale sweeps); the certificate does not depend on
    the starting point.
    """
    if not 0.0 < tol < 1.0:
        raise DomainError("tol must lie in (0, 1)")
    if max_iter is None:
        max_iter = MAX_ITER_FACTOR * p.count
    start_w = None if start is None else np.asarray(start, dtype=np.float64)
    w, en, gap, iters, converged = core.equilibrium_solve(
        p.points, k.s, k.r, tol, int(max_iter), MATRIX_CACHE_MAX,
        start_w)
    result = EquilibriumResult(weights=WeightVector(w), energy=en,
                               capacity=1.0 / en, gap=gap, iterations=iters)
    if not converged:
        raise ConvergenceError(
            "equilibrium gap %.3g still above tol %.3g after %d iterations"
            % (gap, tol, iters), result=result)
    return result


def certificate_gap(p, k, w):
    """Relative duality gap 2*(energy - min atom potential)/energy.

    Zero exactly when w is optimal on the discrete atom set.
    """
    pots = atom_potentials(p, w, k)
    en = float(w.weights @ pots)
    return max(0.0, 2.0 * (en - float(pots.min())) / en)
