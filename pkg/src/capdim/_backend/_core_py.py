"""Pure-numpy implementation of the numerical core.

Mirrors the compiled extension ``_core`` and is selected at import time
when the extension is missing or ``CAPDIM_FORCE_FALLBACK`` is set.

Cross-backend contract: scalar outputs (energies, gaps, distances) agree
with the compiled core to 1e-12 relative; integer outputs (iteration
counts, argmin indices, grid-search minimizers) are identical because
both backends scan in index order and break ties toward the lowest
index. Within a single backend, repeated runs are bit-identical.
"""

from __future__ import annotations

import numpy as np

# Row-block size for O(N^2) passes; keeps temporaries ~ _CHUNK * N doubles.
_CHUNK = 512

# Cap on cached kernel columns in the matrix-free solver (~256 MB of rows).
_CACHE_BYTES = 256 * 1024 * 1024


def pair_stats(points):
    """Exact diameter and median nearest-neighbor distance.

    Points must be deduplicated; the nearest neighbor of a point is then
    the nearest other point. Returns (0.0, 0.0) for a singleton.
    """
    pts = np.ascontiguousarray(points, dtype=np.float64)
    n = pts.shape[0]
    if n == 1:
        return 0.0, 0.0
    max_d2 = 0.0
    nn_d2 = np.full(n, np.inf)
    for i0 in range(0, n, _CHUNK):
        block = pts[i0:i0 + _CHUNK]
        d2 = ((block[:, None, :] - pts[None, :, :]) ** 2).sum(axis=-1)
        rows = np.arange(d2.shape[0])
        d2[rows, i0 + rows] = np.inf
        nn_d2[i0:i0 + d2.shape[0]] = d2.min(axis=1)
        d2[rows, i0 + rows] = 0.0
        max_d2 = max(max_d2, float(d2.max()))
    nn = np.sort(np.sqrt(nn_d2))
    mid = n // 2
    median_nn = float(nn[mid]) if n % 2 else float(0.5 * (nn[mid - 1] + nn[mid]))
    return float(np.sqrt(max_d2)), median_nn


def _kernel_from_d2(d2, s, r):
    d = np.sqrt(d2)
    with np.errstate(divide="ignore"):
        vals = np.minimum(1.0, (r / d) ** s)
    vals[d <= r] = 1.0
    return vals


def kernel_matrix(points, s, r):
    """Dense kernel matrix min(1, (r/|x_i-x_j|)^s); diagonal is 1."""
    pts = np.ascontiguousarray(points, dtype=np.float64)
    n = pts.shape[0]
    out = np.empty((n, n))
    for i0 in range(0, n, _CHUNK):
        block = pts[i0:i0 + _CHUNK]
        d2 = ((block[:, None, :] - pts[None, :, :]) ** 2).sum(axis=-1)
        out[i0:i0 + block.shape[0]] = _kernel_from_d2(d2, s, r)
    return out


def kernel_column(points, s, r, j):
    pts = np.asarray(points, dtype=np.float64)
    d2 = ((pts - pts[j]) ** 2).sum(axis=-1)
    return _kernel_from_d2(d2, s, r)


def potential_vector(points, s, r, w):
    """Matrix-free K @ w without storing the N x N matrix."""
    pts = np.ascontiguousarray(points, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    n = pts.shape[0]
    pot = np.empty(n)
    for i0 in range(0, n, _CHUNK):
        block = pts[i0:i0 + _CHUNK]
        d2 = ((block[:, None, :] - pts[None, :, :]) ** 2).sum(axis=-1)
        pot[i0:i0 + block.shape[0]] = _kernel_from_d2(d2, s, r) @ w
    return pot


def _pair_kernel(points, s, r, a, j):
    d = float(np.sqrt(((points[a] - points[j]) ** 2).sum()))
    if d <= r:
        return 1.0
    return min(1.0, (r / d) ** s)


class _ColumnCache:
    """Insertion-ordered cache of kernel columns for the matrix-free path."""

    def __init__(self, points, s, r):
        self.points = points
        self.s = s
        self.r = r
        n = points.shape[0]
        self.max_cols = max(8, _CACHE_BYTES // (8 * n))
        self.cols = {}

    def get(self, j):
        col = self.cols.get(j)
        if col is None:
            col = kernel_column(self.points, self.s, self.r, j)
            if len(self.cols) >= self.max_cols:
                self.cols.pop(next(iter(self.cols)))
            self.cols[j] = col
        return col


def equilibrium_solve(points, s, r, tol, max_iter, matrix_cache_max, start=None):
    """Pairwise conditional-gradient minimizer of w'Kw over the simplex.

    Starts from uniform weights (or a caller-supplied feasible vector).
    Each step moves mass from the maximum-potential support atom onto
    the minimum-potential atom with an exact quadratic line search.
    Stops once the relative duality gap 2*(energy - min potential)/energy,
    recomputed from scratch for the certificate, is <= tol.

    Returns (weights, energy, gap, iterations, converged).
    """
    pts = np.ascontiguousarray(points, dtype=np.float64)
    n = pts.shape[0]
    if n == 1:
        return np.ones(1), 1.0, 0.0, 0, True

    cached = n <= matrix_cache_max
    if cached:
        K = kernel_matrix(pts, s, r)
        col = lambda j: K[:, j]
        pairk = lambda a, j: float(K[a, j])
    else:
        cache = _ColumnCache(pts, s, r)
        col = cache.get
        pairk = lambda a, j: _pair_kernel(pts, s, r, a, j)

    if start is None:
        w = np.full(n, 1.0 / n)
    else:
        w = np.asarray(start, dtype=np.float64).copy()
        w /= w.sum()
    pot = K @ w if cached else potential_vector(pts, s, r, w)
    energy = float(w @ pot)
    iters = 0
    certified = False
    gap = np.inf
    while True:
        j = int(np.argmin(pot))
        gap = 2.0 * (energy - float(pot[j])) / energy
        if gap <= tol:
            if certified:
                converged = True
                break
            w = w / w.sum()
            pot = K @ w if cached else potential_vector(pts, s, r, w)
            energy = float(w @ pot)
            certified = True
            continue
        if iters >= max_iter:
            converged = False
            break
        support = np.flatnonzero(w > 0.0)
        a = int(support[np.argmax(pot[support])])
        kaj = pairk(a, j)
        denom = 2.0 * (1.0 - kaj)
        step_to_zero = float(w[a])
        if denom <= 0.0:
            lam = step_to_zero
        else:
            lam = (float(pot[a]) - float(pot[j])) / denom
            if lam > step_to_zero:
                lam = step_to_zero
        if lam <= 0.0:
            # Stale incremental state; re-certify, then either stop or retry.
            if certified:
                converged = False
                break
            w = w / w.sum()
            pot = K @ w if cached else potential_vector(pts, s, r, w)
            energy = float(w @ pot)
            certified = True
            continue
        energy += 2.0 * lam * (float(pot[j]) - float(pot[a])) + lam * lam * denom
        pot += lam * (col(j) - col(a))
        w[j] += lam
        w[a] -= lam
        iters += 1
        certified = False

    if not converged:
        w = w / w.sum()
        pot = K @ w if cached else potential_vector(pts, s, r, w)
        energy = float(w @ pot)
        gap = 2.0 * (energy - float(pot.min())) / energy
    return w, energy, gap, iters, converged


def simplex_grid_min_energy(K, steps):
    """Exhaustive minimum of w'Kw over the simplex grid {i/steps}.

    Supports up to 4 atoms; enumeration is lexicographic in the leading
    weights and ties keep the first minimizer found.
    """
    K = np.asarray(K, dtype=np.float64)
    n = K.shape[0]
    m = int(steps)
    if n == 1:
        return 1.0, np.ones(1)
    if n == 2:
        i = np.arange(m + 1)
        wi = i / m
        wj = 1.0 - wi
        e = wi * wi + wj * wj + 2.0 * wi * wj * K[0, 1]
        b = int(np.argmin(e))
        return float(e[b]), np.array([wi[b], wj[b]])
    if n == 3:
        best = np.inf
        best_w = None
        j = np.arange(m + 1)
        for i in range(m + 1):
            jj = j[: m - i + 1]
            wi = i / m
            wj = jj / m
            wk = 1.0 - wi - wj
            e = (wi * wi + wj * wj + wk * wk
                 + 2.0 * (wi * wj * K[0, 1] + wi * wk * K[0, 2] + wj * wk * K[1, 2]))
            b = int(np.argmin(e))
            if e[b] < best:
                best = float(e[b])
                best_w = np.array([wi, wj[b], wk[b]])
        return best, best_w
    if n == 4:
        best = np.inf
        best_w = None
        for i in range(m + 1):
            wi = i / m
            rem = m - i
            j = np.arange(rem + 1)
            for jv in j:
                wj = jv / m
                k = np.arange(rem - jv + 1)
                wk = k / m
                wl = 1.0 - wi - wj - wk
                e = (wi * wi + wj * wj + wk * wk + wl * wl
                     + 2.0 * (wi * wj * K[0, 1] + wi * wk * K[0, 2]
                              + wi * wl * K[0, 3] + wj * wk * K[1, 2]
                              + wj * wl * K[1, 3] + wk * wl * K[2, 3]))
                b = int(np.argmin(e))
                if e[b] < best:
                    best = float(e[b])
                    best_w = np.array([wi, wj, wk[b], wl[b]])
        return best, best_w
    raise ValueError("grid search supports at most 4 atoms, got %d" % n)


def max_holder_ratio(src, img, alpha):
    """max over pairs of |img_i - img_j| / |src_i - src_j|^alpha."""
    src = np.ascontiguousarray(src, dtype=np.float64)
    img = np.ascontiguousarray(img, dtype=np.float64)
    n = src.shape[0]
    best = 0.0
    for i0 in range(0, n, _CHUNK):
        sb = src[i0:i0 + _CHUNK]
        ib = img[i0:i0 + _CHUNK]
        ds = np.sqrt(((sb[:, None, :] - src[None, :, :]) ** 2).sum(axis=-1))
        di = np.sqrt(((ib[:, None, :] - img[None, :, :]) ** 2).sum(axis=-1))
        rows = np.arange(sb.shape[0])
        ds[rows, i0 + rows] = np.inf
        ratio = di / ds ** alpha
        best = max(best, float(ratio.max()))
    return best
