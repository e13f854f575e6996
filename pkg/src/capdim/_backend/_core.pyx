# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled numerical core.

Same routines and semantics as ``_core_py``: index-order scans, ties to
the lowest index, float64 accumulation. See that module for the
cross-backend agreement contract.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, pow, sqrt

cnp.import_array()


cdef inline double _dist(const double[:, ::1] pts, Py_ssize_t i, Py_ssize_t j) nogil:
    cdef double acc = 0.0, d
    cdef Py_ssize_t k
    for k in range(pts.shape[1]):
        d = pts[i, k] - pts[j, k]
        acc += d * d
    return sqrt(acc)


cdef inline double _phi(double dist, double s, double r) nogil:
    if dist <= r:
        return 1.0
    cdef double v = pow(r / dist, s)
    if v > 1.0:
        return 1.0
    return v


def pair_stats(points):
    """Exact diameter and median nearest-neighbor distance."""
    cdef double[:, ::1] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0]
    if n == 1:
        return 0.0, 0.0
    nn = np.full(n, np.inf)
    cdef double[::1] nnv = nn
    cdef double best = 0.0, d
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                d = _dist(pts, i, j)
                if d > best:
                    best = d
                if d < nnv[i]:
                    nnv[i] = d
                if d < nnv[j]:
                    nnv[j] = d
    srt = np.sort(nn)
    cdef Py_ssize_t mid = n // 2
    if n % 2:
        median_nn = float(srt[mid])
    else:
        median_nn = float(0.5 * (srt[mid - 1] + srt[mid]))
    return best, median_nn


def kernel_matrix(points, double s, double r):
    """Dense kernel matrix min(1, (r/|x_i-x_j|)^s); diagonal is 1."""
    cdef double[:, ::1] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0]
    out = np.empty((n, n))
    cdef double[:, ::1] K = out
    cdef double v
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            K[i, i] = 1.0
            for j in range(i + 1, n):
                v = _phi(_dist(pts, i, j), s, r)
                K[i, j] = v
                K[j, i] = v
    return out


def kernel_column(points, double s, double r, Py_ssize_t j):
    cdef double[:, ::1] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0]
    out = np.empty(n)
    cdef double[::1] col = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            col[i] = _phi(_dist(pts, i, j), s, r)
    return out


def potential_vector(points, double s, double r, w):
    """Matrix-free K @ w without storing the N x N matrix."""
    cdef double[:, ::1] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0]
    out = np.empty(n)
    cdef double[::1] pot = out
    cdef double acc
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += wv[j] * _phi(_dist(pts, i, j), s, r)
            pot[i] = acc
    return out


cdef class _ColumnCache:
    """Insertion-ordered cache of kernel columns for the matrix-free path."""
    cdef double[:, ::1] pts
    cdef double s, r
    cdef Py_ssize_t max_cols
    cdef object cols

    def __init__(self, double[:, ::1] pts, double s, double r):
        self.pts = pts
        self.s = s
        self.r = r
        self.max_cols = max(8, (256 * 1024 * 1024) // (8 * pts.shape[0]))
        self.cols = {}

    cdef double[::1] get(self, Py_ssize_t j):
        col = self.cols.get(j)
        if col is None:
            col = kernel_column(self.pts, self.s, self.r, j)
            if len(self.cols) >= self.max_cols:
                self.cols.pop(next(iter(self.cols)))
            self.cols[j] = col
        return col


def equilibrium_solve(points, double s, double r, double tol,
                      Py_ssize_t max_iter, Py_ssize_t matrix_cache_max,
                      start=None):
    """Pairwise conditional-gradient minimizer of w'Kw over the simplex.

    Same algorithm as the fallback: uniform start (or caller-supplied
    feasible vector), pairwise steps from the max-potential support atom
    to the min-potential atom with exact line search, from-scratch
    recertification of the duality gap before reporting convergence.
    Returns (weights, energy, gap, iterations, converged).
    """
    cdef double[:, ::1] pts = np.ascontiguousarray(points, dtype=np.float64)
    cdef Py_ssize_t n = pts.shape[0]
    if n == 1:
        return np.ones(1), 1.0, 0.0, 0, True

    cdef bint cached = n <= matrix_cache_max
    cdef double[:, ::1] K = None
    cdef _ColumnCache cache = None
    if cached:
        K = kernel_matrix(pts, s, r)
    else:
        cache = _ColumnCache(pts, s, r)

    if start is None:
        w_arr = np.full(n, 1.0 / n)
    else:
        w_arr = np.asarray(start, dtype=np.float64).copy()
        w_arr /= w_arr.sum()
    cdef double[::1] w = w_arr
    cdef double[::1] pot
    if cached:
        pot = np.asarray(K) @ w_arr
    else:
        pot = potential_vector(pts, s, r, w_arr)

    cdef double energy = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        energy += w[i] * pot[i]

    cdef Py_ssize_t iters = 0, j, a
    cdef bint certified = False, converged = False
    cdef double gap = INFINITY, pj, pa, kaj, denom, lam, wsum
    cdef double[::1] colj, cola

    while True:
        j = 0
        pj = pot[0]
        for i in range(1, n):
            if pot[i] < pj:
                pj = pot[i]
                j = i
        gap = 2.0 * (energy - pj) / energy
        if gap <= tol:
            if certified:
                converged = True
                break
            wsum = 0.0
            for i in range(n):
                wsum += w[i]
            for i in range(n):
                w[i] /= wsum
            if cached:
                pot = np.asarray(K) @ w_arr
            else:
                pot = potential_vector(pts, s, r, w_arr)
            energy = 0.0
            for i in range(n):
                energy += w[i] * pot[i]
            certified = True
            continue
        if iters >= max_iter:
            converged = False
            break
        a = -1
        pa = -INFINITY
        for i in range(n):
            if w[i] > 0.0 and pot[i] > pa:
                pa = pot[i]
                a = i
        if cached:
            kaj = K[a, j]
        else:
            kaj = _phi(_dist(pts, a, j), s, r)
        denom = 2.0 * (1.0 - kaj)
        if denom <= 0.0:
            lam = w[a]
        else:
            lam = (pa - pj) / denom
            if lam > w[a]:
                lam = w[a]
        if lam <= 0.0:
            if certified:
                converged = False
                break
            wsum = 0.0
            for i in range(n):
                wsum += w[i]
            for i in range(n):
                w[i] /= wsum
            if cached:
                pot = np.asarray(K) @ w_arr
            else:
                pot = potential_vector(pts, s, r, w_arr)
            energy = 0.0
            for i in range(n):
                energy += w[i] * pot[i]
            certified = True
            continue
        energy += 2.0 * lam * (pj - pa) + lam * lam * denom
        if cached:
            for i in range(n):
                pot[i] += lam * (K[i, j] - K[i, a])
        else:
            colj = cache.get(j)
            cola = cache.get(a)
            for i in range(n):
                pot[i] += lam * (colj[i] - cola[i])
        w[j] += lam
        w[a] -= lam
        iters += 1
        certified = False

    if not converged:
        wsum = 0.0
        for i in range(n):
            wsum += w[i]
        for i in range(n):
            w[i] /= wsum
        if cached:
            pot = np.asarray(K) @ w_arr
        else:
            pot = potential_vector(pts, s, r, w_arr)
        energy = 0.0
        for i in range(n):
            energy += w[i] * pot[i]
        pj = pot[0]
        for i in range(1, n):
            if pot[i] < pj:
                pj = pot[i]
        gap = 2.0 * (energy - pj) / energy
    return w_arr, energy, gap, iters, converged


def simplex_grid_min_energy(K, Py_ssize_t steps):
    """Exhaustive minimum of w'Kw over the simplex grid {i/steps}, n <= 4."""
    Kc = np.ascontiguousarray(K, dtype=np.float64)
    cdef double[:, ::1] km = Kc
    cdef Py_ssize_t n = km.shape[0]
    cdef Py_ssize_t m = steps
    if n == 1:
        return 1.0, np.ones(1)
    cdef double best = INFINITY, e, wi, wj, wk, wl
    cdef double k01, k02, k03, k12, k13, k23, ci, cij
    cdef Py_ssize_t i, j, k
    cdef Py_ssize_t bi = 0, bj = 0, bk = 0
    if n == 2:
        k01 = km[0, 1]
        with nogil:
            for i in range(m + 1):
                wi = <double> i / m
                wj = 1.0 - wi
                e = wi * wi + wj * wj + 2.0 * wi * wj * k01
                if e < best:
                    best = e
                    bi = i
        wi = <double> bi / m
        return best, np.array([wi, 1.0 - wi])
    if n == 3:
        k01 = km[0, 1]
        k02 = km[0, 2]
        k12 = km[1, 2]
        with nogil:
            for i in range(m + 1):
                wi = <double> i / m
                for j in range(m - i + 1):
                    wj = <double> j / m
                    wk = 1.0 - wi - wj
                    e = (wi * wi + wj * wj + wk * wk
                         + 2.0 * (wi * wj * k01 + wi * wk * k02 + wj * wk * k12))
                    if e < best:
                        best = e
                        bi = i
                        bj = j
        wi = <double> bi / m
        wj = <double> bj / m
        return best, np.array([wi, wj, 1.0 - wi - wj])
    if n == 4:
        k01 = km[0, 1]
        k02 = km[0, 2]
        k03 = km[0, 3]
        k12 = km[1, 2]
        k13 = km[1, 3]
        k23 = km[2, 3]
        with nogil:
            for i in range(m + 1):
                wi = <double> i / m
                for j in range(m - i + 1):
                    wj = <double> j / m
                    for k in range(m - i - j + 1):
                        wk = <double> k / m
                        wl = 1.0 - wi - wj - wk
                        e = (wi * wi + wj * wj + wk * wk + wl * wl
                             + 2.0 * (wi * wj * k01 + wi * wk * k02
                                      + wi * wl * k03 + wj * wk * k12
                                      + wj * wl * k13 + wk * wl * k23))
                        if e < best:
                            best = e
                            bi = i
                            bj = j
                            bk = k
        wi = <double> bi / m
        wj = <double> bj / m
        wk = <double> bk / m
        return best, np.array([wi, wj, wk, 1.0 - wi - wj - wk])
    raise ValueError("grid search supports at most 4 atoms, got %d" % n)


def max_holder_ratio(src, img, double alpha):
    """max over pairs of |img_i - img_j| / |src_i - src_j|^alpha."""
    cdef double[:, ::1] sp = np.ascontiguousarray(src, dtype=np.float64)
    cdef double[:, ::1] ip = np.ascontiguousarray(img, dtype=np.float64)
    cdef Py_ssize_t n = sp.shape[0]
    cdef double best = 0.0, ratio
    cdef Py_ssize_t i, j
    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                ratio = _dist(ip, i, j) / pow(_dist(sp, i, j), alpha)
                if ratio > best:
                    best = ratio
    return best
