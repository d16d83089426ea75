"""Compiled inner loops for the SIC family.

Sets of not-yet-detected layers are bitmasks over the columns of ``H``.
Symbols are carried as alphabet indices (``-1`` = undetected). Each
kernel writes three counters into ``stats``: subroutine calls (SAC
triggers), deepest nesting level reached, candidate residual evaluations.
"""

import numpy as np
from numba import njit, types
from numba.typed import Dict

from ..numerics import cholesky_factor, cholesky_solve

SAC_TRIGGERS, MAX_DEPTH, CANDIDATE_EVALS = 0, 1, 2


@njit(cache=True)
def cdot(a, b):
    """``a^H b`` for 1-D complex arrays of any stride."""
    acc = 0j
    for i in range(a.shape[0]):
        acc += np.conj(a[i]) * b[i]
    return acc


@njit(cache=True)
def nearest_index(z, points):
    best = 0
    best_d = np.inf
    for m in range(points.shape[0]):
        dz = z - points[m]
        d = dz.real * dz.real + dz.imag * dz.imag
        if d < best_d:
            best_d = d
            best = m
    return best


@njit(cache=True)
def neighbor_indices(z, points, s):
    d = np.empty(points.shape[0])
    for m in range(points.shape[0]):
        dz = z - points[m]
        d[m] = dz.real * dz.real + dz.imag * dz.imag
    return np.argsort(d, kind="mergesort")[:s]


@njit(cache=True)
def solve_columns(H, mask, reg):
    """Column k of the result is ``(H_m H_m^H + reg I)^{-1} h_k``.

    ``H_m`` keeps only the columns flagged in ``mask``.
    """
    nr, nt = H.shape
    R = np.zeros((nr, nr), dtype=np.complex128)
    for i in range(nr):
        R[i, i] = reg
    for k in range(nt):
        if (mask >> k) & 1:
            for a in range(nr):
                hk = H[a, k]
                for b in range(nr):
                    R[a, b] += hk * np.conj(H[b, k])
    L, pivot = cholesky_factor(R)
    if pivot >= 0:
        raise ValueError("filter covariance is not positive definite")
    return cholesky_solve(L, H)


@njit(cache=True)
def leverages(H, mask, sigma2):
    """``h_k^H R^{-1} h_k`` for every column, ``R = H_m H_m^H + sigma2 I``."""
    X = solve_columns(H, mask, sigma2)
    nt = H.shape[1]
    out = np.empty(nt)
    for k in range(nt):
        out[k] = cdot(H[:, k], X[:, k]).real
    return out


@njit(cache=True)
def residual_sq(y, H, points, x):
    r = y.copy()
    for k in range(H.shape[1]):
        r -= H[:, k] * points[x[k]]
    return cdot(r, r).real


@njit(cache=True)
def suffix_filters(H, reg):
    nr, nt = H.shape
    W = np.empty((nr, nt), dtype=np.complex128)
    for i in range(nt):
        mask = ((1 << nt) - 1) & ~((1 << i) - 1)
        W[:, i] = solve_columns(H, mask, reg)[:, i]
    return W


@njit(cache=True)
def sic_pass(y, H, points, reg, order):
    """Conventional SIC along ``order`` with MMSE nulling of the remaining layers."""
    nt = H.shape[1]
    x = -np.ones(nt, dtype=np.int64)
    y_cur = y.copy()
    mask = (1 << nt) - 1
    for pos in range(nt):
        k = order[pos]
        w = solve_columns(H, mask, reg)[:, k]
        q = nearest_index(cdot(w, y_cur), points)
        x[k] = q
        y_cur = y_cur - H[:, k] * points[q]
        mask &= ~(1 << k)
    return x


@njit(cache=True)
def mf_sic(y, H, points, reg, d_th, n_cand, stats, rec_layer, rec_syms, rec_res):
    """Multiple-feedback SIC: one level of branching, plain SIC inside each branch."""
    nt = H.shape[1]
    W = suffix_filters(H, reg)
    x = -np.ones(nt, dtype=np.int64)
    y_cur = y.copy()
    slot = 0
    for i in range(nt):
        z = cdot(W[:, i], y_cur)
        q = nearest_index(z, points)
        if abs(z - points[q]) > d_th:
            stats[SAC_TRIGGERS] += 1
            stats[MAX_DEPTH] = max(stats[MAX_DEPTH], 1)
            seeds = neighbor_indices(z, points, n_cand)
            best = np.inf
            for j in range(n_cand):
                xb = x.copy()
                xb[i] = seeds[j]
                yk = y_cur - H[:, i] * points[seeds[j]]
                for k in range(i + 1, nt):
                    qk = nearest_index(cdot(W[:, k], yk), points)
                    xb[k] = qk
                    yk = yk - H[:, k] * points[qk]
                res = residual_sq(y, H, points, xb)
                stats[CANDIDATE_EVALS] += 1
                rec_syms[slot, j, :] = xb
                rec_res[slot, j] = res
                if res < best:
                    best = res
                    q = seeds[j]
            rec_layer[slot] = i
            slot += 1
        x[i] = q
        y_cur = y_cur - H[:, i] * points[q]
    return x


@njit(cache=True)
def new_caches():
    wcache = Dict.empty(key_type=types.int64, value_type=types.complex128[:, ::1])
    lcache = Dict.empty(key_type=types.int64, value_type=types.float64[::1])
    return wcache, lcache


@njit(cache=True)
def next_layer(H, y_cur, mask, lev_mask, ordered, reg, sigma2, wcache, lcache):
    """Pick the next layer to detect among ``mask`` and return ``(k, z_k)``.

    Unordered: lowest remaining index. Ordered: largest LLR metric
    ``|z_k| / (1 - h_k^H R^{-1} h_k)``, ties to the lower index.
    """
    if mask in wcache:
        W = wcache[mask]
    else:
        W = solve_columns(H, mask, reg)
        wcache[mask] = W
    nt = H.shape[1]
    if not ordered:
        for k in range(nt):
            if (mask >> k) & 1:
                return k, cdot(W[:, k], y_cur)
    if lev_mask in lcache:
        lev = lcache[lev_mask]
    else:
        lev = leverages(H, lev_mask, sigma2)
        lcache[lev_mask] = lev
    best_k = -1
    best_v = -1.0
    best_z = 0j
    for k in range(nt):
        if (mask >> k) & 1:
            z = cdot(W[:, k], y_cur)
            g = 1.0 - lev[k]
            if abs(g) < 1e-12:
                raise ValueError("degenerate leverage in LLR ordering")
            v = abs(z) / g
            if v > best_v:
                best_v = v
                best_k = k
                best_z = z
    return best_k, best_z


# the recursive search and its callers are compiled per process: numba
# cannot reload recursive functions from the on-disk cache
@njit
def branch_search(y0, H, points, x, y_cur, mask, full_mask, j, zj, depth, level,
                  reg, sigma2, d_th, n_cand, ordered, fixed_r, wcache, lcache,
                  stats, rec_syms, rec_res, slot):
    """Recursive multiple-feedback search for layer ``j``.

    Seeds ``n_cand`` branches with the points nearest ``zj``, completes each
    branch layer by layer (re-running the reliability test and recursing
    while ``depth > 0``), and returns the seed of the branch whose full
    candidate vector minimises ``||y0 - H x||^2``.
    """
    stats[SAC_TRIGGERS] += 1
    if level > stats[MAX_DEPTH]:
        stats[MAX_DEPTH] = level
    seeds = neighbor_indices(zj, points, n_cand)
    best_seed = seeds[0]
    best_res = np.inf
    for b in range(n_cand):
        xb = x.copy()
        xb[j] = seeds[b]
        yb = y_cur - H[:, j] * points[seeds[b]]
        mb = mask & ~(1 << j)
        while mb != 0:
            lev_mask = full_mask if fixed_r else mb
            k, zk = next_layer(H, yb, mb, lev_mask, ordered, reg, sigma2, wcache, lcache)
            q = nearest_index(zk, points)
            if depth > 0 and abs(zk - points[q]) > d_th:
                q = branch_search(y0, H, points, xb, yb, mb, full_mask, k, zk, depth - 1,
                                  level + 1, reg, sigma2, d_th, n_cand, ordered, fixed_r,
                                  wcache, lcache, stats, rec_syms, rec_res, -1)
            xb[k] = q
            yb = yb - H[:, k] * points[q]
            mb &= ~(1 << k)
        res = residual_sq(y0, H, points, xb)
        stats[CANDIDATE_EVALS] += 1
        if slot >= 0:
            rec_syms[slot, b, :] = xb
            rec_res[slot, b] = res
        if res < best_res:
            best_res = res
            best_seed = seeds[b]
    return best_seed


@njit
def imf_sic(y, H, points, reg, sigma2, d_th, n_cand, max_depth, ordered, fixed_r,
            stats, rec_layer, rec_syms, rec_res):
    """Improved MF-SIC (``ordered=False``) or its LLR-ordered variant.

    ``max_depth`` is the nesting budget L: an unreliable outer layer opens a
    search at level 1, and inner unreliable layers may nest down to level L.
    """
    nt = H.shape[1]
    full = (1 << nt) - 1
    wcache, lcache = new_caches()
    x = -np.ones(nt, dtype=np.int64)
    y_cur = y.copy()
    mask = full
    slot = 0
    while mask != 0:
        lev_mask = full if fixed_r else mask
        k, z = next_layer(H, y_cur, mask, lev_mask, ordered, reg, sigma2, wcache, lcache)
        q = nearest_index(z, points)
        if abs(z - points[q]) > d_th:
            q = branch_search(y, H, points, x, y_cur, mask, full, k, z, max_depth - 1, 1,
                              reg, sigma2, d_th, n_cand, ordered, fixed_r, wcache, lcache,
                              stats, rec_syms, rec_res, slot)
            rec_layer[slot] = k
            slot += 1
        x[k] = q
        y_cur = y_cur - H[:, k] * points[q]
        mask &= ~(1 << k)
    return x


@njit
def subroutine_entry(y, H, points, j, zj, depth, reg, sigma2, d_th, n_cand, ordered,
                     fixed_r, stats, rec_syms, rec_res):
    """Run one branch search on a partial system where every column is undetected."""
    nt = H.shape[1]
    full = (1 << nt) - 1
    wcache, lcache = new_caches()
    x = -np.ones(nt, dtype=np.int64)
    return branch_search(y, H, points, x, y.copy(), full, full, j, zj, depth, 1, reg,
                         sigma2, d_th, n_cand, ordered, fixed_r, wcache, lcache, stats,
                         rec_syms, rec_res, 0)
