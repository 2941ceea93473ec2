"""Hot numeric kernels with numba-compiled and pure-numpy backends.

Three inner loops dominate this engine's runtime: the automaton walk that
scans documents for toponyms, the pairwise great-circle distances behind
the candidate graph, and the power iteration of the random walk. Each has
a numba ``@njit`` build and a numpy/python fallback; the fallback is used
automatically when numba is unavailable and can be forced with

    GEOLINKER_NO_NUMBA=1

``benchmarks/bench_kernels.py`` compares the two paths.

The automaton walk cannot be vectorized (each step depends on the
previous state), so its fallback is the same loop uncompiled; the distance
matrix and power iteration fall back to broadcast numpy expressions.
"""

from __future__ import annotations

import math
import os

import numpy as np

from .geomodel import EARTH_RADIUS_KM

_ENV_DISABLED = os.environ.get("GEOLINKER_NO_NUMBA", "").strip().lower() in {"1", "true", "yes"}

try:
    if _ENV_DISABLED:
        raise ImportError("numba disabled via GEOLINKER_NO_NUMBA")
    from numba import njit

    NUMBA_ENABLED = True
except ImportError:
    NUMBA_ENABLED = False


# ---------------------------------------------------------------------------
# automaton scan
#
# delta:     (n_states, n_alpha) int32 full transition table
# out_start: (n_states + 1,) int32 prefix offsets into out_ids
# out_ids:   int32 pattern ids emitted at each state (failure chain included)
# codes:     int32 mapped codepoints of the normalized text (0 = unknown)


def _ac_count(delta, out_start, codes):
    state = 0
    total = 0
    for i in range(codes.shape[0]):
        state = delta[state, codes[i]]
        total += out_start[state + 1] - out_start[state]
    return total


def _ac_fill(delta, out_start, out_ids, codes, ends, pids):
    state = 0
    k = 0
    for i in range(codes.shape[0]):
        state = delta[state, codes[i]]
        for j in range(out_start[state], out_start[state + 1]):
            ends[k] = i + 1
            pids[k] = out_ids[j]
            k += 1


if NUMBA_ENABLED:
    _ac_count = njit(cache=True)(_ac_count)
    _ac_fill = njit(cache=True)(_ac_fill)


def ac_scan(delta, out_start, out_ids, codes):
    """Run the automaton over ``codes``; return (ends, pattern_ids).

    ``ends[k]`` is the exclusive end offset of match ``k`` in the scanned
    sequence; matches are emitted in scan order. Two passes: count, then
    fill exact-size output arrays.
    """
    codes = np.ascontiguousarray(codes, dtype=np.int32)
    n = _ac_count(delta, out_start, codes)
    ends = np.empty(n, dtype=np.int32)
    pids = np.empty(n, dtype=np.int32)
    if n:
        _ac_fill(delta, out_start, out_ids, codes, ends, pids)
    return ends, pids


# ---------------------------------------------------------------------------
# pairwise great-circle distances


def _haversine_matrix_loops(lons, lats):
    n = lons.shape[0]
    out = np.zeros((n, n), dtype=np.float64)
    for i in range(n):
        lat_i = math.radians(lats[i])
        lon_i = math.radians(lons[i])
        for j in range(i + 1, n):
            lat_j = math.radians(lats[j])
            dlat = lat_j - lat_i
            dlon = math.radians(lons[j]) - lon_i
            h = (
                math.sin(dlat / 2.0) ** 2
                + math.cos(lat_i) * math.cos(lat_j) * math.sin(dlon / 2.0) ** 2
            )
            d = 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))
            out[i, j] = d
            out[j, i] = d
    return out


def _haversine_matrix_numpy(lons, lats):
    lat = np.radians(lats)[:, None]
    lon = np.radians(lons)[:, None]
    dlat = lat.T - lat
    dlon = lon.T - lon
    h = np.sin(dlat / 2.0) ** 2 + np.cos(lat) * np.cos(lat.T) * np.sin(dlon / 2.0) ** 2
    return 2.0 * EARTH_RADIUS_KM * np.arcsin(np.minimum(1.0, np.sqrt(h)))


if NUMBA_ENABLED:
    _haversine_matrix_loops = njit(cache=True)(_haversine_matrix_loops)


def haversine_matrix(lons, lats):
    """Symmetric (n, n) matrix of great-circle distances in kilometers."""
    lons = np.ascontiguousarray(lons, dtype=np.float64)
    lats = np.ascontiguousarray(lats, dtype=np.float64)
    if NUMBA_ENABLED:
        return _haversine_matrix_loops(lons, lats)
    return _haversine_matrix_numpy(lons, lats)


# ---------------------------------------------------------------------------
# restart random walk (power iteration)


def _power_iterate_loops(transposed, restart, alpha, tol, max_iters):
    n = restart.shape[0]
    p = restart.copy()
    nxt = np.empty(n, dtype=np.float64)
    for it in range(max_iters):
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += transposed[i, j] * p[j]
            nxt[i] = alpha * restart[i] + (1.0 - alpha) * acc
        delta = 0.0
        for i in range(n):
            delta += abs(nxt[i] - p[i])
            p[i] = nxt[i]
        if delta < tol:
            return p, it + 1, True
    return p, max_iters, False


def _power_iterate_numpy(transposed, restart, alpha, tol, max_iters):
    p = restart.copy()
    for it in range(max_iters):
        nxt = alpha * restart + (1.0 - alpha) * (transposed @ p)
        delta = float(np.abs(nxt - p).sum())
        p = nxt
        if delta < tol:
            return p, it + 1, True
    return p, max_iters, False


if NUMBA_ENABLED:
    _power_iterate_loops = njit(cache=True)(_power_iterate_loops)


def stationary_distribution(weights, restart, alpha, tol, max_iters):
    """Stationary point of ``p <- alpha*r + (1-alpha)*P'p``.

    ``weights`` is the raw non-negative weight matrix; rows are normalized
    into the transition matrix P, and rows with zero out-weight
    redistribute to the restart vector. Returns (p, iterations, converged).
    """
    w = np.ascontiguousarray(weights, dtype=np.float64)
    r = np.ascontiguousarray(restart, dtype=np.float64)
    row_sums = w.sum(axis=1)
    dangling = row_sums == 0.0
    safe = np.where(dangling, 1.0, row_sums)
    transition = w / safe[:, None]
    if dangling.any():
        transition[dangling, :] = r
    transposed = np.ascontiguousarray(transition.T)
    if NUMBA_ENABLED:
        return _power_iterate_loops(transposed, r, alpha, tol, max_iters)
    return _power_iterate_numpy(transposed, r, alpha, tol, max_iters)
