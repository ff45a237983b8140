"""Validity-gated median filtering of DOA planes.

The filter recomputes each surviving bin's azimuth as the circular median of
the valid bins in its (k, n) vicinity and its elevation as the ordinary
median, excluding the bin itself.  The circular median is the *sample*
minimizing the summed circular distance, ties to the smaller angle.

The per-bin work is the hot loop of the whole front-end (vicinities are
41 x 41 at the default radii), so it is JIT-compiled when numba is present;
a pure-numpy fallback with identical semantics is kept for environments
without it and as a cross-check.
"""

from __future__ import annotations

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        return wrap


PI = np.pi
TWO_PI = 2.0 * np.pi
TIE_TOL = 1e-12  # keep in sync with circstats.MEDIAN_TIE_TOL


@njit(cache=True)
def _median_pass(az, el, valid, keep, rk, rn, az_out, el_out):
    n_k, n_n = az.shape
    max_pool = (2 * rk + 1) * (2 * rn + 1)
    pool_az = np.empty(max_pool)
    pool_el = np.empty(max_pool)
    sums = np.empty(max_pool)
    for k in range(n_k):
        k0 = max(0, k - rk)
        k1 = min(n_k, k + rk + 1)
        for n in range(n_n):
            if not keep[k, n]:
                continue
            n0 = max(0, n - rn)
            n1 = min(n_n, n + rn + 1)
            v = 0
            for kk in range(k0, k1):
                for nn in range(n0, n1):
                    if valid[kk, nn] and not (kk == k and nn == n):
                        pool_az[v] = az[kk, nn]
                        pool_el[v] = el[kk, nn]
                        v += 1
            if v == 0:
                continue  # nothing to filter with; bin keeps its own values

            # elevation: ordinary median via selection
            mid = v // 2
            part = np.partition(pool_el[:v], mid)
            if v % 2 == 1:
                el_out[k, n] = part[mid]
            else:
                lo2 = part[0]
                for j in range(1, mid):
                    if part[j] > lo2:
                        lo2 = part[j]
                el_out[k, n] = 0.5 * (lo2 + part[mid])

            # azimuth: circular median
            amin = pool_az[0]
            amax = pool_az[0]
            for j in range(1, v):
                if pool_az[j] < amin:
                    amin = pool_az[j]
                if pool_az[j] > amax:
                    amax = pool_az[j]
            if amax - amin < PI:
                # all samples inside a half circle: classic 1-D median; the
                # lower middle sample is the tie-broken minimizer
                j = (v - 1) // 2
                az_out[k, n] = np.partition(pool_az[:v], j)[j]
            else:
                a = np.sort(pool_az[:v])
                p = np.empty(v + 1)
                p[0] = 0.0
                for j in range(v):
                    p[j + 1] = p[j] + a[j]
                best_sum = np.inf
                for i in range(v):
                    c = a[i]
                    lo = 0
                    hi = v
                    while lo < hi:  # first index with a[idx] >= c - pi
                        m = (lo + hi) // 2
                        if a[m] < c - PI:
                            lo = m + 1
                        else:
                            hi = m
                    left = lo
                    lo = 0
                    hi = v
                    while lo < hi:  # first index with a[idx] > c + pi
                        m = (lo + hi) // 2
                        if a[m] <= c + PI:
                            lo = m + 1
                        else:
                            hi = m
                    right = lo
                    s = TWO_PI * left + p[left] - left * c
                    s += (i - left + 1) * c - (p[i + 1] - p[left])
                    s += (p[right] - p[i + 1]) - (right - i - 1) * c
                    s += TWO_PI * (v - right) - (p[v] - p[right]) + (v - right) * c
                    sums[i] = s
                    if s < best_sum:
                        best_sum = s
                for i in range(v):  # ties resolve to the smallest angle
                    if sums[i] <= best_sum + TIE_TOL * v:
                        az_out[k, n] = a[i]
                        break


def _median_pass_numpy(az, el, valid, keep, rk, rn, az_out, el_out):
    """Fallback with the same semantics as the jitted pass."""
    n_k, n_n = az.shape
    for k, n in zip(*np.nonzero(keep)):
        k0, k1 = max(0, k - rk), min(n_k, k + rk + 1)
        n0, n1 = max(0, n - rn), min(n_n, n + rn + 1)
        vwin = valid[k0:k1, n0:n1].copy()
        vwin[k - k0, n - n0] = False
        if not vwin.any():
            continue
        pool_el = el[k0:k1, n0:n1][vwin]
        el_out[k, n] = np.median(pool_el)
        pool_az = az[k0:k1, n0:n1][vwin]
        if pool_az.max() - pool_az.min() < PI:
            v = pool_az.size
            j = (v - 1) // 2
            az_out[k, n] = np.partition(pool_az, j)[j]
        else:
            az_out[k, n] = _circular_median_sorted(np.sort(pool_az))


def _circular_median_sorted(a):
    v = a.size
    p = np.concatenate(([0.0], np.cumsum(a)))
    left = np.searchsorted(a, a - PI, side="left")
    right = np.searchsorted(a, a + PI, side="right")
    i = np.arange(v)
    c = a
    s = TWO_PI * left + p[left] - left * c
    s = s + ((i - left + 1) * c - (p[i + 1] - p[left]))
    s = s + ((p[right] - p[i + 1]) - (right - i - 1) * c)
    s = s + (TWO_PI * (v - right) - (p[v] - p[right]) + (v - right) * c)
    tied = np.flatnonzero(s <= np.min(s) + TIE_TOL * v)
    return a[tied[0]]


def gated_median_filter(az, el, valid, rk, rn, min_count):
    """Apply the neighbor-count gate and median pass.

    A valid bin survives iff the number of valid bins in its in-bounds
    vicinity (center excluded) is strictly greater than ``min_count``; the
    default 0.5 therefore requires at least one valid neighbor.  Returns
    the filtered (az, el, valid) planes.
    """
    valid = np.ascontiguousarray(valid, dtype=bool)
    az = np.ascontiguousarray(az, dtype=np.float64)
    el = np.ascontiguousarray(el, dtype=np.float64)
    n_k, n_n = valid.shape

    k_lo = np.maximum(np.arange(n_k) - rk, 0)
    k_hi = np.minimum(np.arange(n_k) + rk + 1, n_k)
    n_lo = np.maximum(np.arange(n_n) - rn, 0)
    n_hi = np.minimum(np.arange(n_n) + rn + 1, n_n)

    prefix = np.zeros((n_k + 1, n_n + 1), dtype=np.int64)
    np.cumsum(np.cumsum(valid, axis=0), axis=1, out=prefix[1:, 1:])
    counts = (prefix[k_hi[:, None], n_hi[None, :]]
              - prefix[k_lo[:, None], n_hi[None, :]]
              - prefix[k_hi[:, None], n_lo[None, :]]
              + prefix[k_lo[:, None], n_lo[None, :]])
    counts = counts - valid  # center excluded

    keep = valid & (counts > min_count)

    az_out = az.copy()
    el_out = el.copy()
    impl = _median_pass if HAVE_NUMBA else _median_pass_numpy
    impl(az, el, valid, keep, int(rk), int(rn), az_out, el_out)
    return az_out, el_out, keep
