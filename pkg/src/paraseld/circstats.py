"""Circular (2pi-periodic) statistics for azimuth data and great-circle geometry.

Azimuth angles live on the circle, so means, medians and standard deviations
use the periodic operators; elevation always uses ordinary statistics.
"""

from __future__ import annotations

import numpy as np

TWO_PI = 2.0 * np.pi


def wrap_angle(a):
    """Wrap angle(s) in radians to (-pi, pi]."""
    w = np.remainder(np.asarray(a, dtype=float) + np.pi, TWO_PI) - np.pi
    w = np.where(w == -np.pi, np.pi, w)
    if np.isscalar(a) or np.ndim(a) == 0:
        return float(w)
    return w


def angle_diff(a, b):
    """Absolute circular distance |a - b| on the circle, in [0, pi]."""
    d = np.abs(wrap_angle(np.asarray(a, float) - np.asarray(b, float)))
    if np.ndim(d) == 0:
        return float(d)
    return d


def central_angle(az_a, el_a, az_b, el_b):
    """Great-circle angle between directions (azimuth, elevation), radians."""
    dot = (np.sin(el_a) * np.sin(el_b)
           + np.cos(el_a) * np.cos(el_b) * np.cos(np.asarray(az_a) - np.asarray(az_b)))
    ang = np.arccos(np.clip(dot, -1.0, 1.0))
    if np.ndim(ang) == 0:
        return float(ang)
    return ang


def circular_mean(angles):
    a = np.asarray(angles, float)
    return float(np.arctan2(np.mean(np.sin(a)), np.mean(np.cos(a))))


def circular_std(angles):
    """Circular standard deviation sqrt(-2 ln R) from the mean resultant length.

    Returns inf when the resultant vanishes (no directional concentration).
    """
    a = np.asarray(angles, float)
    if a.size == 0:
        raise ValueError("circular_std of an empty sample")
    r = float(np.hypot(np.mean(np.cos(a)), np.mean(np.sin(a))))
    if r <= 0.0:
        return float("inf")
    return float(np.sqrt(-2.0 * np.log(min(r, 1.0))))


# Ties between candidate sums are *not* rare on the circle (for even pools the
# summed distance is constant along the arc between the two middle samples),
# so tie detection uses a tolerance well above accumulation noise but far
# below any generic gap.
MEDIAN_TIE_TOL = 1e-12


def circular_median(angles):
    """The sample minimizing the summed circular distance to all samples.

    Ties resolve to the smaller (wrapped) angle.  O(n log n) via prefix sums
    over the sorted sample; exact for the |diff| <= pi metric.
    """
    x = np.sort(wrap_angle(np.atleast_1d(np.asarray(angles, float))))
    v = x.size
    if v == 0:
        raise ValueError("circular_median of an empty sample")
    if v == 1:
        return float(x[0])
    p = np.concatenate(([0.0], np.cumsum(x)))
    lo = np.searchsorted(x, x - np.pi, side="left")
    hi = np.searchsorted(x, x + np.pi, side="right")
    i = np.arange(v)
    c = x
    # four sorted segments: wrapped-below, below, above, wrapped-above
    s = (TWO_PI * lo + p[lo] - lo * c)
    s += (i - lo + 1) * c - (p[i + 1] - p[lo])
    s += (p[hi] - p[i + 1]) - (hi - i - 1) * c
    s += TWO_PI * (v - hi) - (p[v] - p[hi]) + (v - hi) * c
    tied = np.flatnonzero(s <= np.min(s) + MEDIAN_TIE_TOL * v)
    return float(x[tied[0]])
