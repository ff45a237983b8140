"""Per-bin spatial analysis: intensity DOA, diffuseness, masks, median filter.

The chain is

    intensity_doa -> diffuseness -> apply_masks -> median_filter

producing a DoaMap whose ``valid`` plane narrows at each step.  Directions
point toward the source.  All mask decisions are taken on impedance-free
quantities, so they are bit-identical under any Z0 > 0 and any c > 0; the
characteristic impedance and speed of sound only scale the reported energy
density plane.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import ndimage

from ._medfilt import gated_median_filter
from .ambisonics import SQRT3


@dataclass
class DoaMap:
    """Per-TF-bin direction estimates with energy/diffuseness side planes.

    ``azimuth``/``elevation`` are radians, ``energy`` is J/m^3, ``diffuseness``
    lies in [0, 1] (NaN until computed), ``valid`` is the running conjunction
    of the masks applied so far.  ``intensity`` (3, k, n) and ``energy_raw``
    hold the unscaled Re{b_xyz b_w*} and |b_w|^2 + ||b_xyz||^2 planes the
    derived quantities are computed from.
    """

    azimuth: np.ndarray
    elevation: np.ndarray
    energy: np.ndarray
    diffuseness: np.ndarray
    valid: np.ndarray
    intensity: np.ndarray
    energy_raw: np.ndarray

    def __post_init__(self):
        shape = self.azimuth.shape
        for name in ("elevation", "energy", "diffuseness", "valid", "energy_raw"):
            if getattr(self, name).shape != shape:
                raise ValueError(f"plane {name} has shape mismatch")
        if self.intensity.shape != (3,) + shape:
            raise ValueError("intensity plane must be (3, k, n)")

    @property
    def shape(self):
        return self.azimuth.shape


def intensity_doa(spec, params):
    """Active-intensity DOA, pointing toward the source, plus energy density.

    Expects the N3D band-limited spectrogram; the order-1 channels are scaled
    back to their velocity-proportional (SN3D) amplitudes internally so that
    a single plane wave satisfies ||I|| = c E exactly.
    """
    if spec.data.shape[0] != 4:
        raise ValueError("intensity analysis needs a 4-channel spectrogram")
    bw = spec.data[0]
    vel = spec.data[1:4] / SQRT3
    intensity = np.real(vel * np.conj(bw)[None, :, :])
    energy_raw = np.abs(bw) ** 2 + np.sum(np.abs(vel) ** 2, axis=0)

    norm = np.sqrt(np.sum(intensity ** 2, axis=0))
    azimuth = np.arctan2(intensity[1], intensity[0])
    with np.errstate(invalid="ignore", divide="ignore"):
        sin_el = np.where(norm > 0.0, intensity[2] / np.where(norm > 0, norm, 1.0), 0.0)
    elevation = np.arcsin(np.clip(sin_el, -1.0, 1.0))
    # degenerate bins (zero intensity): (0, 0), removed later by the masks
    azimuth = np.where(norm > 0.0, azimuth, 0.0)
    elevation = np.where(norm > 0.0, elevation, 0.0)

    energy = energy_raw / (2.0 * params.impedance_z0 * params.speed_of_sound_c)
    return DoaMap(
        azimuth=azimuth,
        elevation=elevation,
        energy=energy,
        diffuseness=np.full(azimuth.shape, np.nan),
        valid=np.ones(azimuth.shape, dtype=bool),
        intensity=intensity,
        energy_raw=energy_raw,
    )


def _axis_box_sum(x, radius, axis):
    """Truncated sliding-window sum along one axis; returns (sums, counts)."""
    x = np.moveaxis(x, axis, -1)
    n = x.shape[-1]
    prefix = np.zeros(x.shape[:-1] + (n + 1,), dtype=np.float64)
    np.cumsum(x, axis=-1, out=prefix[..., 1:])
    hi = np.minimum(np.arange(n) + radius + 1, n)
    lo = np.maximum(np.arange(n) - radius, 0)
    return np.moveaxis(prefix[..., hi] - prefix[..., lo], -1, axis), hi - lo


def moving_average_block(x, radius_k, radius_n):
    """Mean over the truncated (k, n) vicinity of each bin of the last 2 axes."""
    sum_k, cnt_k = _axis_box_sum(x, radius_k, axis=-2)
    sum_kn, cnt_n = _axis_box_sum(sum_k, radius_n, axis=-1)
    return sum_kn / (cnt_k[:, None] * cnt_n[None, :])


def diffuseness(doa_map, params):
    """Fill the diffuseness plane: 1 - ||<I>|| / (c <E>), clamped to [0, 1].

    The expectation <.> is estimated by a moving average over the square
    (k, n) vicinity of radius ``time_avg_radius_r``, truncated at edges.
    Averaging across both axes is exact for locally plane-wave fields and
    cuts the estimator's variance enough for near-isotropic fields to read
    as such; a time-only average at this radius saturates around 0.86 on a
    truly diffuse input.
    """
    r = params.time_avg_radius_r
    mean_i = moving_average_block(doa_map.intensity, r, r)
    mean_e = moving_average_block(doa_map.energy_raw, r, r)
    norm_i = np.sqrt(np.sum(mean_i ** 2, axis=0))
    with np.errstate(invalid="ignore", divide="ignore"):
        psi = 1.0 - 2.0 * norm_i / mean_e
    psi = np.where(mean_e > 0.0, psi, 1.0)
    return replace(doa_map, diffuseness=np.clip(psi, 0.0, 1.0))


def _gaussian_kernel2d(length, sigma):
    j = np.arange(length) - (length - 1) / 2.0
    g = np.exp(-0.5 * (j / sigma) ** 2)
    return np.outer(g, g)


def energy_mask(doa_map, params):
    """Bins whose energy density exceeds its Gaussian-weighted local mean."""
    length = int(params.energy_filter_length)
    kernel = _gaussian_kernel2d(length, length / 4.0)
    e = doa_map.energy_raw
    num = ndimage.correlate(e, kernel, mode="constant", cval=0.0)
    den = ndimage.correlate(np.ones_like(e), kernel, mode="constant", cval=0.0)
    return e > num / den


def diffuseness_mask(doa_map, params):
    """Bins with diffuseness strictly below the threshold."""
    psi = doa_map.diffuseness
    if np.isnan(psi).any():
        raise ValueError("diffuseness plane not computed; run diffuseness() first")
    return psi < params.diffuseness_threshold_psi_max


def _box_sum2d(x, radius):
    n_k, n_n = x.shape
    prefix = np.zeros((n_k + 1, n_n + 1), dtype=np.float64)
    np.cumsum(np.cumsum(x, axis=0), axis=1, out=prefix[1:, 1:])
    k_lo = np.maximum(np.arange(n_k) - radius, 0)
    k_hi = np.minimum(np.arange(n_k) + radius + 1, n_k)
    n_lo = np.maximum(np.arange(n_n) - radius, 0)
    n_hi = np.minimum(np.arange(n_n) + radius + 1, n_n)
    return (prefix[k_hi[:, None], n_hi[None, :]]
            - prefix[k_lo[:, None], n_hi[None, :]]
            - prefix[k_hi[:, None], n_lo[None, :]]
            + prefix[k_lo[:, None], n_lo[None, :]]), (k_hi - k_lo)[:, None] * (n_hi - n_lo)[None, :]


def variance_mask(doa_map, params):
    """Bins whose local DOA scatter is small.

    Azimuth uses the circular standard deviation sqrt(-2 ln R) over the square
    vicinity (center included, truncated at edges), elevation the ordinary
    one; a bin passes when (sigma_az / 2 + sigma_el) / pi is strictly below
    the configured normalized threshold.
    """
    r = int(params.std_mask_vicinity_radius)
    sum_cos, count = _box_sum2d(np.cos(doa_map.azimuth), r)
    sum_sin, _ = _box_sum2d(np.sin(doa_map.azimuth), r)
    resultant = np.hypot(sum_cos / count, sum_sin / count)
    with np.errstate(divide="ignore"):
        sigma_az = np.where(resultant > 0.0,
                            np.sqrt(-2.0 * np.log(np.minimum(resultant, 1.0))),
                            np.inf)
    sum_el, _ = _box_sum2d(doa_map.elevation, r)
    sum_el2, _ = _box_sum2d(doa_map.elevation ** 2, r)
    var_el = np.maximum(sum_el2 / count - (sum_el / count) ** 2, 0.0)
    sigma_el = np.sqrt(var_el)
    return (sigma_az / 2.0 + sigma_el) / np.pi < params.std_mask_norm_threshold


def apply_masks(doa_map, params):
    """Conjoin the energy, diffuseness and variance masks into ``valid``."""
    mask = (energy_mask(doa_map, params)
            & diffuseness_mask(doa_map, params)
            & variance_mask(doa_map, params))
    return replace(doa_map, valid=doa_map.valid & mask)


def median_filter(doa_map, params):
    """Vicinity-gated median filtering of the masked DOA planes.

    A valid bin survives only if the number of valid bins in its in-bounds
    (k, n) vicinity (center excluded) strictly exceeds the configured
    minimum (0.5, i.e. at least one valid neighbor); survivors take the
    circular median azimuth and median elevation of their valid neighbors.
    """
    rk, rn = params.median_vicinity_radius_kn
    az, el, valid = gated_median_filter(
        doa_map.azimuth, doa_map.elevation, doa_map.valid,
        int(rk), int(rn), float(params.median_min_ratio_b_min))
    return replace(doa_map, azimuth=az, elevation=el, valid=valid)


def analyze_spectrogram(spec, params):
    """Full Section-2.1 chain on a band-limited N3D spectrogram."""
    doa_map = intensity_doa(spec, params)
    doa_map = diffuseness(doa_map, params)
    doa_map = apply_masks(doa_map, params)
    return median_filter(doa_map, params)
