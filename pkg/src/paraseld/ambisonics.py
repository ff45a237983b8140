"""First-order ambisonic signal model.

Internal channel order is always (W, X, Y, Z); the encoding convention is
the real spherical harmonics up to order 1,

    Y(az, el) = [1, sqrt(3) cos el cos az, sqrt(3) cos el sin az, sqrt(3) sin el]

i.e. N3D normalization, where the order-1 channels carry sqrt(3) times their
SN3D amplitude.  A virtual hypercardioid pointed at a direction is the dot
product of Y at that direction with the signal vector; its response to a
unit plane wave at central angle g is 1 + 3 cos(g).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circstats import central_angle, wrap_angle

SQRT3 = math.sqrt(3.0)

N3D = "N3D"
SN3D = "SN3D"


@dataclass(frozen=True)
class Direction:
    """Direction of arrival: azimuth in (-pi, pi], elevation in [-pi/2, pi/2]."""

    azimuth: float
    elevation: float

    def __post_init__(self):
        object.__setattr__(self, "azimuth", wrap_angle(float(self.azimuth)))
        object.__setattr__(self, "elevation",
                           float(np.clip(float(self.elevation), -np.pi / 2, np.pi / 2)))

    @classmethod
    def from_degrees(cls, azimuth_deg, elevation_deg):
        return cls(math.radians(azimuth_deg), math.radians(elevation_deg))

    @property
    def azimuth_deg(self):
        return math.degrees(self.azimuth)

    @property
    def elevation_deg(self):
        return math.degrees(self.elevation)

    def unit_vector(self):
        ce = math.cos(self.elevation)
        return np.array([ce * math.cos(self.azimuth),
                         ce * math.sin(self.azimuth),
                         math.sin(self.elevation)])

    def angle_to(self, other):
        return central_angle(self.azimuth, self.elevation,
                             other.azimuth, other.elevation)


@dataclass
class AmbisonicBuffer:
    """4-channel B-format signal, samples laid out (n_samples, 4) as W, X, Y, Z."""

    samples: np.ndarray
    sample_rate_hz: int
    normalization: str = N3D

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 2 or self.samples.shape[1] != 4:
            raise ValueError(
                f"ambisonic buffer must be (n_samples, 4), got {self.samples.shape}")
        if self.normalization not in (N3D, SN3D):
            raise ValueError(f"unknown normalization tag {self.normalization!r}")

    @property
    def n_samples(self):
        return self.samples.shape[0]

    @property
    def duration_s(self):
        return self.n_samples / self.sample_rate_hz


def to_n3d(buf):
    """Convert an SN3D-tagged buffer to N3D (order-1 channels scaled by sqrt 3)."""
    if buf.normalization == N3D:
        return buf
    samples = buf.samples.copy()
    samples[:, 1:4] *= SQRT3
    return AmbisonicBuffer(samples, buf.sample_rate_hz, N3D)


def sh_eval(direction):
    """Real order-1 spherical harmonics [Y_w, Y_x, Y_y, Y_z] at a direction (N3D)."""
    ce = math.cos(direction.elevation)
    return np.array([
        1.0,
        SQRT3 * ce * math.cos(direction.azimuth),
        SQRT3 * ce * math.sin(direction.azimuth),
        SQRT3 * math.sin(direction.elevation),
    ])


def encode_plane_wave(mono, direction, sample_rate_hz):
    """Encode a monophonic signal as a plane wave arriving from a direction."""
    mono = np.asarray(mono, dtype=np.float64)
    if mono.ndim != 1:
        raise ValueError("plane-wave source signal must be 1-D")
    samples = np.outer(mono, sh_eval(direction))
    return AmbisonicBuffer(samples, sample_rate_hz, N3D)


def beamform(buf, direction):
    """Virtual hypercardioid signal toward a direction; buffer must be N3D."""
    if buf.normalization != N3D:
        raise ValueError("beamforming expects an N3D buffer; call to_n3d first")
    return buf.samples @ sh_eval(direction)
