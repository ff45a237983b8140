"""Input validation helpers shared by the estimator facade and the CLI."""

from __future__ import annotations

import numpy as np

from .ambisonics import AmbisonicBuffer, N3D


def check_ambisonic(X, sample_rate_hz=48000, normalization=N3D):
    """Coerce (n_samples, 4) array-likes or AmbisonicBuffers to a buffer.

    Arrays are interpreted as already being in internal (W, X, Y, Z) order
    with the given normalization and sample rate.
    """
    if isinstance(X, AmbisonicBuffer):
        buf = X
    else:
        arr = np.asarray(X, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 4:
            raise ValueError(
                f"expected an AmbisonicBuffer or (n_samples, 4) array, "
                f"got shape {getattr(arr, 'shape', None)}")
        buf = AmbisonicBuffer(arr, sample_rate_hz, normalization)
    if not np.all(np.isfinite(buf.samples)):
        raise ValueError("ambisonic signal contains non-finite samples")
    return buf


def check_mono(x):
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D signal, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("signal contains non-finite samples")
    return arr
