"""Windowed short-time transform and window-index / frame-index bookkeeping.

Hann window, one-sided spectrum, no zero padding: every analysis window lies
fully inside the signal, so the transform is exactly linear and shifting the
input by one hop shifts window indices by one.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal.windows import hann


@dataclass
class Spectrogram:
    """One-sided complex STFT, data indexed [channel, bin k, window n]."""

    data: np.ndarray
    bin_freqs_hz: np.ndarray
    window_times_s: np.ndarray
    sample_rate_hz: int

    @property
    def n_bins(self):
        return self.data.shape[1]

    @property
    def n_windows(self):
        return self.data.shape[2]


def n_full_windows(n_samples, window_size, hop):
    if n_samples < window_size:
        return 0
    return (n_samples - window_size) // hop + 1


def stft(buf, params):
    """STFT of a 4-channel buffer with the configured window size and hop."""
    win = params.stft_window_size
    hop = params.stft_hop
    x = buf.samples
    if x.shape[1] != 4:
        raise ValueError(f"expected 4 channels, got {x.shape[1]}")
    if x.shape[0] < win:
        raise ValueError(
            f"signal too short for analysis: {x.shape[0]} samples < window {win}")
    frames = sliding_window_view(x, win, axis=0)[::hop]   # (n_win, 4, win)
    w = hann(win, sym=False)
    spectra = np.fft.rfft(frames * w, axis=-1)            # (n_win, 4, k)
    data = np.ascontiguousarray(np.transpose(spectra, (1, 2, 0)))
    n_win = data.shape[2]
    times = (np.arange(n_win) * hop + win / 2.0) / buf.sample_rate_hz
    freqs = np.fft.rfftfreq(win, 1.0 / buf.sample_rate_hz)
    return Spectrogram(data, freqs, times, buf.sample_rate_hz)


def window_to_frame(n, params):
    """Frame index of a window: floor of its center time over the frame hop."""
    win_center = (np.asarray(n) * params.stft_hop + params.stft_window_size / 2.0)
    m = np.floor(win_center / params.sample_rate_hz / params.frame_hop_s).astype(int)
    if np.ndim(n) == 0:
        return int(m)
    return m


def band_limit(spec, range_hz):
    """View of the spectrogram restricted to bins inside [low, high] Hz."""
    lo, hi = range_hz
    if lo > hi:
        raise ValueError(f"inverted frequency range ({lo}, {hi})")
    keep = (spec.bin_freqs_hz >= lo) & (spec.bin_freqs_hz <= hi)
    idx = np.flatnonzero(keep)
    if idx.size == 0:
        raise ValueError(f"no analysis bins inside ({lo}, {hi}) Hz")
    sl = slice(idx[0], idx[-1] + 1)
    return Spectrogram(spec.data[:, sl, :], spec.bin_freqs_hz[sl],
                       spec.window_times_s, spec.sample_rate_hz)
