"""Log-mel TF-patch extraction from monophonic event clips.

Clips shorter than 2 s are replicated to that length, then cut into
non-overlapping patches of 50 frames x 64 mel bands (1 s per patch at the
40 ms window / 20 ms hop).
"""

from __future__ import annotations

import numpy as np
from scipy.io import wavfile

SAMPLE_RATE = 48000
WINDOW_S = 0.040
HOP_S = 0.020
N_MELS = 64
PATCH_FRAMES = 50
MIN_CLIP_S = 2.0
LOG_FLOOR = 1e-10


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, float) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, float) / 2595.0) - 1.0)


def mel_filterbank(n_fft, sample_rate=SAMPLE_RATE, n_mels=N_MELS):
    """Triangular mel filters over [0, Nyquist]; rows are bands."""
    freqs = np.fft.rfftfreq(n_fft, 1.0 / sample_rate)
    edges = mel_to_hz(np.linspace(hz_to_mel(0.0), hz_to_mel(sample_rate / 2.0),
                                  n_mels + 2))
    bank = np.zeros((n_mels, freqs.size))
    for b in range(n_mels):
        lo, mid, hi = edges[b], edges[b + 1], edges[b + 2]
        up = (freqs - lo) / max(mid - lo, 1e-12)
        down = (hi - freqs) / max(hi - mid, 1e-12)
        bank[b] = np.clip(np.minimum(up, down), 0.0, None)
    return bank


def log_mel_spectrogram(mono, sample_rate=SAMPLE_RATE):
    """(n_frames, 64) log mel energies with end padding to whole frames."""
    mono = np.asarray(mono, dtype=np.float64)
    if mono.ndim != 1 or mono.size == 0:
        raise ValueError("expected a non-empty mono clip")
    win = int(round(WINDOW_S * sample_rate))
    hop = int(round(HOP_S * sample_rate))
    n_frames = int(np.ceil(mono.size / hop))
    padded = np.zeros((n_frames - 1) * hop + win)
    padded[:mono.size] = mono
    idx = np.arange(win)[None, :] + hop * np.arange(n_frames)[:, None]
    frames = padded[idx] * np.hanning(win)
    power = np.abs(np.fft.rfft(frames, axis=1)) ** 2
    mel = power @ mel_filterbank(win, sample_rate).T
    return np.log(np.maximum(mel, LOG_FLOOR))


def extract_patches(mono, sample_rate=SAMPLE_RATE):
    """Non-overlapping (50, 64) log-mel patches of a clip, replicated to 2 s."""
    mono = np.asarray(mono, dtype=np.float64)
    if mono.ndim != 1 or mono.size == 0:
        raise ValueError("expected a non-empty mono clip")
    min_len = int(MIN_CLIP_S * sample_rate)
    if mono.size < min_len:
        mono = np.tile(mono, int(np.ceil(min_len / mono.size)))[:min_len]
    spec = log_mel_spectrogram(mono, sample_rate)
    n_patches = spec.shape[0] // PATCH_FRAMES
    return [spec[i * PATCH_FRAMES:(i + 1) * PATCH_FRAMES].astype(np.float32)
            for i in range(n_patches)]


def extract_patches_from_wav(path):
    sample_rate, data = wavfile.read(path)
    if data.ndim != 1:
        raise ValueError(f"{path}: expected a mono event WAV")
    if data.dtype == np.int16:
        data = data / 32768.0
    elif data.dtype == np.int32:
        data = data / 2147483648.0
    return extract_patches(np.asarray(data, np.float64), sample_rate)
