"""File I/O: WAV read/write, the event/frame CSV formats, plane dumps.

Frame-level CSV (bit-exact): header ``frame,class,azimuth,elevation``, one
row per active (frame, source), azimuth in (-180, 180] and elevation in
[-90, 90] printed as nearest integers, frames 0-based.  Event-level CSV:
header ``class,onset_s,offset_s,azimuth,elevation`` with times to 2 decimals.

Ambisonic WAVs default to the common delivery convention: ACN channel order
(W, Y, Z, X) with SN3D normalization, converted on load to the internal
(W, X, Y, Z) order.
"""

from __future__ import annotations

import numpy as np
from scipy.io import wavfile

from .ambisonics import AmbisonicBuffer, N3D, SN3D

ACN_TO_INTERNAL = (0, 3, 1, 2)   # W Y Z X -> W X Y Z
INTERNAL_TO_ACN = (0, 2, 3, 1)

EVENT_CSV_HEADER = "class,onset_s,offset_s,azimuth,elevation"
FRAME_CSV_HEADER = "frame,class,azimuth,elevation"
PREDICTIONS_CSV_HEADER = "event_id,class,prob"


def _to_float(data):
    if data.dtype == np.float32 or data.dtype == np.float64:
        return data.astype(np.float64)
    if data.dtype == np.int16:
        return data.astype(np.float64) / 32768.0
    if data.dtype == np.int32:
        # scipy returns 24-bit PCM MSB-aligned in int32, so one scale fits both
        return data.astype(np.float64) / 2147483648.0
    if data.dtype == np.uint8:
        return (data.astype(np.float64) - 128.0) / 128.0
    raise ValueError(f"unsupported WAV sample format {data.dtype}")


def read_wav_ambisonic(path, channel_order="acn", normalization="sn3d"):
    """Read a 4-channel ambisonic WAV into internal (W, X, Y, Z) order."""
    sample_rate, data = wavfile.read(path)
    if data.ndim != 2 or data.shape[1] != 4:
        raise ValueError(
            f"{path}: expected a 4-channel ambisonic WAV, got shape {data.shape}")
    x = _to_float(data)
    if channel_order == "acn":
        x = x[:, ACN_TO_INTERNAL]
    elif channel_order != "wxyz":
        raise ValueError(f"unknown channel order {channel_order!r}")
    norm = {"sn3d": SN3D, "n3d": N3D}.get(normalization)
    if norm is None:
        raise ValueError(f"unknown normalization {normalization!r}")
    return AmbisonicBuffer(x, int(sample_rate), norm)


def read_wav_mono(path):
    """Read a mono WAV as float64; returns (samples, sample_rate)."""
    sample_rate, data = wavfile.read(path)
    if data.ndim != 1:
        raise ValueError(f"{path}: expected a mono WAV, got shape {data.shape}")
    return _to_float(data), int(sample_rate)


def write_wav(path, samples, sample_rate_hz):
    """Write float32 WAV, mono (n,) or multichannel (n, ch)."""
    wavfile.write(path, int(sample_rate_hz),
                  np.asarray(samples, dtype=np.float32))


def write_event_csv(path, event_rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(EVENT_CSV_HEADER + "\n")
        for class_id, onset_s, offset_s, az, el in event_rows:
            fh.write(f"{class_id},{onset_s:.2f},{offset_s:.2f},{az},{el}\n")


def write_frame_csv(path, frame_rows):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(FRAME_CSV_HEADER + "\n")
        for frame, class_id, az, el in frame_rows:
            fh.write(f"{frame},{class_id},{az},{el}\n")


def _read_csv(path, header, casts):
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().strip()
        if first != header:
            raise ValueError(f"{path}: expected header {header!r}, got {first!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(casts):
                raise ValueError(f"{path}:{lineno}: expected {len(casts)} columns")
            try:
                rows.append(tuple(cast(p) for cast, p in zip(casts, parts)))
            except ValueError:
                raise ValueError(f"{path}:{lineno}: malformed row {line!r}") from None
    return rows


def read_frame_csv(path):
    return _read_csv(path, FRAME_CSV_HEADER, (int, int, float, float))


def read_event_csv(path):
    return _read_csv(path, EVENT_CSV_HEADER, (int, float, float, float, float))


def read_predictions_csv(path):
    return _read_csv(path, PREDICTIONS_CSV_HEADER, (int, int, float))


def dump_plane(path, name, plane):
    """Binary plane dump with a one-line self-describing text header."""
    arr = np.asarray(plane)
    if arr.dtype == bool:
        arr = arr.astype(np.uint8)
    header = f"paraseld-plane {name} {arr.dtype.name} {arr.shape[0]} {arr.shape[1]}\n"
    with open(path, "wb") as fh:
        fh.write(header.encode("ascii"))
        fh.write(np.ascontiguousarray(arr).tobytes())


def load_plane(path):
    """Inverse of dump_plane; returns (name, array)."""
    with open(path, "rb") as fh:
        header = fh.readline().decode("ascii").split()
        if len(header) != 5 or header[0] != "paraseld-plane":
            raise ValueError(f"{path}: not a plane dump")
        _, name, dtype, n_k, n_n = header
        data = np.frombuffer(fh.read(), dtype=np.dtype(dtype))
    return name, data.reshape(int(n_k), int(n_n))
