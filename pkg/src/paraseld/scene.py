"""Synthetic ambisonic scene generator with exact reference metadata.

Events are static plane waves carrying seeded test signals (noise bursts,
tones, chirps, or mono files); an optional isotropic diffuse layer sums 24
decorrelated white-noise plane waves from a spherical design.  Every scene
is reproducible from its seed, and each event draws from its own spawned
RNG stream so a scene equals the sum of its per-event syntheses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import chirp as _chirp

from .ambisonics import AmbisonicBuffer, Direction, N3D, encode_plane_wave
from .association import EventAnnotation
from .io import read_wav_mono

SIGNAL_KINDS = ("noise-burst", "tone", "chirp", "file")

# vertices of the truncated octahedron (permutations of (0, +-1, +-2)/sqrt 5):
# a centrally-symmetric spherical 3-design used for the isotropic layer
_T_DESIGN_24 = []
for _perm in ((0, 1, 2), (0, 2, 1), (1, 0, 2), (2, 0, 1), (1, 2, 0), (2, 1, 0)):
    for _s1 in (1.0, -1.0):
        for _s2 in (1.0, -1.0):
            _v = [0.0, 0.0, 0.0]
            _nz = [i for i, p in enumerate(_perm) if p != 0]
            _v[_perm.index(1)] = _s1
            _v[_perm.index(2)] = 2.0 * _s2
            _T_DESIGN_24.append(tuple(c / math.sqrt(5.0) for c in _v))
T_DESIGN_24 = sorted(set(_T_DESIGN_24))


def t_design_directions():
    """The 24 isotropic-layer directions as Direction objects."""
    dirs = []
    for x, y, z in T_DESIGN_24:
        dirs.append(Direction(math.atan2(y, x), math.asin(z)))
    return dirs


@dataclass
class EventSpec:
    kind: str
    direction: Direction
    onset_s: float
    offset_s: float
    gain: float = 1.0
    class_id: int = -1
    freq_hz: float = 1000.0          # tone
    chirp_f0_hz: float = 500.0       # chirp start
    chirp_f1_hz: float = 4000.0      # chirp end
    band_hz: tuple = None            # optional brick-wall band for noise bursts
    path: str = None                 # file kind


@dataclass
class SceneSpec:
    duration_s: float
    events: list = field(default_factory=list)
    diffuse_snr_db: float = None
    seed: int = 0
    sample_rate_hz: int = 48000


class SceneError(ValueError):
    pass


def _validate(spec):
    for i, ev in enumerate(spec.events):
        if ev.kind not in SIGNAL_KINDS:
            raise SceneError(f"event {i}: unknown signal kind {ev.kind!r}")
        if not 0.0 <= ev.onset_s < ev.offset_s <= spec.duration_s:
            raise SceneError(
                f"event {i}: [{ev.onset_s}, {ev.offset_s}] outside scene "
                f"duration {spec.duration_s}")
    if spec.diffuse_snr_db is not None and not np.isfinite(spec.diffuse_snr_db):
        raise SceneError("diffuse_snr_db must be finite")


def _event_signal(ev, n, fs, rng):
    if n == 0:
        return np.zeros(0)
    t = np.arange(n) / fs
    if ev.kind == "noise-burst":
        x = rng.standard_normal(n)
        if ev.band_hz is not None:
            spectrum = np.fft.rfft(x)
            freqs = np.fft.rfftfreq(n, 1.0 / fs)
            spectrum[(freqs < ev.band_hz[0]) | (freqs > ev.band_hz[1])] = 0.0
            x = np.fft.irfft(spectrum, n)
    elif ev.kind == "tone":
        phase = rng.uniform(0.0, 2.0 * np.pi)
        x = np.sin(2.0 * np.pi * ev.freq_hz * t + phase)
    elif ev.kind == "chirp":
        x = _chirp(t, ev.chirp_f0_hz, t[-1] if n > 1 else 1.0, ev.chirp_f1_hz)
    elif ev.kind == "file":
        mono, file_fs = read_wav_mono(ev.path)
        if file_fs != fs:
            raise SceneError(f"event file {ev.path}: sample rate {file_fs} != {fs}")
        reps = int(np.ceil(n / max(mono.size, 1)))
        x = np.tile(mono, reps)[:n]
    else:  # pragma: no cover - guarded by _validate
        raise SceneError(ev.kind)
    ramp = min(int(0.005 * fs), n // 4)
    if ramp > 0:
        fade = 0.5 * (1.0 - np.cos(np.pi * np.arange(ramp) / ramp))
        x[:ramp] *= fade
        x[-ramp:] *= fade[::-1]
    return ev.gain * x


def _reference_events(spec, hop_s):
    refs = []
    for ev in spec.events:
        onset = int(round(ev.onset_s / hop_s))
        offset = max(onset, int(round(ev.offset_s / hop_s)) - 1)
        track = [(m, ev.direction) for m in range(onset, offset + 1)]
        refs.append(EventAnnotation(doa_track=track, onset=onset, offset=offset,
                                    median_doa=ev.direction, class_id=ev.class_id))
    return sorted(refs, key=lambda e: e.onset)


def synthesize(spec, frame_hop_s=0.02):
    """Render a scene; returns (AmbisonicBuffer in N3D, reference events).

    Reference onset/offset frames use the same rounding the metrics module
    applies (round to nearest frame, offset exclusive).
    """
    _validate(spec)
    fs = spec.sample_rate_hz
    n_total = int(round(spec.duration_s * fs))
    out = np.zeros((n_total, 4))
    streams = np.random.SeedSequence(spec.seed).spawn(len(spec.events) + 1)

    event_sum_w_power = 0.0
    for ev, stream in zip(spec.events, streams):
        rng = np.random.default_rng(stream)
        i0, i1 = int(round(ev.onset_s * fs)), int(round(ev.offset_s * fs))
        mono = _event_signal(ev, i1 - i0, fs, rng)
        out[i0:i1] += encode_plane_wave(mono, ev.direction, fs).samples
        event_sum_w_power += float(np.sum(mono ** 2))

    if spec.diffuse_snr_db is not None:
        rng = np.random.default_rng(streams[-1])
        diffuse = np.zeros((n_total, 4))
        for d in t_design_directions():
            diffuse += encode_plane_wave(rng.standard_normal(n_total), d, fs).samples
        if spec.events:  # scale to the requested SNR against summed event power
            p_event = event_sum_w_power / n_total
            p_diffuse = float(np.mean(diffuse[:, 0] ** 2))
            if p_diffuse > 0.0:
                target = p_event * 10.0 ** (-spec.diffuse_snr_db / 10.0)
                diffuse *= math.sqrt(target / p_diffuse)
        out += diffuse

    buf = AmbisonicBuffer(out, fs, N3D)
    return buf, _reference_events(spec, frame_hop_s)


def parse_scene_file(path):
    """Read a scene spec in the key=value dialect with repeated [event] blocks."""
    scene_kwargs = {}
    events = []
    current = None

    def close(block):
        if block is None:
            return
        direction = Direction.from_degrees(block.pop("azimuth_deg", 0.0),
                                           block.pop("elevation_deg", 0.0))
        band = None
        if "band_low_hz" in block or "band_high_hz" in block:
            band = (block.pop("band_low_hz", 0.0), block.pop("band_high_hz", 24000.0))
        try:
            events.append(EventSpec(direction=direction, band_hz=band, **block))
        except TypeError:
            bad = set(block) - set(EventSpec.__dataclass_fields__)
            raise SceneError(f"{path}: unknown event key(s) {sorted(bad)}") from None

    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line == "[event]":
                close(current)
                current = {}
                continue
            if "=" not in line:
                raise SceneError(f"{path}:{lineno}: malformed line {raw.rstrip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            target = current if current is not None else scene_kwargs
            if key in ("kind", "path"):
                target[key] = value
            elif key in ("class_id", "seed"):
                target[key] = int(value)
            else:
                target[key] = float(value)
    close(current)
    if "duration_s" not in scene_kwargs:
        raise SceneError(f"{path}: missing duration_s")
    if "sample_rate_hz" in scene_kwargs:
        scene_kwargs["sample_rate_hz"] = int(scene_kwargs["sample_rate_hz"])
    return SceneSpec(events=events, **scene_kwargs)
