"""Front-end parameter set and its plain-text config format.

Defaults reproduce the selected configuration of the analysis and
association stages; audio constants (sample rate, hop, speed of sound,
characteristic impedance) live here too so every tunable has one home.

The file format is one ``key = value`` pair per line with ``#`` comments.
Pairs (frequency ranges, vicinity radii) are written ``a, b``.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

__all__ = ["ParamError", "FrontEndParams", "load_params", "dump_params", "save_params"]


class ParamError(ValueError):
    """Invalid, unknown, or out-of-range configuration value; carries the key."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class FrontEndParams:
    # DOA analysis
    stft_window_size: int = 256
    analysis_freq_range_hz: tuple = (0.0, 8000.0)
    time_avg_radius_r: int = 10
    diffuseness_threshold_psi_max: float = 0.5
    energy_filter_length: int = 11
    std_mask_vicinity_radius: int = 2
    std_mask_norm_threshold: float = 0.15
    median_min_ratio_b_min: float = 0.5
    median_vicinity_radius_kn: tuple = (20, 20)
    # association
    resample_min_bins_k_min: int = 1
    overlap_std_threshold_sigma_max: float = 10.0  # degrees
    group_max_angle_deg: float = 20.0
    group_max_frame_dist: int = 20
    event_min_length: int = 8
    frame_hop_s: float = 0.02
    # audio constants
    sample_rate_hz: int = 48000
    stft_hop: int = 128
    speed_of_sound_c: float = 343.0
    impedance_z0: float = 413.3

    def __post_init__(self):
        self.validate()

    @property
    def nyquist_hz(self):
        return self.sample_rate_hz / 2.0

    def validate(self):
        pos_ints = ["stft_window_size", "stft_hop", "sample_rate_hz",
                    "energy_filter_length", "event_min_length"]
        for key in pos_ints:
            if int(getattr(self, key)) < 1:
                raise ParamError(key, "must be a positive integer")
        nonneg_ints = ["time_avg_radius_r", "std_mask_vicinity_radius",
                       "resample_min_bins_k_min", "group_max_frame_dist"]
        for key in nonneg_ints:
            if int(getattr(self, key)) < 0:
                raise ParamError(key, "must be a non-negative integer")
        for key in ["overlap_std_threshold_sigma_max", "group_max_angle_deg",
                    "std_mask_norm_threshold"]:
            if float(getattr(self, key)) < 0.0:
                raise ParamError(key, "must be non-negative")
        for key in ["diffuseness_threshold_psi_max", "median_min_ratio_b_min"]:
            val = float(getattr(self, key))
            if not 0.0 <= val <= 1.0:
                raise ParamError(key, f"ratio must lie in [0, 1], got {val}")
        for key in ["frame_hop_s", "speed_of_sound_c", "impedance_z0"]:
            if float(getattr(self, key)) <= 0.0:
                raise ParamError(key, "must be positive")
        rk, rn = self.median_vicinity_radius_kn
        if int(rk) < 0 or int(rn) < 0:
            raise ParamError("median_vicinity_radius_kn", "radii must be non-negative")
        lo, hi = self.analysis_freq_range_hz
        if not 0.0 <= float(lo) < float(hi):
            raise ParamError("analysis_freq_range_hz",
                             f"need 0 <= low < high, got ({lo}, {hi})")
        if float(hi) > self.nyquist_hz:
            raise ParamError("analysis_freq_range_hz",
                             f"high edge {hi} Hz exceeds Nyquist {self.nyquist_hz} Hz")
        if self.stft_hop > self.stft_window_size:
            raise ParamError("stft_hop", "hop larger than the analysis window")


_INT_PAIR_KEYS = {"median_vicinity_radius_kn"}
_FLOAT_PAIR_KEYS = {"analysis_freq_range_hz"}
_FIELD_TYPES = {f.name: f.type for f in fields(FrontEndParams)}


def _parse_value(key, text):
    text = text.strip()
    if key in _INT_PAIR_KEYS or key in _FLOAT_PAIR_KEYS:
        parts = [p for p in text.strip("[]()").replace(",", " ").split() if p]
        if len(parts) != 2:
            raise ParamError(key, f"expected a pair of values, got {text!r}")
        cast = int if key in _INT_PAIR_KEYS else float
        try:
            return (cast(parts[0]), cast(parts[1]))
        except ValueError:
            raise ParamError(key, f"cannot parse pair {text!r}") from None
    cast = int if _FIELD_TYPES[key] == "int" else float
    try:
        return cast(text)
    except ValueError:
        raise ParamError(key, f"cannot parse {text!r} as {cast.__name__}") from None


def load_params(path):
    """Read a key=value config file; unset keys keep their defaults."""
    overrides = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParamError(f"{path}:{lineno}", f"malformed line {raw.rstrip()!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in _FIELD_TYPES:
                raise ParamError(key, "unknown parameter")
            overrides[key] = _parse_value(key, value)
    return replace(FrontEndParams(), **overrides)


def dump_params(params):
    """Serialize to the same key=value dialect load_params reads."""
    lines = []
    for f in fields(FrontEndParams):
        value = getattr(params, f.name)
        if isinstance(value, tuple):
            lines.append(f"{f.name} = {value[0]}, {value[1]}")
        else:
            lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


def save_params(params, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_params(params))
