"""Estimator facade over the full parametric front-end pipeline.

`ParametricFrontEnd` is a scikit-learn compatible transformer: every tunable
of the analysis/association chain is a constructor parameter (defaults are
the selected configuration), `get_params`/`set_params`/`clone` work as
usual, and `transform` maps a 4-channel ambisonic signal to the list of
detected events.  There is nothing to fit; `fit` only validates parameters.
"""

from __future__ import annotations

from dataclasses import dataclass

from sklearn.base import BaseEstimator, TransformerMixin

from . import analysis
from .ambisonics import sh_eval, to_n3d
from .association import associate
from .config import FrontEndParams
from .stft import band_limit, stft
from .validation import check_ambisonic


@dataclass
class FrontEndResult:
    """Everything the pipeline produced for one input buffer."""

    doa_map: analysis.DoaMap
    frames: list
    events: list


class ParametricFrontEnd(BaseEstimator, TransformerMixin):
    """Parametric sound-event localization front-end for first-order ambisonics.

    Transforms a 4-channel B-format signal (internal W, X, Y, Z order) into
    event annotations: per-frame DOA tracks with onsets and offsets.  See
    `FrontEndParams` for the meaning and defaults of every parameter.
    """

    def __init__(self,
                 stft_window_size=256,
                 analysis_freq_range_hz=(0.0, 8000.0),
                 time_avg_radius_r=10,
                 diffuseness_threshold_psi_max=0.5,
                 energy_filter_length=11,
                 std_mask_vicinity_radius=2,
                 std_mask_norm_threshold=0.15,
                 median_min_ratio_b_min=0.5,
                 median_vicinity_radius_kn=(20, 20),
                 resample_min_bins_k_min=1,
                 overlap_std_threshold_sigma_max=10.0,
                 group_max_angle_deg=20.0,
                 group_max_frame_dist=20,
                 event_min_length=8,
                 frame_hop_s=0.02,
                 sample_rate_hz=48000,
                 stft_hop=128,
                 speed_of_sound_c=343.0,
                 impedance_z0=413.3):
        self.stft_window_size = stft_window_size
        self.analysis_freq_range_hz = analysis_freq_range_hz
        self.time_avg_radius_r = time_avg_radius_r
        self.diffuseness_threshold_psi_max = diffuseness_threshold_psi_max
        self.energy_filter_length = energy_filter_length
        self.std_mask_vicinity_radius = std_mask_vicinity_radius
        self.std_mask_norm_threshold = std_mask_norm_threshold
        self.median_min_ratio_b_min = median_min_ratio_b_min
        self.median_vicinity_radius_kn = median_vicinity_radius_kn
        self.resample_min_bins_k_min = resample_min_bins_k_min
        self.overlap_std_threshold_sigma_max = overlap_std_threshold_sigma_max
        self.group_max_angle_deg = group_max_angle_deg
        self.group_max_frame_dist = group_max_frame_dist
        self.event_min_length = event_min_length
        self.frame_hop_s = frame_hop_s
        self.sample_rate_hz = sample_rate_hz
        self.stft_hop = stft_hop
        self.speed_of_sound_c = speed_of_sound_c
        self.impedance_z0 = impedance_z0

    @classmethod
    def from_params(cls, params):
        kwargs = {f: getattr(params, f) for f in cls()._get_param_names()}
        return cls(**kwargs)

    def params(self):
        """The validated FrontEndParams this estimator is configured with."""
        return FrontEndParams(**self.get_params())

    def fit(self, X=None, y=None):
        self.params()
        return self

    def analyze(self, X):
        """Run the full chain; returns a FrontEndResult."""
        params = self.params()
        buf = to_n3d(check_ambisonic(X, params.sample_rate_hz))
        spec = band_limit(stft(buf, params), params.analysis_freq_range_hz)
        doa_map = analysis.analyze_spectrogram(spec, params)
        frames, events = associate(doa_map, params)
        return FrontEndResult(doa_map=doa_map, frames=frames, events=events)

    def transform(self, X):
        """Event annotations for a 4-channel ambisonic signal."""
        return self.analyze(X).events

    def beamform_events(self, X, events):
        """Per-event monophonic signals via the order-1 hypercardioid.

        Each event's beam points at its median DOA for its [onset, offset]
        frame span (converted to samples).
        """
        params = self.params()
        buf = to_n3d(check_ambisonic(X, params.sample_rate_hz))
        hop_samples = params.frame_hop_s * params.sample_rate_hz
        signals = []
        for ev in events:
            i0 = int(round(ev.onset * hop_samples))
            i1 = min(int(round((ev.offset + 1) * hop_samples)), buf.n_samples)
            signals.append(buf.samples[i0:i1] @ sh_eval(ev.median_doa))
        return signals
