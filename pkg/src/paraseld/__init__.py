"""Parametric SELD front-end for first-order ambisonic audio.

TF-domain DOA estimation from the active intensity vector, diffuseness and
variance masking, event association with central-angle clustering, virtual
hypercardioid beamforming, a synthetic-scene oracle, and the SELD metric
suite.
"""

__version__ = "0.1.0"

from .ambisonics import (AmbisonicBuffer, Direction, beamform,
                         encode_plane_wave, sh_eval, to_n3d)
from .analysis import DoaMap, analyze_spectrogram
from .association import EventAnnotation, FrameEstimate, associate
from .config import FrontEndParams, load_params, save_params
from .frontend import FrontEndResult, ParametricFrontEnd
from .metrics import FrameLabels, MetricsReport, evaluate, seld_score
from .scene import EventSpec, SceneSpec, synthesize
from .stft import Spectrogram, band_limit, stft, window_to_frame

__all__ = [
    "AmbisonicBuffer", "Direction", "DoaMap", "EventAnnotation", "EventSpec",
    "FrameEstimate", "FrameLabels", "FrontEndParams", "FrontEndResult",
    "MetricsReport", "ParametricFrontEnd", "SceneSpec", "Spectrogram",
    "analyze_spectrogram", "associate", "band_limit", "beamform",
    "encode_plane_wave", "evaluate", "load_params", "save_params",
    "seld_score", "sh_eval", "stft", "synthesize", "to_n3d",
    "window_to_frame", "__version__",
]
