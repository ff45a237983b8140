"""CRNN event classifier for beamformed monophonic event clips."""

__version__ = "0.1.0"

from .features import extract_patches, extract_patches_from_wav, log_mel_spectrogram
from .model import (CrnnClassifier, load_checkpoint, parameter_count,
                    save_checkpoint)
from .predict import geometric_mean_probs, predict_event
from .training import TrainConfig, mixup_batch, train

__all__ = [
    "CrnnClassifier", "TrainConfig", "extract_patches",
    "extract_patches_from_wav", "geometric_mean_probs", "load_checkpoint",
    "log_mel_spectrogram", "mixup_batch", "parameter_count", "predict_event",
    "save_checkpoint", "train", "__version__",
]
