"""Event-level prediction: geometric-mean aggregation of patch predictions."""

from __future__ import annotations

import numpy as np


def geometric_mean_probs(prob_rows, floor=1e-12):
    """Element-wise geometric mean of probability vectors, renormalized."""
    p = np.maximum(np.asarray(prob_rows, dtype=np.float64), floor)
    log_mean = np.mean(np.log(p), axis=0)
    g = np.exp(log_mean - log_mean.max())  # stabilized before renormalizing
    return g / g.sum()


def predict_event(model, patches):
    """(class_id, probability vector) for an event's list of TF patches."""
    patches = np.asarray(patches, dtype=np.float32)
    if patches.ndim != 3 or len(patches) == 0:
        raise ValueError("need at least one (T, F) patch")
    probs = geometric_mean_probs(model.predict_proba(patches))
    return int(np.argmax(probs)), probs
