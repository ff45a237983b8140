"""SELD evaluation: segment SED metrics, frame DOA metrics, combined score.

SED error rate and F-score are computed in one-second segments from
"active anywhere in the segment" flags per class; DOA error and frame
recall are frame-wise and class-agnostic, with estimated directions matched
to references by minimum-total-central-angle assignment.  The combined
score averages ER, 1-F, DOA/180 deg and 1-FR.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .ambisonics import Direction
from .circstats import central_angle


@dataclass
class FrameLabels:
    """Active (class_id, Direction) tuples per frame index."""

    frames: dict

    @classmethod
    def from_rows(cls, rows):
        """Build from (frame, class_id, azimuth_deg, elevation_deg) rows."""
        frames = {}
        for frame, class_id, az_deg, el_deg in rows:
            frames.setdefault(int(frame), []).append(
                (int(class_id), Direction.from_degrees(float(az_deg), float(el_deg))))
        return cls(frames)

    @property
    def horizon(self):
        return max(self.frames, default=-1) + 1

    def active(self, m):
        return self.frames.get(m, [])


def sed_metrics(est, ref, frames_per_segment=50):
    """Segment-based (error rate, F-score) over the union horizon."""
    horizon = max(est.horizon, ref.horizon)
    n_segments = (horizon + frames_per_segment - 1) // frames_per_segment
    classes = set()
    for labels in (est, ref):
        for tuples in labels.frames.values():
            classes.update(c for c, _ in tuples)
    classes = sorted(classes)

    total_tp = total_fp = total_fn = 0
    total_s = total_d = total_i = total_n = 0
    for seg in range(n_segments):
        lo, hi = seg * frames_per_segment, (seg + 1) * frames_per_segment
        est_active, ref_active = set(), set()
        for m in range(lo, min(hi, horizon)):
            est_active.update(c for c, _ in est.active(m))
            ref_active.update(c for c, _ in ref.active(m))
        fn = len(ref_active - est_active)
        fp = len(est_active - ref_active)
        total_tp += len(est_active & ref_active)
        total_fp += fp
        total_fn += fn
        total_s += min(fn, fp)
        total_d += max(0, fn - fp)
        total_i += max(0, fp - fn)
        total_n += len(ref_active)

    f_den = 2 * total_tp + total_fp + total_fn
    f = 2 * total_tp / f_den if f_den > 0 else 1.0
    if total_n > 0:
        er = (total_s + total_d + total_i) / total_n
    else:
        er = 0.0 if total_i == 0 else float("inf")
    return er, f


def doa_metrics(est, ref):
    """Frame-wise (mean matched DOA error in degrees, frame recall).

    Per frame, estimates are matched to references minimizing the total
    central angle (class-agnostic); frames where either side is empty
    contribute no matched pairs.  Frame recall counts frames whose estimated
    DOA count equals the reference count (0 == 0 included).
    """
    horizon = max(est.horizon, ref.horizon)
    if horizon == 0:
        return 0.0, 1.0
    matched_angles = []
    recall_hits = 0
    for m in range(horizon):
        est_doas = [d for _, d in est.active(m)]
        ref_doas = [d for _, d in ref.active(m)]
        if len(est_doas) == len(ref_doas):
            recall_hits += 1
        if est_doas and ref_doas:
            cost = np.array([[central_angle(e.azimuth, e.elevation,
                                            r.azimuth, r.elevation)
                              for r in ref_doas] for e in est_doas])
            rows, cols = linear_sum_assignment(cost)
            matched_angles.extend(cost[rows, cols])
    doa_deg = float(np.degrees(np.mean(matched_angles))) if matched_angles else 0.0
    return doa_deg, recall_hits / horizon


def seld_score(er, f, doa_deg, fr):
    """Averaged summary: (ER + (1-F) + DOA/180 + (1-FR)) / 4."""
    return (er + (1.0 - f) + doa_deg / 180.0 + (1.0 - fr)) / 4.0


@dataclass
class MetricsReport:
    er: float
    f: float
    doa_deg: float
    fr: float
    seld: float

    def lines(self):
        return [f"ER   : {self.er:.4f}",
                f"F    : {self.f:.4f}",
                f"DOA  : {self.doa_deg:.4f} deg",
                f"FR   : {self.fr:.4f}",
                f"SELD : {self.seld:.4f}"]

    def csv_line(self):
        return (f"{self.er:.6f},{self.f:.6f},{self.doa_deg:.6f},"
                f"{self.fr:.6f},{self.seld:.6f}")


def evaluate(est, ref, frames_per_segment=50):
    """Full metric suite for an (estimate, reference) pair of FrameLabels."""
    er, f = sed_metrics(est, ref, frames_per_segment)
    doa_deg, fr = doa_metrics(est, ref)
    return MetricsReport(er, f, doa_deg, fr, seld_score(er, f, doa_deg, fr))
