"""Association: filtered TF-bin DOAs -> per-frame clusters -> events.

Valid bins are pooled into task frames (0.02 s) through the window-to-frame
map, each active frame's overlap count o(m) in {1, 2} comes from the pooled
angular spread, the pooled directions are clustered with a central-angle
K-means (K = o(m); K = 1 reduces to the circular median), and clusters are
grouped greedily into events with angle and frame-gap thresholds.  Grouping
and postprocessing are sequential over frames by contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ambisonics import Direction
from .circstats import central_angle as _central_angle_raw
from .circstats import circular_median, circular_std
from .stft import window_to_frame


@dataclass
class FrameEstimate:
    """Per-frame pooled DOA statistics and (after clustering) o(m) directions."""

    frame: int
    doas: list = field(default_factory=list)
    raw_count: int = 0
    sigma_az: float = 0.0  # circular std of pooled azimuths, radians
    sigma_el: float = 0.0  # ordinary std of pooled elevations, radians


@dataclass
class EventAnnotation:
    """An event: per-frame DOA track, onset/offset frames, median direction."""

    doa_track: list
    onset: int
    offset: int
    median_doa: Direction
    class_id: int = -1

    @property
    def n_frames(self):
        return self.offset - self.onset + 1


def central_angle(a, b):
    """Great-circle angle between two directions, radians."""
    return _central_angle_raw(a.azimuth, a.elevation, b.azimuth, b.elevation)


def _frame_pools(doa_map, params):
    """Pool valid-bin azimuths/elevations per frame index."""
    n_windows = doa_map.shape[1]
    frames_of_window = window_to_frame(np.arange(n_windows), params)
    pools = {}
    for m in np.unique(frames_of_window):
        cols = np.nonzero(frames_of_window == m)[0]
        sel = doa_map.valid[:, cols]
        if not sel.any():
            continue
        pools[int(m)] = (doa_map.azimuth[:, cols][sel],
                         doa_map.elevation[:, cols][sel])
    return pools


def resample_to_frames(doa_map, params):
    """Active frames with pooled counts and angular spreads.

    A frame is active when at least ``resample_min_bins_k_min`` valid bins
    from its windows pool into it.
    """
    estimates = []
    for m, (az, el) in sorted(_frame_pools(doa_map, params).items()):
        if az.size < params.resample_min_bins_k_min:
            continue
        sigma_az = circular_std(az) if az.size > 0 else 0.0
        sigma_el = float(np.std(el))
        estimates.append(FrameEstimate(frame=m, raw_count=int(az.size),
                                       sigma_az=sigma_az, sigma_el=sigma_el))
    return estimates


def estimate_overlap(fe, params):
    """Frame overlap o(m): 1 if sigma_az/2 + sigma_el stays below the threshold."""
    spread_deg = math.degrees(fe.sigma_az / 2.0 + fe.sigma_el)
    return 1 if spread_deg < params.overlap_std_threshold_sigma_max else 2


def _median_direction(az, el):
    return Direction(circular_median(az), float(np.median(el)))


def cluster_frame(fe, bins, k):
    """K-means with central-angle distance and circular-median centroids.

    k = 1 is the circular median of the pool.  k = 2 seeds with the farthest
    pair, iterates assignment/median updates to a cap of 50, and degrades to
    k = 1 when the pool has fewer than 2 distinct directions.
    """
    az, el = (np.asarray(bins[0], float), np.asarray(bins[1], float))
    if az.size == 0:
        raise ValueError("cannot cluster an empty pool")
    if k == 1:
        return [_median_direction(az, el)]
    if k != 2:
        raise ValueError(f"overlap amount must be 1 or 2, got {k}")
    distinct = np.unique(np.stack([az, el], axis=1), axis=0)
    if distinct.shape[0] < 2:
        return [_median_direction(az, el)]

    # farthest-pair seeding on the pooled directions
    angles = _central_angle_raw(az[:, None], el[:, None], az[None, :], el[None, :])
    i, j = np.unravel_index(int(np.argmax(angles)), angles.shape)
    centroids = [Direction(az[i], el[i]), Direction(az[j], el[j])]

    assign = None
    for _ in range(50):
        dist = np.stack([
            _central_angle_raw(az, el, c.azimuth, c.elevation) for c in centroids
        ])
        new_assign = np.argmin(dist, axis=0)
        if assign is not None and np.array_equal(new_assign, assign):
            break
        assign = new_assign
        for c_idx in range(2):
            members = assign == c_idx
            if members.any():
                centroids[c_idx] = _median_direction(az[members], el[members])
    return centroids


def cluster_frames(doa_map, params):
    """resample + overlap + cluster for every active frame."""
    pools = _frame_pools(doa_map, params)
    estimates = resample_to_frames(doa_map, params)
    for fe in estimates:
        fe.doas = cluster_frame(fe, pools[fe.frame], estimate_overlap(fe, params))
    return estimates


class _OpenEvent:
    __slots__ = ("track", "last_frame")

    def __init__(self, frame, doa):
        self.track = [(frame, doa)]
        self.last_frame = frame

    @property
    def onset(self):
        return self.track[0][0]

    def median(self):
        az = np.array([d.azimuth for _, d in self.track])
        el = np.array([d.elevation for _, d in self.track])
        return _median_direction(az, el)

    def add(self, frame, doa):
        self.track.append((frame, doa))
        self.last_frame = frame


def group_into_events(frames, params):
    """Greedy sequential grouping of clustered DOAs into events.

    A clustered DOA joins the open event whose running median is nearest,
    provided the central angle is below ``group_max_angle_deg`` and the frame
    gap below ``group_max_frame_dist``; otherwise it opens a new event.
    Events whose gap has grown past the limit close and never reopen; an
    event takes at most one clustered DOA per frame.
    """
    max_angle = math.radians(params.group_max_angle_deg)
    max_gap = params.group_max_frame_dist
    open_events, closed = [], []
    for fe in sorted(frames, key=lambda f: f.frame):
        m = fe.frame
        still_open = []
        for ev in open_events:
            (closed if m - ev.last_frame >= max_gap else still_open).append(ev)
        open_events = still_open
        fed = set()
        for doa in fe.doas:
            best = None
            best_angle = max_angle
            for ev in open_events:
                if id(ev) in fed:
                    continue
                angle = central_angle(doa, ev.median())
                if angle < best_angle or (angle == best_angle and best is not None
                                          and ev.onset < best.onset):
                    best, best_angle = ev, angle
            if best is None:
                best = _OpenEvent(m, doa)
                open_events.append(best)
            else:
                best.add(m, doa)
            fed.add(id(best))
    closed.extend(open_events)

    events = []
    for ev in sorted(closed, key=lambda e: e.onset):
        events.append(EventAnnotation(doa_track=list(ev.track), onset=ev.onset,
                                      offset=ev.last_frame, median_doa=ev.median()))
    return events


def _refresh(event):
    event.onset = event.doa_track[0][0]
    event.offset = event.doa_track[-1][0]
    az = np.array([d.azimuth for _, d in event.doa_track])
    el = np.array([d.elevation for _, d in event.doa_track])
    event.median_doa = _median_direction(az, el)


def postprocess_events(events, frames, params):
    """Onset delay at overlapped frames, then minimum-length pruning.

    An event's onset advances (dropping its first track frame) while the
    frame's overlap estimate is >= 2 *and* the event did not itself trigger
    that overlap, i.e. its onset does not lie inside the span of an event
    opened strictly earlier; the shelter test is re-evaluated after each
    advance.  Events shorter than ``event_min_length`` frames are dropped.
    """
    overlap = {fe.frame: estimate_overlap(fe, params) for fe in frames}
    events = sorted((EventAnnotation(list(e.doa_track), e.onset, e.offset,
                                     e.median_doa, e.class_id) for e in events),
                    key=lambda e: e.onset)
    for ev in events:
        while ev.doa_track:
            m = ev.doa_track[0][0]
            if overlap.get(m, 1) < 2:
                break
            sheltered = any(other is not ev and other.doa_track
                            and other.doa_track[0][0] < m <= other.doa_track[-1][0]
                            for other in events)
            if sheltered:
                break
            ev.doa_track.pop(0)
        if ev.doa_track:
            _refresh(ev)

    kept = [ev for ev in events
            if ev.doa_track and ev.n_frames >= params.event_min_length]
    return sorted(kept, key=lambda e: e.onset)


def emit_metadata(events, params):
    """Event-level and frame-level metadata rows for the CSV writers.

    Event rows: (class, onset_s, offset_s, azimuth_deg, elevation_deg);
    frame rows: (frame, class, azimuth_deg, elevation_deg), angles rounded
    to nearest integer degrees with azimuth in (-180, 180].
    """
    event_rows, frame_rows = [], []
    for ev in sorted(events, key=lambda e: e.onset):
        az, el = _round_degrees(ev.median_doa)
        event_rows.append((ev.class_id, ev.onset * params.frame_hop_s,
                           ev.offset * params.frame_hop_s, az, el))
        for m, doa in ev.doa_track:
            f_az, f_el = _round_degrees(doa)
            frame_rows.append((m, ev.class_id, f_az, f_el))
    frame_rows.sort(key=lambda r: (r[0], r[1]))
    return event_rows, frame_rows


def _round_degrees(doa):
    az = int(np.rint(doa.azimuth_deg))
    el = int(np.rint(doa.elevation_deg))
    if az == -180:
        az = 180
    return az, el


def associate(doa_map, params):
    """Full Section-2.2 chain: returns (frame estimates, events)."""
    frames = cluster_frames(doa_map, params)
    events = group_into_events(frames, params)
    return frames, postprocess_events(events, frames, params)
