import itertools
import math

import numpy as np
import pytest

from paraseld import Direction, FrontEndParams
from paraseld.association import (EventAnnotation, FrameEstimate, associate,
                                  central_angle, cluster_frame, cluster_frames,
                                  emit_metadata, estimate_overlap,
                                  group_into_events, postprocess_events,
                                  resample_to_frames)
from paraseld.circstats import central_angle as raw_angle

from conftest import brute_circular_median, single_event_scene


def fe(frame, sigma_az_deg=0.0, sigma_el_deg=0.0, doas=(), count=10):
    return FrameEstimate(frame=frame, doas=list(doas), raw_count=count,
                         sigma_az=math.radians(sigma_az_deg),
                         sigma_el=math.radians(sigma_el_deg))


def analyzed(buf, params=None):
    from paraseld import ParametricFrontEnd
    front = (ParametricFrontEnd() if params is None
             else ParametricFrontEnd.from_params(params))
    from paraseld.analysis import analyze_spectrogram
    from paraseld.stft import band_limit, stft
    from paraseld.ambisonics import to_n3d
    p = front.params()
    spec = band_limit(stft(to_n3d(buf), p), p.analysis_freq_range_hz)
    return analyze_spectrogram(spec, p), p


class TestResample:
    def test_all_invalid_gives_no_frames(self, params, warm_jit):
        buf, _ = single_event_scene(0, Direction(0, 0))
        dmap, p = analyzed(buf)
        dmap.valid[:] = False
        assert resample_to_frames(dmap, p) == []

    def test_plane_wave_event_frames(self, params, warm_jit):
        # event spanning frames 10..40 exactly (0.2 s .. 0.82 s)
        buf, refs = single_event_scene(1, Direction.from_degrees(30, 10),
                                       duration_s=1.0, onset_s=0.2, offset_s=0.82)
        assert refs[0].onset == 10 and refs[0].offset == 40
        dmap, p = analyzed(buf)
        estimates = resample_to_frames(dmap, p)
        frames = [e.frame for e in estimates]
        assert frames == list(range(10, 41))
        spreads = [math.degrees(e.sigma_az + e.sigma_el) for e in estimates]
        assert max(spreads) < 1.0

    def test_single_bin_frame_is_active(self, params):
        from paraseld.analysis import DoaMap
        shape = (43, 374)  # 1 s at the default window/hop
        valid = np.zeros(shape, bool)
        valid[5, 100] = True
        dmap = DoaMap(azimuth=np.zeros(shape), elevation=np.zeros(shape),
                      energy=np.ones(shape), diffuseness=np.zeros(shape),
                      valid=valid, intensity=np.zeros((3,) + shape),
                      energy_raw=np.ones(shape))
        estimates = resample_to_frames(dmap, params)
        assert len(estimates) == 1
        assert estimates[0].raw_count == 1


class TestEstimateOverlap:
    def test_paper_arithmetic(self, params):
        assert estimate_overlap(fe(0, 4.0, 6.0), params) == 1   # 4/2+6 = 8 < 10

    def test_zero_spread(self, params):
        assert estimate_overlap(fe(0, 0.0, 0.0), params) == 1

    def test_boundary_is_strict(self, params):
        assert estimate_overlap(fe(0, 0.0, 10.0), params) == 2  # 10 < 10 fails

    def test_wide_spread(self, params):
        assert estimate_overlap(fe(0, 40.0, 20.0), params) == 2

    def test_two_simultaneous_sources_give_o2(self, params, warm_jit):
        from paraseld.scene import EventSpec, SceneSpec, synthesize
        spec = SceneSpec(duration_s=1.2, seed=23, events=[
            EventSpec(kind="noise-burst", direction=Direction.from_degrees(0, 0),
                      onset_s=0.2, offset_s=1.0, band_hz=(300.0, 3200.0)),
            EventSpec(kind="noise-burst", direction=Direction.from_degrees(90, 0),
                      onset_s=0.2, offset_s=1.0, band_hz=(4300.0, 7600.0))])
        buf, _ = synthesize(spec)
        dmap, p = analyzed(buf)
        estimates = resample_to_frames(dmap, p)
        mid = [fe_ for fe_ in estimates if 15 <= fe_.frame <= 45]
        assert mid
        assert all(estimate_overlap(fe_, p) == 2 for fe_ in mid)


def brute_best_two_clustering(az, el):
    """Oracle: best 2-partition by total central angle to circular-median centroids."""
    n = az.size
    best_cost, best_centroids = np.inf, None
    for bits in itertools.product([0, 1], repeat=n):
        bits = np.array(bits, bool)
        if not bits.any() or bits.all():
            continue
        cents, cost = [], 0.0
        for side in (bits, ~bits):
            c_az = brute_circular_median(az[side])
            c_el = float(np.median(el[side]))
            cents.append(Direction(c_az, c_el))
            cost += raw_angle(az[side], el[side], c_az, c_el).sum()
        if cost < best_cost:
            best_cost, best_centroids = cost, cents
    return best_centroids


class TestClusterFrame:
    def test_identical_bins_k1(self, params):
        az = np.full(9, math.radians(30.0))
        el = np.full(9, math.radians(10.0))
        (d,) = cluster_frame(fe(0), (az, el), 1)
        assert d.azimuth_deg == pytest.approx(30.0)
        assert d.elevation_deg == pytest.approx(10.0)

    def test_even_split_k2(self, params):
        az = np.radians(np.array([0.0] * 5 + [90.0] * 5))
        el = np.zeros(10)
        got = cluster_frame(fe(0), (az, el), 2)
        got_az = sorted(round(d.azimuth_deg) for d in got)
        assert got_az == [0, 90]
        assert all(abs(d.elevation_deg) < 1.0 for d in got)

    def test_wraparound_median_k1(self, params):
        az = np.radians([179.0, -179.0, 177.0])
        el = np.zeros(3)
        (d,) = cluster_frame(fe(0), (az, el), 1)
        assert d.azimuth_deg == pytest.approx(179.0)

    def test_k1_equals_bruteforce_for_small_pools(self, params):
        rng = np.random.default_rng(13)
        for _ in range(200):
            n = rng.integers(1, 8)
            az = rng.uniform(-np.pi, np.pi, n)
            el = rng.uniform(-np.pi / 2, np.pi / 2, n)
            (d,) = cluster_frame(fe(0), (az, el), 1)
            assert d.azimuth == brute_circular_median(az)
            assert d.elevation == np.median(el)

    def test_k2_matches_bruteforce_on_separated_clusters(self, params):
        rng = np.random.default_rng(14)
        for _ in range(60):
            n = int(rng.integers(4, 8))
            n_a = int(rng.integers(2, n - 1))
            center_a = rng.uniform(-np.pi, np.pi)
            center_b = center_a + rng.uniform(np.radians(60), np.radians(120))
            spread = np.radians(8.0)
            az = np.concatenate([center_a + rng.uniform(-spread, spread, n_a),
                                 center_b + rng.uniform(-spread, spread, n - n_a)])
            az = np.mod(az + np.pi, 2 * np.pi) - np.pi
            el = rng.uniform(-0.2, 0.2, n)
            got = cluster_frame(fe(0), (az, el), 2)
            want = brute_best_two_clustering(az, el)
            got_sorted = sorted(got, key=lambda d: d.azimuth)
            want_sorted = sorted(want, key=lambda d: d.azimuth)
            for g, w in zip(got_sorted, want_sorted):
                assert g.azimuth == pytest.approx(w.azimuth, abs=1e-12)
                assert g.elevation == pytest.approx(w.elevation, abs=1e-12)

    def test_k2_degrades_with_identical_bins(self, params):
        az = np.full(6, 0.5)
        el = np.full(6, -0.1)
        got = cluster_frame(fe(0), (az, el), 2)
        assert len(got) == 1

    def test_empty_pool_raises(self, params):
        with pytest.raises(ValueError):
            cluster_frame(fe(0), (np.array([]), np.array([])), 1)


class TestCentralAngle:
    def test_zero_for_equal(self):
        d = Direction.from_degrees(12, 34)
        assert central_angle(d, d) < 1e-7

    def test_quarter(self):
        a, b = Direction.from_degrees(0, 0), Direction.from_degrees(90, 0)
        assert math.degrees(central_angle(a, b)) == pytest.approx(90.0)

    def test_poles(self):
        for az in (-170.0, 0.0, 45.0):
            a = Direction.from_degrees(0, 90)
            b = Direction.from_degrees(az, -90)
            assert math.degrees(central_angle(a, b)) == pytest.approx(180.0)


def frames_with_track(ms, direction, sigma=(0.0, 0.0)):
    return [fe(m, *sigma, doas=[direction]) for m in ms]


class TestGrouping:
    def test_single_track_single_event(self, params):
        d = Direction.from_degrees(50, -10)
        events = group_into_events(frames_with_track(range(5, 45), d), params)
        assert len(events) == 1
        assert events[0].onset == 5
        assert events[0].offset == 44

    def test_two_simultaneous_tracks(self, params):
        d1, d2 = Direction.from_degrees(0, 0), Direction.from_degrees(90, 0)
        frames = [fe(m, doas=[d1, d2]) for m in range(30)]
        events = group_into_events(frames, params)
        assert len(events) == 2
        az = sorted(round(e.median_doa.azimuth_deg) for e in events)
        assert az == [0, 90]

    def test_gap_longer_than_threshold_splits(self, params):
        d = Direction.from_degrees(10, 0)
        ms = list(range(0, 20)) + list(range(45, 65))  # 25-frame gap
        events = group_into_events(frames_with_track(ms, d), params)
        assert len(events) == 2

    def test_gap_at_threshold_splits(self, params):
        d = Direction.from_degrees(10, 0)
        ms = list(range(0, 10)) + list(range(29, 40))  # gap of exactly 20
        events = group_into_events(frames_with_track(ms, d), params)
        assert len(events) == 2

    def test_gap_below_threshold_joins(self, params):
        d = Direction.from_degrees(10, 0)
        ms = list(range(0, 10)) + list(range(28, 40))  # gap of 19 < 20
        events = group_into_events(frames_with_track(ms, d), params)
        assert len(events) == 1

    def test_angle_threshold_splits(self, params):
        frames = (frames_with_track(range(0, 10), Direction.from_degrees(0, 0))
                  + frames_with_track(range(10, 20), Direction.from_degrees(25, 0)))
        events = group_into_events(frames, params)
        assert len(events) == 2

    def test_no_shared_clusters_and_single_per_frame(self, params):
        rng = np.random.default_rng(15)
        frames = []
        for m in range(40):
            doas = [Direction(rng.uniform(-np.pi, np.pi), rng.uniform(-1, 1))
                    for _ in range(rng.integers(1, 3))]
            frames.append(fe(m, doas=doas))
        events = group_into_events(frames, params)
        n_clusters = sum(len(f.doas) for f in frames)
        assert sum(len(e.doa_track) for e in events) == n_clusters
        for e in events:
            ms = [m for m, _ in e.doa_track]
            assert len(ms) == len(set(ms))

    def test_rotation_invariance(self, params):
        rng = np.random.default_rng(16)
        base = []
        for m in range(60):
            if m % 17 == 0:
                continue
            az = 0.3 + 0.002 * m + rng.normal(0, 0.01)
            base.append(fe(m, doas=[Direction(az, 0.2 + rng.normal(0, 0.01))]))
        delta = 1.234
        rotated = [fe(f.frame,
                      doas=[Direction(d.azimuth + delta, d.elevation)
                            for d in f.doas]) for f in base]
        ev1 = group_into_events(base, params)
        ev2 = group_into_events(rotated, params)
        assert len(ev1) == len(ev2)
        for a, b in zip(ev1, ev2):
            assert (a.onset, a.offset) == (b.onset, b.offset)
            got = (b.median_doa.azimuth - a.median_doa.azimuth) % (2 * np.pi)
            assert got == pytest.approx(delta % (2 * np.pi), abs=1e-9)


class TestPostprocess:
    def test_short_event_discarded(self, params):
        d = Direction.from_degrees(0, 0)
        frames = frames_with_track(range(0, 7), d)
        events = group_into_events(frames, params)
        assert postprocess_events(events, frames, params) == []

    def test_min_length_event_kept(self, params):
        d = Direction.from_degrees(0, 0)
        frames = frames_with_track(range(0, 8), d)
        events = group_into_events(frames, params)
        kept = postprocess_events(events, frames, params)
        assert len(kept) == 1
        assert kept[0].n_frames == 8

    def test_second_event_inside_first_not_delayed(self, params):
        # hand-traced: B opens mid-A with o(m) = 2 on its first frames; B
        # itself triggered the overlap (it joined A's open span) -> no delay
        d_a = Direction.from_degrees(0, 0)
        d_b = Direction.from_degrees(90, 0)
        frames = []
        for m in range(0, 30):
            if 10 <= m < 13:
                frames.append(fe(m, sigma_az_deg=40.0, doas=[d_a, d_b]))
            elif m < 20:
                frames.append(fe(m, doas=[d_a]))
            else:
                frames.append(fe(m, sigma_az_deg=40.0, doas=[d_a, d_b]))
        events = group_into_events(frames, params)
        assert len(events) == 2
        b_before = next(e for e in events if round(e.median_doa.azimuth_deg) == 90)
        assert b_before.onset == 10
        kept = postprocess_events(events, frames, params)
        b_after = next(e for e in kept if round(e.median_doa.azimuth_deg) == 90)
        assert b_after.onset == 10  # delayed by 0 frames

    def test_simultaneous_onsets_both_survive(self, params):
        # two events open at the same frame with o = 2 throughout; each stops
        # advancing once the other's (earlier-opened, after one advance) span
        # shelters it, so both survive nearly intact
        d_a = Direction.from_degrees(0, 0)
        d_b = Direction.from_degrees(90, 0)
        frames = [fe(m, sigma_az_deg=40.0, doas=[d_a, d_b]) for m in range(0, 30)]
        events = group_into_events(frames, params)
        assert len(events) == 2
        kept = postprocess_events(events, frames, params)
        assert len(kept) == 2
        onsets = sorted(e.onset for e in kept)
        assert onsets[0] <= 1 and onsets[1] <= 2
        for e in kept:
            assert e.offset == 29

    def test_lone_event_opening_at_overlap_frame_is_delayed(self, params):
        # o >= 2 at the event's first frames with no earlier event sheltering
        # it: the onset advances to the first calm frame
        d = Direction.from_degrees(0, 0)
        frames = ([fe(m, sigma_az_deg=40.0, doas=[d]) for m in range(0, 3)]
                  + [fe(m, doas=[d]) for m in range(3, 20)])
        events = group_into_events(frames, params)
        assert len(events) == 1
        kept = postprocess_events(events, frames, params)
        assert len(kept) == 1
        assert kept[0].onset == 3

    def test_mid_event_overlap_does_not_touch_onset(self, params):
        d = Direction.from_degrees(0, 0)
        frames = [fe(m, sigma_az_deg=(40.0 if 10 <= m < 12 else 0.0), doas=[d])
                  for m in range(0, 20)]
        events = group_into_events(frames, params)
        kept = postprocess_events(events, frames, params)
        assert kept[0].onset == 0


class TestEmitMetadata:
    def test_single_event_row(self, params):
        d = Direction.from_degrees(30, 10)
        track = [(m, d) for m in range(10, 41)]
        ev = EventAnnotation(doa_track=track, onset=10, offset=40,
                             median_doa=d, class_id=3)
        event_rows, frame_rows = emit_metadata([ev], params)
        assert event_rows == [(3, pytest.approx(0.20), pytest.approx(0.80), 30, 10)]
        assert len(frame_rows) == 31
        assert frame_rows[0] == (10, 3, 30, 10)

    def test_empty_events(self, params):
        assert emit_metadata([], params) == ([], [])

    def test_rows_ordered_by_onset(self, params):
        d = Direction.from_degrees(0, 0)
        ev1 = EventAnnotation([(20, d)], 20, 20, d, 1)
        ev2 = EventAnnotation([(5, d)], 5, 5, d, 2)
        event_rows, _ = emit_metadata([ev1, ev2], params)
        assert [r[0] for r in event_rows] == [2, 1]

    def test_azimuth_wraps_to_positive_180(self, params):
        d = Direction.from_degrees(-179.7, 0)
        ev = EventAnnotation([(0, d)], 0, 0, d, 0)
        event_rows, frame_rows = emit_metadata([ev], params)
        assert event_rows[0][3] == 180
        assert frame_rows[0][2] == 180


class TestDeterminism:
    def test_bit_identical_metadata_across_runs(self, params, warm_jit):
        buf, _ = single_event_scene(17, Direction.from_degrees(-120, 25))
        dmap, p = analyzed(buf)
        out = []
        for _ in range(2):
            frames, events = associate(dmap, p)
            out.append(emit_metadata(events, p))
        assert out[0] == out[1]
