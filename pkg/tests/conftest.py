import numpy as np
import pytest

from paraseld import Direction, FrontEndParams, ParametricFrontEnd
from paraseld.scene import EventSpec, SceneSpec, synthesize


@pytest.fixture
def params():
    return FrontEndParams()


@pytest.fixture
def front_end():
    return ParametricFrontEnd()


@pytest.fixture(scope="session")
def warm_jit():
    """Compile (or load from cache) the jitted median kernel once per session."""
    spec = SceneSpec(duration_s=0.4, seed=0, events=[
        EventSpec(kind="noise-burst", direction=Direction(0.0, 0.0),
                  onset_s=0.05, offset_s=0.35)])
    buf, _ = synthesize(spec)
    ParametricFrontEnd().analyze(buf)
    return True


def single_event_scene(seed, direction, duration_s=2.0, onset_s=0.4, offset_s=1.6,
                       kind="noise-burst", class_id=0, **kwargs):
    spec = SceneSpec(duration_s=duration_s, seed=seed, events=[
        EventSpec(kind=kind, direction=direction, onset_s=onset_s,
                  offset_s=offset_s, class_id=class_id, **kwargs)])
    return synthesize(spec)


def brute_circular_distance(a, b):
    d = np.abs(np.asarray(a) - np.asarray(b)) % (2 * np.pi)
    return np.minimum(d, 2 * np.pi - d)


def brute_circular_median(angles):
    """Independent oracle: try every sample as the candidate.

    Ties (common for even pools: the distance sum is constant on the arc
    between the two middle samples) resolve to the smaller angle; detection
    uses the same tolerance the implementation documents.
    """
    a = np.mod(np.asarray(angles, float) + np.pi, 2 * np.pi) - np.pi
    a[a == -np.pi] = np.pi
    sums = brute_circular_distance(a[:, None], a[None, :]).sum(axis=1)
    tied = sums <= np.min(sums) + 1e-12 * a.size
    return float(np.min(a[tied]))  # ties -> smaller angle
