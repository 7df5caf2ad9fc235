import numpy as np
import pytest

from facehr import errors
from facehr.synth import (
    FLASH,
    ArtifactEvent,
    SynthSpec,
    periodic_flashes,
    synth_frames,
    synth_traces,
)
from facehr.trace import extract_channel_traces


def test_clean_green_is_pure_sinusoid():
    spec = SynthSpec(duration=10.0, noise_std=0.0)
    traces, truth = synth_traces(spec)
    t = np.arange(600) / 60.0
    np.testing.assert_allclose(traces.channel("G").samples, 120.0 + np.sin(2 * np.pi * 1.2 * t), atol=1e-9)
    np.testing.assert_array_equal(truth.hr, 72.0)
    np.testing.assert_array_equal(truth.times, np.arange(11.0))


def test_flash_hits_both_regions():
    spec = SynthSpec(duration=20.0, noise_std=0.0, artifacts=(ArtifactEvent(FLASH, 10.0, 11.0, 50.0),))
    flashed, _ = synth_traces(spec)
    plain, _ = synth_traces(SynthSpec(duration=20.0, noise_std=0.0))
    diff_fg = flashed.matrix() - plain.matrix()
    diff_bg = flashed.matrix("background") - plain.matrix("background")
    expected = np.zeros(1200)
    expected[600:660] = 50.0
    for diff in (diff_fg, diff_bg):
        np.testing.assert_allclose(diff, np.tile(expected, (3, 1)), atol=1e-12)


def test_linear_profile_instantaneous_frequency():
    spec = SynthSpec(duration=60.0, fs=600.0, noise_std=0.0, hr_profile=((0.0, 60.0), (60.0, 120.0)))
    traces, _ = synth_traces(spec)
    x = traces.channel("G").samples - 120.0
    t = np.arange(x.size) / spec.fs
    # linearly interpolated upward zero crossings
    i = np.flatnonzero((x[:-1] < 0) & (x[1:] >= 0))
    cross = t[i] + (0 - x[i]) / (x[i + 1] - x[i]) / spec.fs
    k = np.searchsorted(cross, 30.0)
    period = cross[k] - cross[k - 1]
    assert 1.0 / period == pytest.approx(1.5, abs=0.01)


def test_seed_reproducible_and_distinct():
    spec = SynthSpec(duration=5.0)
    a, _ = synth_traces(spec, seed=1)
    b, _ = synth_traces(spec, seed=1)
    c, _ = synth_traces(spec, seed=2)
    np.testing.assert_array_equal(a.matrix(), b.matrix())
    assert not np.array_equal(a.matrix(), c.matrix())


def test_periodic_flashes():
    events = periodic_flashes(600.0)
    assert len(events) == 10
    assert events[0].start == 30.0 and events[0].end == 31.0
    assert all(ev.magnitude == 5.0 for ev in events)


@pytest.mark.parametrize("spec", [
    SynthSpec(duration=0.0),
    SynthSpec(duration=10.0, hr_profile=((0.0, 300.0),)),
    SynthSpec(duration=10.0, artifacts=(ArtifactEvent("smoke", 1, 2, 1),)),
    SynthSpec(duration=10.0, artifacts=(ArtifactEvent(FLASH, 5, 12, 1),)),
])
def test_invalid_specs(spec):
    with pytest.raises(errors.InvalidSpec):
        synth_traces(spec)


def test_static_frames_reproduce_traces():
    spec = SynthSpec(duration=2.0)
    frames, _, roi = synth_frames(spec, seed=4)
    traces, _ = synth_traces(spec, seed=4)
    got = extract_channel_traces(frames, roi)
    assert np.max(np.abs(got.matrix() - traces.matrix())) <= 0.5


def test_face_moves_one_px_per_thirty_frames():
    spec = SynthSpec(duration=2.0, velocity=(2.0, 0.0))
    _, _, roi = synth_frames(spec)
    xs = np.array([b.x for b in roi.boxes])
    np.testing.assert_array_equal(xs - xs[0], np.arange(120) // 30)


def test_zero_pulse_frames_constant():
    spec = SynthSpec(duration=1.0, pulse_amplitude=(0.0, 0.0, 0.0), noise_std=0.0)
    frames, _, _ = synth_frames(spec)
    assert np.all(frames.frames == frames.frames[0])
