"""Synthetic traces and videos with known heart rate and scripted lighting artifacts."""
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSpec
from .track import EXTERNAL, RoiTrack
from .types import ChannelTraceSet, FrameSequence, HrSeries, RoiBox

FLASH = "flash"
FOREGROUND_DRIFT = "drift"
SPLIT_LIGHTING = "split"
ARTIFACT_KINDS = (FLASH, FOREGROUND_DRIFT, SPLIT_LIGHTING)

HR_MIN, HR_MAX = 42.0, 240.0


@dataclass(frozen=True)
class ArtifactEvent:
    """A lighting disturbance active on ``[start, end)``.

    ``flash`` adds ``magnitude`` to foreground and background; ``drift`` adds
    a half-sine bump peaking at ``magnitude`` to the foreground only;
    ``split`` adds a constant ``magnitude`` to the foreground only.
    """

    kind: str
    start: float
    end: float
    magnitude: float


@dataclass(frozen=True)
class SynthSpec:
    duration: float
    fs: float = 60.0
    hr_profile: tuple = ((0.0, 72.0),)
    pulse_amplitude: tuple = (0.5, 1.0, 0.5)
    noise_std: float = 0.2
    artifacts: tuple = ()
    base: tuple = (180.0, 120.0, 100.0)
    background_base: tuple = (70.0, 80.0, 100.0)
    velocity: tuple = (0.0, 0.0)  # face motion in px/s, frames only
    texture: float = 10.0

    def validate(self):
        if not self.duration > 0 or not self.fs > 0:
            raise InvalidSpec("duration and fs must be positive")
        if not self.hr_profile:
            raise InvalidSpec("hr_profile needs at least one breakpoint")
        times = [t for t, _ in self.hr_profile]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise InvalidSpec("hr_profile times must be strictly increasing")
        for _, bpm in self.hr_profile:
            if not HR_MIN <= bpm <= HR_MAX:
                raise InvalidSpec(f"bpm {bpm} outside [{HR_MIN}, {HR_MAX}]")
        if len(self.pulse_amplitude) != 3 or len(self.base) != 3 or len(self.background_base) != 3:
            raise InvalidSpec("per-channel parameters need 3 values")
        if self.noise_std < 0:
            raise InvalidSpec("noise_std must be >= 0")
        for ev in self.artifacts:
            if ev.kind not in ARTIFACT_KINDS:
                raise InvalidSpec(f"unknown artifact kind {ev.kind!r}")
            if not 0 <= ev.start < ev.end <= self.duration:
                raise InvalidSpec(f"artifact interval [{ev.start}, {ev.end}] outside the recording")
        return self

    @property
    def n_samples(self):
        return int(round(self.duration * self.fs))


def periodic_flashes(duration, every=60.0, length=1.0, magnitude=5.0, first=None):
    """Flash events of ``length`` seconds repeating every ``every`` seconds."""
    start = every / 2.0 if first is None else first
    events = []
    while start + length <= duration:
        events.append(ArtifactEvent(FLASH, start, start + length, magnitude))
        start += every
    return tuple(events)


def hr_at(spec, t):
    times = np.array([p[0] for p in spec.hr_profile], dtype=np.float64)
    bpm = np.array([p[1] for p in spec.hr_profile], dtype=np.float64)
    return np.interp(t, times, bpm)


def pulse_phase(spec, t):
    """2*pi times the running trapezoidal integral of hr/60 over the sample grid."""
    rate = hr_at(spec, t) / 60.0
    steps = 0.5 * (rate[1:] + rate[:-1]) * np.diff(t)
    return 2.0 * np.pi * np.concatenate([[0.0], np.cumsum(steps)])


def artifact_terms(spec, t):
    """Additive (foreground, background) artifact signals, each shape (n,)."""
    fg = np.zeros_like(t)
    bg = np.zeros_like(t)
    for ev in spec.artifacts:
        on = (t >= ev.start) & (t < ev.end)
        if ev.kind == FLASH:
            fg[on] += ev.magnitude
            bg[on] += ev.magnitude
        elif ev.kind == FOREGROUND_DRIFT:
            fg[on] += ev.magnitude * np.sin(np.pi * (t[on] - ev.start) / (ev.end - ev.start))
        else:
            fg[on] += ev.magnitude
    return fg, bg


def _ground_truth(spec):
    t = np.arange(0.0, np.floor(spec.duration) + 1.0)
    return HrSeries(t, hr_at(spec, t))


def synth_traces(spec, seed=42):
    """Foreground/background R, G, B traces plus the 1 Hz ground-truth HR.

    Returns
    -------
    traces : ChannelTraceSet
    truth : HrSeries
    """
    spec.validate()
    n = spec.n_samples
    t = np.arange(n) / spec.fs
    rng = np.random.default_rng(seed)
    wave = np.sin(pulse_phase(spec, t))
    art_fg, art_bg = artifact_terms(spec, t)
    amp = np.asarray(spec.pulse_amplitude, dtype=np.float64)[:, None]
    fg = np.asarray(spec.base, dtype=np.float64)[:, None] + amp * wave + art_fg
    bg = np.asarray(spec.background_base, dtype=np.float64)[:, None] + art_bg
    if spec.noise_std > 0:
        fg = fg + rng.normal(0.0, spec.noise_std, fg.shape)
        bg = bg + rng.normal(0.0, spec.noise_std, bg.shape)
    traces = ChannelTraceSet.from_arrays(fg, bg, fs=spec.fs, times=t)
    return traces, _ground_truth(spec)


def face_box(spec, width, height, t):
    """True face box at time ``t``: the central third, shifted by whole pixels."""
    w, h = width // 3, height // 3
    x = width // 3 + int(np.floor(spec.velocity[0] * t + 1e-9))
    y = height // 3 + int(np.floor(spec.velocity[1] * t + 1e-9))
    return RoiBox(min(max(x, 0), width - w), min(max(y, 0), height - h), w, h)


def _zero_mean_texture(rng, shape, amplitude):
    tex = rng.uniform(-amplitude, amplitude, shape)
    return tex - tex.mean(axis=(0, 1), keepdims=True)


def synth_frames(spec, width=64, height=64, seed=42):
    """Render a textured skin-colored rectangle over a background.

    The face's mean color follows the foreground trace of
    :func:`synth_traces` with the same seed; the rest of the frame follows the
    background trace with a faint fixed dither pattern.

    Returns
    -------
    frames : FrameSequence
    truth : HrSeries
    roi : RoiTrack
        The true face box of every frame.
    """
    spec.validate()
    if width < 32 or height < 32:
        raise InvalidSpec("frames must be at least 32x32")
    traces, truth = synth_traces(spec, seed)
    fg = traces.matrix()
    bg = traces.matrix("background")
    tex_rng = np.random.default_rng([seed, 1])
    w, h = width // 3, height // 3
    face_tex = _zero_mean_texture(tex_rng, (h, w, 3), spec.texture)
    scene_tex = _zero_mean_texture(tex_rng, (height, width, 3), 2.0)
    n = len(traces)
    frames = np.empty((n, height, width, 3), dtype=np.uint8)
    boxes = []
    for i in range(n):
        img = scene_tex + bg[:, i]
        box = face_box(spec, width, height, i / spec.fs)
        img[box.y:box.y + h, box.x:box.x + w] = face_tex + fg[:, i]
        frames[i] = np.clip(np.rint(img), 0, 255).astype(np.uint8)
        boxes.append(box)
    seq = FrameSequence(width, height, spec.fs, frames, np.arange(n) / spec.fs)
    return seq, truth, RoiTrack(tuple(boxes), EXTERNAL, False)
