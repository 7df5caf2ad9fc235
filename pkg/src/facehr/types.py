"""Core value types shared between modules."""
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import NonFinite

CHANNELS = ("R", "G", "B")
FOREGROUND = "foreground"
BACKGROUND = "background"


def _frozen(arr, dtype=np.float64):
    arr = np.array(arr, dtype=dtype)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class RoiBox:
    x: int
    y: int
    w: int
    h: int

    def __post_init__(self):
        if self.x < 0 or self.y < 0 or self.w <= 0 or self.h <= 0:
            raise ValueError(f"invalid box {self}")

    def inside(self, width, height):
        return self.x + self.w <= width and self.y + self.h <= height

    def translated(self, dx, dy, width, height):
        """Shift by (dx, dy) pixels, clamped so the box stays in the frame."""
        x = min(max(self.x + int(dx), 0), width - self.w)
        y = min(max(self.y + int(dy), 0), height - self.h)
        return RoiBox(x, y, self.w, self.h)


@dataclass(frozen=True, eq=False)
class FrameSequence:
    """Decoded RGB8 frames, shape ``(n_frames, height, width, 3)``."""

    width: int
    height: int
    fps: float
    frames: np.ndarray
    timestamps: np.ndarray

    def __post_init__(self):
        frames = np.asarray(self.frames)
        if frames.dtype != np.uint8 or frames.ndim != 4 or frames.shape[1:] != (
            self.height,
            self.width,
            3,
        ):
            raise ValueError(
                f"frames must be uint8 (n, {self.height}, {self.width}, 3), got "
                f"{frames.dtype} {frames.shape}"
            )
        ts = np.asarray(self.timestamps, dtype=np.float64)
        if ts.shape != (frames.shape[0],):
            raise ValueError("one timestamp per frame required")
        if ts.size > 1 and np.any(np.diff(ts) <= 0):
            raise ValueError("timestamps must be strictly increasing")
        frames = frames.copy()
        frames.setflags(write=False)
        object.__setattr__(self, "frames", frames)
        object.__setattr__(self, "timestamps", _frozen(ts))

    @classmethod
    def from_array(cls, frames, fps=60.0):
        frames = np.asarray(frames, dtype=np.uint8)
        n, h, w, _ = frames.shape
        return cls(w, h, float(fps), frames, np.arange(n) / float(fps))

    def __len__(self):
        return self.frames.shape[0]


@dataclass(frozen=True, eq=False)
class HrSeries:
    times: np.ndarray
    hr: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64).ravel()
        hr = np.asarray(self.hr, dtype=np.float64).ravel()
        if t.shape != hr.shape:
            raise ValueError("times and hr must have the same length")
        if t.size > 1 and np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        if not np.all(np.isfinite(hr)) or np.any(hr <= 0):
            raise ValueError("hr values must be finite and positive")
        object.__setattr__(self, "times", _frozen(t))
        object.__setattr__(self, "hr", _frozen(hr))

    def __len__(self):
        return self.times.size

    @property
    def samples(self):
        return list(zip(self.times.tolist(), self.hr.tolist()))


@dataclass(frozen=True, eq=False)
class ChannelTrace:
    samples: np.ndarray
    fs: float
    channel: str = "G"
    region: str = FOREGROUND

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=np.float64).ravel()
        if not np.all(np.isfinite(s)):
            raise NonFinite("trace samples must be finite")
        if not self.fs > 0:
            raise ValueError("fs must be positive")
        if self.channel not in CHANNELS:
            raise ValueError(f"channel must be one of {CHANNELS}")
        if self.region not in (FOREGROUND, BACKGROUND):
            raise ValueError(f"region must be {FOREGROUND!r} or {BACKGROUND!r}")
        object.__setattr__(self, "samples", _frozen(s))
        object.__setattr__(self, "fs", float(self.fs))

    def __len__(self):
        return self.samples.size

    def with_samples(self, samples):
        return replace(self, samples=samples)


@dataclass(frozen=True, eq=False)
class ChannelTraceSet:
    """Foreground R, G, B traces plus optional same-channel background traces."""

    foreground: tuple
    background: Optional[tuple] = None
    fs: float = 60.0
    times: Optional[np.ndarray] = None
    warnings: tuple = field(default_factory=tuple)

    def __post_init__(self):
        fg = tuple(self.foreground)
        if len(fg) != 3:
            raise ValueError("foreground must hold 3 traces")
        members = list(fg)
        bg = None
        if self.background is not None:
            bg = tuple(self.background)
            if len(bg) != 3:
                raise ValueError("background must hold 3 traces")
            members += list(bg)
        n = len(fg[0])
        for tr in members:
            if len(tr) != n or tr.fs != float(self.fs):
                raise ValueError("all traces must share fs and length")
        object.__setattr__(self, "foreground", fg)
        object.__setattr__(self, "background", bg)
        object.__setattr__(self, "fs", float(self.fs))
        if self.times is not None:
            t = _frozen(self.times)
            if t.shape != (n,):
                raise ValueError("times must match the trace length")
            object.__setattr__(self, "times", t)
        object.__setattr__(self, "warnings", tuple(self.warnings))

    def __len__(self):
        return len(self.foreground[0])

    @property
    def has_background(self):
        return self.background is not None

    def channel(self, name, region=FOREGROUND):
        traces = self.foreground if region == FOREGROUND else self.background
        if traces is None:
            raise KeyError(f"no {region} traces")
        return traces[CHANNELS.index(name)]

    def matrix(self, region=FOREGROUND):
        traces = self.foreground if region == FOREGROUND else self.background
        return np.stack([tr.samples for tr in traces])

    @classmethod
    def from_arrays(cls, fg, bg=None, fs=60.0, times=None, warnings=()):
        """Build from (3, n) arrays of foreground and optional background samples."""
        fg_traces = tuple(
            ChannelTrace(row, fs, c, FOREGROUND) for row, c in zip(fg, CHANNELS)
        )
        bg_traces = None
        if bg is not None:
            bg_traces = tuple(
                ChannelTrace(row, fs, c, BACKGROUND) for row, c in zip(bg, CHANNELS)
            )
        return cls(fg_traces, bg_traces, fs, times, tuple(warnings))
