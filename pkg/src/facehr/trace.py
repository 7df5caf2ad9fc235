"""Per-channel intensity traces: extraction from frames and conditioning."""
import numpy as np

from .errors import NonMonotoneTime, TooShort, WindowTooSmall
from .types import BACKGROUND, CHANNELS, FOREGROUND, ChannelTrace, ChannelTraceSet

DETREND_WINDOW_S = 1.5
BACKGROUND_DILATION = 1.5


def dilate_box(box, width, height, factor=BACKGROUND_DILATION):
    """Return (x0, y0, x1, y1) of ``box`` scaled about its center, clamped to the frame."""
    w2 = int(round(box.w * factor))
    h2 = int(round(box.h * factor))
    x0 = box.x - (w2 - box.w) // 2
    y0 = box.y - (h2 - box.h) // 2
    return max(x0, 0), max(y0, 0), min(x0 + w2, width), min(y0 + h2, height)


def extract_channel_traces(frames, roi):
    """Spatial-mean R, G, B over the ROI (foreground) and outside the dilated ROI.

    Parameters
    ----------
    frames : FrameSequence
    roi : RoiTrack or sequence of RoiBox
        One box per frame.

    Returns
    -------
    ChannelTraceSet
        Background traces are omitted, with a warning recorded, when the
        dilated box covers every pixel of some frame.
    """
    boxes = list(getattr(roi, "boxes", roi))
    n = len(frames)
    if len(boxes) != n:
        raise ValueError(f"{len(boxes)} boxes for {n} frames")
    data = frames.frames
    totals = data.sum(axis=(1, 2), dtype=np.int64)
    fg = np.empty((n, 3))
    bg = np.empty((n, 3))
    area = frames.width * frames.height
    empty_bg = False
    for t, box in enumerate(boxes):
        patch = data[t, box.y:box.y + box.h, box.x:box.x + box.w]
        fg[t] = patch.sum(axis=(0, 1), dtype=np.int64) / float(box.w * box.h)
        x0, y0, x1, y1 = dilate_box(box, frames.width, frames.height)
        inner = data[t, y0:y1, x0:x1].sum(axis=(0, 1), dtype=np.int64)
        count = area - (x1 - x0) * (y1 - y0)
        if count == 0:
            empty_bg = True
            continue
        bg[t] = (totals[t] - inner) / float(count)
    warnings = []
    if empty_bg:
        warnings.append("EmptyBackground: dilated ROI covers the whole frame; background traces omitted")
        bg_arr = None
    else:
        bg_arr = bg.T
    return ChannelTraceSet.from_arrays(
        fg.T, bg_arr, fs=frames.fps, times=frames.timestamps, warnings=warnings
    )


def normalize(trace):
    """Zero-mean, unit (population) standard deviation; constant input maps to zeros."""
    x = trace.samples
    if x.size < 2:
        raise TooShort(f"normalize needs at least 2 samples, got {x.size}")
    mean = x.mean()
    std = x.std()
    if std <= 1e-12 * max(1.0, abs(mean)):
        return trace.with_samples(np.zeros_like(x))
    return trace.with_samples((x - mean) / std)


def moving_average(x, half):
    """Centered mean over ``[t - half, t + half]``, truncated at the edges."""
    n = x.size
    csum = np.concatenate([[0.0], np.cumsum(x)])
    idx = np.arange(n)
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half + 1, n)
    return (csum[hi] - csum[lo]) / (hi - lo)


def detrend(trace, window_s=DETREND_WINDOW_S):
    """Subtract a centered moving average spanning ``round(window_s * fs)`` samples.

    An even sample count is widened by one so the window stays symmetric.
    """
    span = int(round(window_s * trace.fs))
    if span < 3:
        raise WindowTooSmall(f"window of {window_s} s at {trace.fs} Hz is {span} samples (< 3)")
    x = trace.samples
    return trace.with_samples(x - moving_average(x, span // 2))


def resample_uniform(times, values, fs_out, channel="G", region=FOREGROUND):
    """Linearly interpolate ``values(times)`` onto ``t0 + k / fs_out`` up to the last time."""
    t = np.asarray(times, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    if t.size < 2 or t.shape != v.shape:
        raise TooShort("resample needs at least 2 (time, value) points")
    if np.any(np.diff(t) <= 0):
        raise NonMonotoneTime("times must be strictly increasing")
    count = int(np.floor((t[-1] - t[0]) * fs_out + 1e-9)) + 1
    grid = t[0] + np.arange(count) / fs_out
    grid = grid[grid <= t[-1]]
    return ChannelTrace(np.interp(grid, t, v), fs_out, channel, region)


def resample_set(traces, fs_out):
    """Resample every member of a set that carries timestamps onto a uniform grid."""
    if traces.times is None:
        raise ValueError("trace set has no timestamps")
    t = traces.times
    fg = [resample_uniform(t, tr.samples, fs_out, c, FOREGROUND).samples
          for tr, c in zip(traces.foreground, CHANNELS)]
    bg = None
    if traces.background is not None:
        bg = [resample_uniform(t, tr.samples, fs_out, c, BACKGROUND).samples
              for tr, c in zip(traces.background, CHANNELS)]
    grid = t[0] + np.arange(len(fg[0])) / fs_out
    return ChannelTraceSet.from_arrays(fg, bg, fs=fs_out, times=grid, warnings=traces.warnings)


def map_set(traces, fn):
    """Apply ``fn`` to every trace of a set, keeping structure and warnings."""
    fg = tuple(fn(tr) for tr in traces.foreground)
    bg = None if traces.background is None else tuple(fn(tr) for tr in traces.background)
    return ChannelTraceSet(fg, bg, traces.fs, traces.times, traces.warnings)
