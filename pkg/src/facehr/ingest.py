"""Readers and writers for frame sequences, traces, ground truth and ROI boxes.

On-disk formats
---------------
* Frame manifest: JSON ``{"width", "height", "fps", "frames": [paths]}`` with
  paths relative to the manifest; each frame is a binary PPM (P6, maxval 255).
* Trace CSV: ``t,R,G,B[,R_bg,G_bg,B_bg]``.
* Ground truth / HR CSV: ``t_s,hr_bpm``.
* ROI CSV: ``frame,x,y,w,h``.
"""
import csv
import json
import math
from pathlib import Path

import numpy as np

from .errors import (
    BadMagic,
    BadMaxval,
    BoxOutsideFrame,
    DuplicateIndex,
    GeometryMismatch,
    IndexOutOfRange,
    MalformedFile,
    MissingFile,
    MissingIndex,
    NonMonotoneTime,
    NonNumericCell,
    NonPositiveHr,
    TooFewRows,
)
from .types import ChannelTraceSet, FrameSequence, HrSeries, RoiBox

TRACE_HEADER = ["t", "R", "G", "B"]
TRACE_BG_HEADER = ["R_bg", "G_bg", "B_bg"]
HR_HEADER = ["t_s", "hr_bpm"]
ROI_HEADER = ["frame", "x", "y", "w", "h"]

_WS = b" \t\r\n"


# -- PPM ---------------------------------------------------------------------

def read_ppm(path):
    """Decode a binary P6 PPM with maxval 255 into a (h, w, 3) uint8 array."""
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"{path}: no such frame file")
    data = path.read_bytes()
    if data[:2] != b"P6":
        raise BadMagic(f"{path}: expected magic 'P6', got {data[:2]!r}")
    tokens = []
    pos = 2
    while len(tokens) < 3:
        while pos < len(data) and data[pos] in _WS:
            pos += 1
        if pos < len(data) and data[pos:pos + 1] == b"#":
            raise MalformedFile(f"{path}: header comments are not supported")
        start = pos
        while pos < len(data) and data[pos] not in _WS:
            pos += 1
        if start == pos:
            raise MalformedFile(f"{path}: truncated header")
        tokens.append(data[start:pos])
    try:
        width, height, maxval = (int(tok) for tok in tokens)
    except ValueError:
        raise MalformedFile(f"{path}: non-integer header field") from None
    if maxval != 255:
        raise BadMaxval(f"{path}: maxval {maxval} != 255")
    # exactly one whitespace byte separates the header from the raster
    pos += 1
    raster = data[pos:]
    expected = width * height * 3
    if len(raster) != expected:
        raise GeometryMismatch(
            f"{path}: raster has {len(raster)} bytes, expected {expected}"
        )
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width, 3)


def write_ppm(path, frame):
    frame = np.asarray(frame, dtype=np.uint8)
    h, w, _ = frame.shape
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (w, h))
        fh.write(np.ascontiguousarray(frame).tobytes())


def load_frame_sequence(manifest_path):
    """Load the frames listed in a JSON manifest.

    Timestamps are synthesized as ``i / fps``.
    """
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise MissingFile(f"{manifest_path}: no such manifest")
    try:
        meta = json.loads(manifest_path.read_text(encoding="utf-8"))
        width = int(meta["width"])
        height = int(meta["height"])
        fps = float(meta["fps"])
        names = list(meta["frames"])
    except (ValueError, KeyError, TypeError) as exc:
        raise MalformedFile(f"{manifest_path}: bad manifest ({exc})") from None
    if width <= 0 or height <= 0 or not fps > 0:
        raise MalformedFile(f"{manifest_path}: width, height and fps must be positive")
    if not names:
        raise MalformedFile(f"{manifest_path}: manifest lists no frames")
    frames = np.empty((len(names), height, width, 3), dtype=np.uint8)
    base = manifest_path.parent
    for i, name in enumerate(names):
        path = base / name
        try:
            img = read_ppm(path)
        except GeometryMismatch as exc:
            raise GeometryMismatch(f"frame {i}: {exc}") from None
        if img.shape != (height, width, 3):
            raise GeometryMismatch(
                f"frame {i}: {path} is {img.shape[1]}x{img.shape[0]}, "
                f"manifest says {width}x{height}"
            )
        frames[i] = img
    return FrameSequence(width, height, fps, frames, np.arange(len(names)) / fps)


def write_frame_sequence(seq, directory, manifest_name="manifest.json"):
    """Write frames as PPM files plus a manifest; returns the manifest path."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    digits = max(5, len(str(len(seq))))
    names = []
    for i, frame in enumerate(seq.frames):
        name = f"frame_{i:0{digits}d}.ppm"
        write_ppm(directory / name, frame)
        names.append(name)
    manifest = {"width": seq.width, "height": seq.height, "fps": seq.fps, "frames": names}
    path = directory / manifest_name
    path.write_text(json.dumps(manifest, indent=1) + "\n", encoding="utf-8")
    return path


# -- CSV ---------------------------------------------------------------------

def _read_rows(path, header_options):
    path = Path(path)
    if not path.is_file():
        raise MissingFile(f"{path}: no such file")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise TooFewRows(f"{path}: empty file")
    header = [cell.strip() for cell in rows[0]]
    if header not in header_options:
        raise MalformedFile(f"{path}: unexpected header {header}")
    body = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise MalformedFile(f"{path}:{lineno}: expected {len(header)} cells")
        values = []
        for cell in row:
            try:
                v = float(cell)
            except ValueError:
                raise NonNumericCell(f"{path}:{lineno}: non-numeric cell {cell!r}") from None
            if not math.isfinite(v):
                raise NonNumericCell(f"{path}:{lineno}: non-finite cell {cell!r}")
            values.append(v)
        body.append(values)
    return header, np.array(body, dtype=np.float64).reshape(len(body), len(header))


def _check_times(path, t, min_rows=2):
    if t.size < min_rows:
        raise TooFewRows(f"{path}: need at least {min_rows} rows, got {t.size}")
    bad = np.flatnonzero(np.diff(t) <= 0)
    if bad.size:
        raise NonMonotoneTime(f"{path}: time not increasing at row {bad[0] + 3}")


def load_trace_csv(path):
    """Load per-channel traces; fs is inferred as 1 / median(dt)."""
    header, data = _read_rows(path, [TRACE_HEADER, TRACE_HEADER + TRACE_BG_HEADER])
    t = data[:, 0]
    _check_times(path, t)
    fs = 1.0 / float(np.median(np.diff(t)))
    bg = data[:, 4:7].T if len(header) == 7 else None
    return ChannelTraceSet.from_arrays(data[:, 1:4].T, bg, fs=fs, times=t)


def _fmt(v):
    return repr(float(v))


def write_trace_csv(path, traces, times=None):
    """Write a ChannelTraceSet; times default to the set's own or ``i / fs``."""
    if times is None:
        times = traces.times if traces.times is not None else np.arange(len(traces)) / traces.fs
    cols = [np.asarray(times)] + [tr.samples for tr in traces.foreground]
    header = list(TRACE_HEADER)
    if traces.background is not None:
        cols += [tr.samples for tr in traces.background]
        header += TRACE_BG_HEADER
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in zip(*cols):
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def load_ground_truth(path):
    """Load a ``t_s,hr_bpm`` file into an HrSeries."""
    _, data = _read_rows(path, [HR_HEADER])
    t, hr = data[:, 0], data[:, 1]
    _check_times(path, t)
    bad = np.flatnonzero(hr <= 0)
    if bad.size:
        raise NonPositiveHr(f"{path}: hr_bpm {hr[bad[0]]} at row {bad[0] + 2}")
    return HrSeries(t, hr)


def load_hr_csv(path):
    """Load an estimated HR series (same format as ground truth, one row allowed)."""
    _, data = _read_rows(path, [HR_HEADER])
    t, hr = data[:, 0], data[:, 1]
    _check_times(path, t, min_rows=1)
    bad = np.flatnonzero(hr <= 0)
    if bad.size:
        raise NonPositiveHr(f"{path}: hr_bpm {hr[bad[0]]} at row {bad[0] + 2}")
    return HrSeries(t, hr)


def write_hr_csv(path, series):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(HR_HEADER) + "\n")
        for t, hr in zip(series.times, series.hr):
            fh.write(f"{_fmt(t)},{_fmt(hr)}\n")


write_ground_truth = write_hr_csv


def load_roi_boxes(path, n_frames):
    """Load one box per frame index 0..n_frames-1, ordered by index."""
    _, data = _read_rows(path, [ROI_HEADER])
    boxes = [None] * n_frames
    for row in data:
        if not np.all(row == np.round(row)):
            raise MalformedFile(f"{path}: ROI fields must be integers")
        idx, x, y, w, h = (int(v) for v in row)
        if not 0 <= idx < n_frames:
            raise IndexOutOfRange(f"{path}: frame index {idx} outside 0..{n_frames - 1}")
        if boxes[idx] is not None:
            raise DuplicateIndex(f"{path}: frame index {idx} listed twice")
        try:
            boxes[idx] = RoiBox(x, y, w, h)
        except ValueError as exc:
            raise MalformedFile(f"{path}: {exc}") from None
    missing = [i for i, b in enumerate(boxes) if b is None]
    if missing:
        raise MissingIndex(f"{path}: no box for frame {missing[0]}")
    return boxes


def check_boxes_inside(boxes, width, height):
    for i, box in enumerate(boxes):
        if not box.inside(width, height):
            raise BoxOutsideFrame(f"box for frame {i} ({box}) exceeds {width}x{height}")


def write_roi_boxes(path, boxes):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(",".join(ROI_HEADER) + "\n")
        for i, b in enumerate(boxes):
            fh.write(f"{i},{b.x},{b.y},{b.w},{b.h}\n")
