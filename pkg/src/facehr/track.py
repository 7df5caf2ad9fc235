"""Face ROI sourcing and KLT stabilization.

Boxes come either from an external detector's ROI file or from a simple
RGB skin-color rule. Shi-Tomasi corners picked in the first box are then
followed with pyramidal Lucas-Kanade, and every frame's box is the first
box shifted by the median track displacement.
"""
from dataclasses import dataclass
from math import floor

import numpy as np
from scipy import ndimage

from . import kernels
from ._pykernels import _bilinear
from .errors import GeometryMismatch, NoSkinPixels
from .types import RoiBox

EXTERNAL = "external"
SKIN_FALLBACK = "skin"

PYRAMID_LEVELS = 3
WINDOW = 15
MAX_ITER = 30
CONVERGENCE_PX = 0.01
MAX_RESIDUAL = 20.0
MIN_DISTANCE = 5.0
QUALITY = 0.01
MAX_FEATURES = 50
REDETECT_FRACTION = 0.25

_PYR_KERNEL = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0
_DIFF_KERNEL = np.array([-0.5, 0.0, 0.5])


@dataclass(frozen=True)
class FeaturePoint:
    x: float
    y: float
    id: int
    alive: bool = True


@dataclass(frozen=True)
class RoiTrack:
    boxes: tuple
    source: str = EXTERNAL
    stabilized: bool = False

    def __len__(self):
        return len(self.boxes)


def luma(frame):
    """Unweighted channel mean as float64."""
    return np.asarray(frame, dtype=np.float64).mean(axis=2)


def skin_mask(frame):
    rgb = np.asarray(frame).astype(np.int16)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    spread = rgb.max(axis=2) - rgb.min(axis=2)
    return (
        (r > 95) & (g > 40) & (b > 20) & (spread > 15)
        & (np.abs(r - g) > 15) & (r > g) & (r > b)
    )


def detect_skin_roi(frame):
    """Box around the largest 4-connected skin region, grown 5 % per side."""
    frame = np.asarray(frame)
    if frame.size == 0:
        raise ValueError("empty frame")
    height, width = frame.shape[:2]
    labels, count = ndimage.label(skin_mask(frame))
    if count == 0:
        raise NoSkinPixels("no pixel satisfies the skin rule")
    sizes = np.bincount(labels.ravel())[1:]
    biggest = int(np.argmax(sizes))
    rows, cols = ndimage.find_objects(labels)[biggest]
    w = cols.stop - cols.start
    h = rows.stop - rows.start
    pad_x = floor(0.05 * w + 0.5)
    pad_y = floor(0.05 * h + 0.5)
    x0 = max(cols.start - pad_x, 0)
    y0 = max(rows.start - pad_y, 0)
    x1 = min(cols.stop + pad_x, width)
    y1 = min(rows.stop + pad_y, height)
    return RoiBox(x0, y0, x1 - x0, y1 - y0)


def shi_tomasi_scores(gray):
    """Minimum eigenvalue of the 3x3-summed structure tensor of Sobel gradients."""
    gray = np.asarray(gray, dtype=np.float64)
    gx = ndimage.sobel(gray, axis=1, mode="nearest")
    gy = ndimage.sobel(gray, axis=0, mode="nearest")
    sxx = ndimage.uniform_filter(gx * gx, size=3, mode="nearest") * 9.0
    syy = ndimage.uniform_filter(gy * gy, size=3, mode="nearest") * 9.0
    sxy = ndimage.uniform_filter(gx * gy, size=3, mode="nearest") * 9.0
    half_tr = 0.5 * (sxx + syy)
    root = np.sqrt(np.maximum((0.5 * (sxx - syy)) ** 2 + sxy * sxy, 0.0))
    return np.maximum(half_tr - root, 0.0)


def select_features(gray, roi, max_n=MAX_FEATURES, min_distance=MIN_DISTANCE,
                    quality=QUALITY, first_id=0):
    """Pick up to ``max_n`` strong corners inside ``roi``, at least ``min_distance`` apart."""
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    scores = shi_tomasi_scores(gray)[roi.y:roi.y + roi.h, roi.x:roi.x + roi.w]
    best = scores.max() if scores.size else 0.0
    if not best > 1e-9:
        return []
    peaks = (scores == ndimage.maximum_filter(scores, size=3, mode="constant"))
    peaks &= scores >= quality * best
    ys, xs = np.nonzero(peaks)
    order = np.argsort(-scores[ys, xs], kind="stable")
    chosen = []
    min_d2 = min_distance * min_distance
    for i in order:
        x, y = float(xs[i] + roi.x), float(ys[i] + roi.y)
        if all((x - cx) ** 2 + (y - cy) ** 2 >= min_d2 for cx, cy in chosen):
            chosen.append((x, y))
            if len(chosen) == max_n:
                break
    return [FeaturePoint(x, y, first_id + k) for k, (x, y) in enumerate(chosen)]


class _Pyramid:
    """Gaussian pyramid with central-difference gradients per level."""

    def __init__(self, gray, levels=PYRAMID_LEVELS):
        imgs = [np.asarray(gray, dtype=np.float64)]
        for _ in range(levels - 1):
            blurred = ndimage.convolve1d(imgs[-1], _PYR_KERNEL, axis=0, mode="nearest")
            blurred = ndimage.convolve1d(blurred, _PYR_KERNEL, axis=1, mode="nearest")
            imgs.append(np.ascontiguousarray(blurred[::2, ::2]))
        self.levels = imgs
        self._grads = None

    @property
    def grads(self):
        if self._grads is None:
            self._grads = [
                (ndimage.correlate1d(img, _DIFF_KERNEL, axis=1, mode="nearest"),
                 ndimage.correlate1d(img, _DIFF_KERNEL, axis=0, mode="nearest"))
                for img in self.levels
            ]
        return self._grads

    @property
    def shape(self):
        return self.levels[0].shape


def _lk(prev_pyr, next_pyr, pts, half=WINDOW // 2, max_iter=MAX_ITER,
        tol=CONVERGENCE_PX, max_residual=MAX_RESIDUAL):
    """Track (n, 2) positions; returns new positions and an alive mask."""
    n = pts.shape[0]
    if n == 0:
        return pts.copy(), np.zeros(0, dtype=bool)
    top = len(prev_pyr.levels) - 1
    guess = np.zeros((n, 2))
    ok = np.ones(n, dtype=bool)
    for level in range(top, -1, -1):
        gx, gy = prev_pyr.grads[level]
        flow, ok_l = kernels.lk_level(
            prev_pyr.levels[level], gx, gy, next_pyr.levels[level],
            pts / (2 ** level), guess, half, max_iter, tol,
        )
        ok &= ok_l
        guess = flow * 2.0 if level else flow
    new = pts + guess
    h, w = prev_pyr.shape
    alive = ok & np.all(np.isfinite(new), axis=1)
    alive &= (new[:, 0] - half >= 0) & (new[:, 0] + half <= w - 1)
    alive &= (new[:, 1] - half >= 0) & (new[:, 1] + half <= h - 1)
    if alive.any():
        off = np.arange(-half, half + 1, dtype=np.float64)
        ox, oy = (a.ravel() for a in np.meshgrid(off, off))
        idx = np.flatnonzero(alive)
        before = _bilinear(prev_pyr.levels[0], pts[idx, :1] + ox, pts[idx, 1:] + oy)
        after = _bilinear(next_pyr.levels[0], new[idx, :1] + ox, new[idx, 1:] + oy)
        rms = np.sqrt(np.mean((before - after) ** 2, axis=1))
        alive[idx[rms > max_residual]] = False
    return new, alive


def track_features(prev_gray, next_gray, points, **options):
    """Follow ``points`` from ``prev_gray`` to ``next_gray`` with pyramidal LK.

    Points that leave the frame, whose window would cross the border, or
    whose per-pixel RMS residual exceeds 20 intensity units come back with
    ``alive=False``; dead input points are passed through unchanged.
    """
    prev_gray = np.asarray(prev_gray, dtype=np.float64)
    next_gray = np.asarray(next_gray, dtype=np.float64)
    if prev_gray.shape != next_gray.shape:
        raise GeometryMismatch(f"raster shapes differ: {prev_gray.shape} vs {next_gray.shape}")
    live = [p for p in points if p.alive]
    pts = np.array([[p.x, p.y] for p in live], dtype=np.float64).reshape(-1, 2)
    new, alive = _lk(_Pyramid(prev_gray), _Pyramid(next_gray), pts, **options)
    moved = {p.id: FeaturePoint(float(q[0]), float(q[1]), p.id, bool(a))
             for p, q, a in zip(live, new, alive)}
    return [moved.get(p.id, p) if p.alive else p for p in points]


def skin_boxes(frames):
    """Run the skin detector on every frame."""
    return [detect_skin_roi(frame) for frame in frames.frames]


def stabilize_roi(boxes, frames, max_n=MAX_FEATURES, source=EXTERNAL):
    """Replace per-frame detections by the first box moved with the tracked features.

    Features are re-selected inside the current box whenever fewer than a
    quarter of the last selection survive. If every track is lost and
    re-selection finds nothing, the input boxes are returned with
    ``stabilized=False``.
    """
    boxes = list(boxes)
    n = len(frames)
    if len(boxes) != n:
        raise ValueError(f"{len(boxes)} boxes for {n} frames")
    fallback = RoiTrack(tuple(boxes), source, False)
    width, height = frames.width, frames.height
    box0 = boxes[0]
    prev = _Pyramid(luma(frames.frames[0]))
    feats = select_features(prev.levels[0], box0, max_n)
    if not feats:
        return fallback
    pts = np.array([[f.x, f.y] for f in feats])
    anchors = pts.copy()
    selected = len(pts)
    offset = np.zeros(2)
    out = [box0]
    for t in range(1, n):
        nxt = _Pyramid(luma(frames.frames[t]))
        new, alive = _lk(prev, nxt, pts)
        pts, anchors = new[alive], anchors[alive]
        if len(pts):
            offset = np.median(pts - anchors, axis=0)
        box = box0.translated(round(offset[0]), round(offset[1]), width, height)
        if len(pts) < REDETECT_FRACTION * selected:
            fresh = select_features(nxt.levels[0], box, max_n)
            if fresh:
                extra = np.array([[f.x, f.y] for f in fresh])
                pts = np.vstack([pts, extra])
                anchors = np.vstack([anchors, extra - offset])
                selected = len(pts)
            elif not len(pts):
                return fallback
        out.append(box)
        prev = nxt
    return RoiTrack(tuple(out), source, True)
