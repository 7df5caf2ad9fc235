"""End-to-end heart-rate estimation from frames or traces."""
from dataclasses import asdict, dataclass, fields
from typing import Optional

import numpy as np

from . import ingest
from .errors import FaceHRError, SingularCovariance, StageError
from .kernels import BACKEND
from .pulse import BandLimits, fastica3, power_spectrum, select_pulse_component, sliding_hr
from .rectify import DEFAULT_MU, DEFAULT_ORDER, PIPELINE_EPS, rectify_set
from .trace import DETREND_WINDOW_S, detrend, extract_channel_traces, map_set, normalize, resample_set
from .track import EXTERNAL, SKIN_FALLBACK, skin_boxes, stabilize_roi
from .types import CHANNELS, ChannelTraceSet, FrameSequence

# relative timestamp jitter above which traces are resampled onto a uniform grid
JITTER_TOLERANCE = 1e-3


@dataclass
class PipelineConfig:
    roi_path: Optional[str] = None  # None selects the skin-color fallback
    stabilize: bool = True
    rectify_enabled: bool = True
    nlms_order: int = DEFAULT_ORDER
    nlms_mu: float = DEFAULT_MU
    nlms_eps: float = PIPELINE_EPS
    band_low: float = 0.7
    band_high: float = 4.0
    window_s: float = 30.0
    step_s: float = 10.0
    detrend_window_s: float = DETREND_WINDOW_S
    ica_enabled: bool = True
    fs_override: Optional[float] = None
    seed: int = 42

    @property
    def band(self):
        return BandLimits(self.band_low, self.band_high)

    def validate(self):
        if int(self.nlms_order) != self.nlms_order or self.nlms_order < 1:
            raise ValueError("nlms_order must be an integer >= 1")
        if not 0 < self.nlms_mu <= 2:
            raise ValueError("nlms_mu must lie in (0, 2]")
        if not self.nlms_eps > 0:
            raise ValueError("nlms_eps must be positive")
        if not 0 < self.band_low < self.band_high:
            raise ValueError("need 0 < band_low < band_high")
        if not (self.window_s > 0 and self.step_s > 0 and self.detrend_window_s > 0):
            raise ValueError("window_s, step_s and detrend_window_s must be positive")
        if self.fs_override is not None and not self.fs_override > 0:
            raise ValueError("fs_override must be positive")
        return self


class RunLog:
    """Machine-readable record of every stage's parameters and warnings."""

    def __init__(self, config):
        self.config = asdict(config)
        self.stages = []

    def add(self, stage, warnings=(), **params):
        self.stages.append({"stage": stage, "params": params, "warnings": list(warnings)})

    def as_dict(self):
        return {"kernel_backend": BACKEND, "config": self.config, "stages": self.stages}


class _Stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, StageError) and isinstance(exc, (FaceHRError, ValueError)):
            raise StageError(self.name, exc) from exc
        return False


def _resolve_roi(config, frames, log):
    with _Stage("roi"):
        if config.roi_path is not None:
            boxes = ingest.load_roi_boxes(config.roi_path, len(frames))
            ingest.check_boxes_inside(boxes, frames.width, frames.height)
            source = EXTERNAL
        else:
            boxes = skin_boxes(frames)
            source = SKIN_FALLBACK
        log.add("roi", source=source, roi_path=config.roi_path, n_boxes=len(boxes))
    with _Stage("stabilize"):
        if not config.stabilize:
            log.add("stabilize", enabled=False)
            return boxes
        roi = stabilize_roi(boxes, frames, source=source)
        warn = [] if roi.stabilized else ["tracking failed; using unstabilized input boxes"]
        log.add("stabilize", warn, enabled=True, stabilized=roi.stabilized,
                pyramid_levels=3, window_px=15, max_iterations=30)
        return roi


def _uniform(traces, config, log):
    with _Stage("resample"):
        target = config.fs_override
        if traces.times is not None and target is None:
            dt = np.diff(traces.times)
            if np.max(np.abs(dt * traces.fs - 1.0)) > JITTER_TOLERANCE:
                target = traces.fs
        if target is None:
            log.add("resample", applied=False, fs=traces.fs)
            return traces
        if traces.times is None:
            traces = ChannelTraceSet(traces.foreground, traces.background, traces.fs,
                                     np.arange(len(traces)) / traces.fs, traces.warnings)
        out = resample_set(traces, target)
        log.add("resample", applied=True, fs=target, n_samples=len(out))
        return out


def estimate_from_traces(config, traces, log):
    traces = _uniform(traces, config, log)
    for w in traces.warnings:
        log.add("input", [w])
    with _Stage("normalize"):
        traces = map_set(traces, normalize)
        log.add("normalize", std="population")
    with _Stage("detrend"):
        traces = map_set(traces, lambda tr: detrend(tr, config.detrend_window_s))
        log.add("detrend", window_s=config.detrend_window_s)
    with _Stage("rectify"):
        if not config.rectify_enabled:
            log.add("rectify", enabled=False)
        elif not traces.has_background:
            log.add("rectify", ["no background traces; rectification skipped"], enabled=True, applied=False)
        else:
            traces = rectify_set(traces, config.nlms_order, config.nlms_mu, config.nlms_eps)
            log.add("rectify", enabled=True, applied=True, order=config.nlms_order,
                    mu=config.nlms_mu, eps=config.nlms_eps)
    band = config.band
    with _Stage("ica"):
        green = traces.channel("G")
        pulse = green
        if not config.ica_enabled:
            log.add("ica", enabled=False, channel="G")
        else:
            try:
                result = fastica3(traces.foreground, seed=config.seed)
            except SingularCovariance as exc:
                log.add("ica", [f"{exc}; falling back to the green channel"], enabled=True,
                        applied=False, channel="G")
            else:
                idx = select_pulse_component(result, traces.fs, band)
                pulse = green.with_samples(result.components[idx])
                warn = [] if result.converged else ["FastICA hit the iteration limit"]
                log.add("ica", warn, enabled=True, applied=True, seed=config.seed,
                        iterations=result.iterations, converged=result.converged,
                        component=idx)
    with _Stage("hr"):
        series = sliding_hr(pulse, config.window_s, config.step_s, band)
        log.add("hr", window_s=config.window_s, step_s=config.step_s,
                band_hz=[band.low, band.high], filter_order=4, n_estimates=len(series))
    return series


def run_estimate(config, data):
    """Estimate heart rate from a FrameSequence or a ChannelTraceSet.

    Returns
    -------
    series : HrSeries
    log : dict
        Stage-by-stage record including every configuration default.
    """
    config.validate()
    log = RunLog(config)
    if isinstance(data, FrameSequence):
        roi = _resolve_roi(config, data, log)
        with _Stage("extract"):
            traces = extract_channel_traces(data, roi)
            log.add("extract", list(traces.warnings), background_dilation=1.5,
                    n_frames=len(data), fps=data.fps)
        traces = ChannelTraceSet(traces.foreground, traces.background, traces.fs, traces.times, ())
    else:
        traces = data
    series = estimate_from_traces(config, traces, log)
    return series, log.as_dict()


def run_evaluate(est_path, gt_path):
    from .metrics import evaluate

    return evaluate(ingest.load_hr_csv(est_path), ingest.load_ground_truth(gt_path))


def channel_spectra(traces, detrend_window_s=DETREND_WINDOW_S, resolution=0.01):
    """Per-channel power spectra of the normalized, detrended foreground traces."""
    spectra = []
    for tr in traces.foreground:
        spectra.append(power_spectrum(detrend(normalize(tr), detrend_window_s), resolution))
    return spectra


def config_fields():
    return [f.name for f in fields(PipelineConfig)]


__all__ = ["PipelineConfig", "run_estimate", "run_evaluate", "channel_spectra", "CHANNELS"]
