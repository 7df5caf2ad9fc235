"""Heart-rate estimation from RGB facial video.

Pipeline: face ROI (external boxes or skin-color fallback) stabilized with
KLT tracking, per-channel spatial means, NLMS illumination rectification
against the background, FastICA, and Welch-spectrum peak picking on sliding
windows.
"""
from .errors import FaceHRError
from .ingest import load_frame_sequence, load_ground_truth, load_roi_boxes, load_trace_csv
from .kernels import BACKEND as KERNEL_BACKEND
from .metrics import EvalReport, align, compute_metrics, report_to_json
from .pipeline import PipelineConfig, run_estimate, run_evaluate
from .pulse import (
    BandLimits,
    IcaResult,
    Spectrum,
    bandpass,
    fastica3,
    power_spectrum,
    select_pulse_component,
    sliding_hr,
    spectrum_peak_hr,
)
from .rectify import RectificationModel, RectifiedTrace, nlms_rectify, rectify_set
from .synth import ArtifactEvent, SynthSpec, synth_frames, synth_traces
from .trace import detrend, extract_channel_traces, normalize, resample_uniform
from .track import FeaturePoint, RoiTrack, detect_skin_roi, select_features, stabilize_roi, track_features
from .types import ChannelTrace, ChannelTraceSet, FrameSequence, HrSeries, RoiBox

__version__ = "0.1.0"
