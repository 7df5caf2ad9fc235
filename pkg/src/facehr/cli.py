"""Command-line entry point: ``facehr {estimate,estimate-trace,evaluate,synth,spectrum}``.

Exit codes: 0 success, 1 pipeline error, 2 evaluation without time overlap,
64 usage error.
"""
import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import ingest
from .errors import FaceHRError, NoOverlap, StageError
from .metrics import report_to_json
from .pipeline import PipelineConfig, channel_spectra, run_estimate, run_evaluate
from .synth import (
    FLASH,
    FOREGROUND_DRIFT,
    SPLIT_LIGHTING,
    ArtifactEvent,
    SynthSpec,
    periodic_flashes,
    synth_frames,
    synth_traces,
)

EXIT_OK = 0
EXIT_PIPELINE = 1
EXIT_NO_OVERLAP = 2
EXIT_USAGE = 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _triple(text, cast=float):
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected start:end:magnitude, got {text!r}")
    try:
        return tuple(cast(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric field in {text!r}") from None


def _floats(n):
    def parse(text):
        try:
            vals = tuple(float(v) for v in text.split(","))
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers") from None
        if len(vals) != n:
            raise argparse.ArgumentTypeError(f"expected {n} comma-separated numbers")
        return vals

    return parse


def _hr_profile(text):
    """``72`` or ``t:bpm,t:bpm,...``."""
    try:
        if ":" not in text:
            return ((0.0, float(text)),)
        return tuple(tuple(float(v) for v in item.split(":")) for item in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad heart-rate profile {text!r}") from None


def _add_pipeline_flags(p):
    d = PipelineConfig()
    p.add_argument("--no-rectify", dest="rectify_enabled", action="store_false",
                   help="skip NLMS illumination rectification")
    p.add_argument("--no-ica", dest="ica_enabled", action="store_false",
                   help="use the green channel instead of ICA")
    p.add_argument("--nlms-order", type=int, default=d.nlms_order)
    p.add_argument("--nlms-mu", type=float, default=d.nlms_mu)
    p.add_argument("--nlms-eps", type=float, default=d.nlms_eps)
    p.add_argument("--band-low", type=float, default=d.band_low, help="Hz")
    p.add_argument("--band-high", type=float, default=d.band_high, help="Hz")
    p.add_argument("--window-s", type=float, default=d.window_s)
    p.add_argument("--step-s", type=float, default=d.step_s)
    p.add_argument("--detrend-window-s", type=float, default=d.detrend_window_s)
    p.add_argument("--fs-override", type=float, default=None,
                   help="resample traces to this rate (Hz)")
    p.add_argument("--seed", type=int, default=d.seed, help="ICA initialization seed")
    p.add_argument("--out", required=True, help="HR CSV (t_s,hr_bpm)")
    p.add_argument("--log", help="write the JSON run log here")


def _config(args, **extra):
    return PipelineConfig(
        rectify_enabled=args.rectify_enabled,
        nlms_order=args.nlms_order,
        nlms_mu=args.nlms_mu,
        nlms_eps=args.nlms_eps,
        band_low=args.band_low,
        band_high=args.band_high,
        window_s=args.window_s,
        step_s=args.step_s,
        detrend_window_s=args.detrend_window_s,
        ica_enabled=args.ica_enabled,
        fs_override=args.fs_override,
        seed=args.seed,
        **extra,
    )


def _write_outputs(args, series, log):
    ingest.write_hr_csv(args.out, series)
    if args.log:
        Path(args.log).write_text(json.dumps(log, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def cmd_estimate(args):
    config = _config(args, roi_path=args.roi, stabilize=not args.no_stabilize)
    try:
        config.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        frames = ingest.load_frame_sequence(args.manifest)
    except FaceHRError as exc:
        raise StageError("ingest", exc) from exc
    series, log = run_estimate(config, frames)
    _write_outputs(args, series, log)
    return EXIT_OK


def cmd_estimate_trace(args):
    config = _config(args)
    try:
        config.validate()
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    try:
        traces = ingest.load_trace_csv(args.traces)
    except FaceHRError as exc:
        raise StageError("ingest", exc) from exc
    series, log = run_estimate(config, traces)
    _write_outputs(args, series, log)
    return EXIT_OK


def cmd_evaluate(args):
    report = run_evaluate(args.est, args.gt)
    text = report_to_json(report)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _synth_spec(args):
    events = []
    for kind, items in ((FLASH, args.flash), (FOREGROUND_DRIFT, args.drift), (SPLIT_LIGHTING, args.split)):
        for start, end, mag in items or ():
            events.append(ArtifactEvent(kind, start, end, mag))
    if args.flash_every:
        every, length, mag = args.flash_every
        events.extend(periodic_flashes(args.duration, every, length, mag))
    events.sort(key=lambda ev: (ev.start, ev.kind))
    return SynthSpec(
        duration=args.duration,
        fs=args.fs,
        hr_profile=args.hr,
        pulse_amplitude=args.pulse_amp,
        noise_std=args.noise_std,
        artifacts=tuple(events),
        velocity=args.move,
    )


def cmd_synth(args):
    spec = _synth_spec(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.kind == "trace":
        traces, truth = synth_traces(spec, args.seed)
        ingest.write_trace_csv(out / "traces.csv", traces)
    else:
        frames, truth, roi = synth_frames(spec, args.width, args.height, args.seed)
        ingest.write_frame_sequence(frames, out)
        ingest.write_roi_boxes(out / "roi.csv", roi.boxes)
    ingest.write_ground_truth(out / "gt.csv", truth)
    return EXIT_OK


def cmd_spectrum(args):
    if args.traces:
        traces = ingest.load_trace_csv(args.traces)
    else:
        from .trace import extract_channel_traces
        from .track import skin_boxes

        frames = ingest.load_frame_sequence(args.manifest)
        boxes = ingest.load_roi_boxes(args.roi, len(frames)) if args.roi else skin_boxes(frames)
        traces = extract_channel_traces(frames, boxes)
    spectra = channel_spectra(traces, resolution=args.resolution)
    freqs = spectra[0].freqs
    if args.max_freq is not None:
        keep = freqs <= args.max_freq
    else:
        keep = np.ones(freqs.size, dtype=bool)
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        fh.write("freq_hz,power_r,power_g,power_b\n")
        for i in np.flatnonzero(keep):
            fh.write(",".join(repr(float(v)) for v in
                              (freqs[i], spectra[0].power[i], spectra[1].power[i], spectra[2].power[i])))
            fh.write("\n")
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="facehr", description="Heart rate from RGB facial video.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("estimate", help="estimate HR from a PPM frame manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--roi", help="ROI CSV (frame,x,y,w,h); default: skin-color detector")
    p.add_argument("--no-stabilize", action="store_true", help="use the ROI boxes as given")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("estimate-trace", help="estimate HR from a trace CSV")
    p.add_argument("--traces", required=True)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_estimate_trace)

    p = sub.add_parser("evaluate", help="compare an HR CSV with ground truth")
    p.add_argument("--est", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--out", help="report JSON (default: stdout)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", help="generate synthetic traces or frames")
    p.add_argument("kind", choices=["trace", "frames"])
    p.add_argument("--hr", type=_hr_profile, default=((0.0, 72.0),),
                   help="bpm, or a piecewise-linear profile t:bpm,t:bpm")
    p.add_argument("--duration", type=float, default=600.0)
    p.add_argument("--fs", type=float, default=60.0)
    p.add_argument("--flash", type=_triple, action="append", metavar="START:END:MAG")
    p.add_argument("--flash-every", type=_triple, metavar="EVERY:LENGTH:MAG",
                   help="periodic flashes, the first at EVERY/2 seconds")
    p.add_argument("--drift", type=_triple, action="append", metavar="START:END:MAG")
    p.add_argument("--split", type=_triple, action="append", metavar="START:END:MAG")
    p.add_argument("--pulse-amp", type=_floats(3), default=(0.5, 1.0, 0.5), metavar="R,G,B")
    p.add_argument("--noise-std", type=float, default=0.2)
    p.add_argument("--move", type=_floats(2), default=(0.0, 0.0), metavar="VX,VY",
                   help="face velocity in px/s (frames only)")
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("spectrum", help="per-channel power spectra as CSV")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--traces")
    src.add_argument("--manifest")
    p.add_argument("--roi")
    p.add_argument("--resolution", type=float, default=0.01, help="max bin spacing (Hz)")
    p.add_argument("--max-freq", type=float, default=None, help="drop bins above this (Hz)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_spectrum)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"facehr: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NoOverlap as exc:
        print(f"facehr: {exc}", file=sys.stderr)
        return EXIT_NO_OVERLAP
    except StageError as exc:
        print(f"facehr: {exc}", file=sys.stderr)
        return EXIT_PIPELINE
    except FaceHRError as exc:
        print(f"facehr: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PIPELINE


if __name__ == "__main__":
    sys.exit(main())
