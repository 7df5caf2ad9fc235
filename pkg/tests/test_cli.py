import json

import numpy as np
import pytest

from facehr import ingest
from facehr.cli import main


@pytest.fixture(scope="module")
def trace_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    assert main(["synth", "trace", "--duration", "120", "--seed", "3", "--out", str(out)]) == 0
    return out


def test_synth_trace_files(trace_dir):
    ts = ingest.load_trace_csv(trace_dir / "traces.csv")
    assert len(ts) == 7200 and ts.has_background
    assert ingest.load_ground_truth(trace_dir / "gt.csv").hr[0] == 72.0


def test_estimate_trace_and_evaluate(trace_dir, tmp_path, capsys):
    est = tmp_path / "est.csv"
    log = tmp_path / "log.json"
    assert main(["estimate-trace", "--traces", str(trace_dir / "traces.csv"),
                 "--out", str(est), "--log", str(log)]) == 0
    series = ingest.load_hr_csv(est)
    assert len(series) == 10
    assert np.all(np.abs(series.hr - 72) <= 1)
    assert main(["evaluate", "--est", str(est), "--gt", str(trace_dir / "gt.csv")]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["pct_within_5"] == 100

    data = json.loads(log.read_text())
    stages = [s["stage"] for s in data["stages"]]
    assert stages == ["resample", "normalize", "detrend", "rectify", "ica", "hr"]
    assert data["kernel_backend"] in ("python", "cython")
    cfg = data["config"]
    assert cfg["step_s"] == 10.0 and cfg["window_s"] == 30.0 and cfg["nlms_order"] == 8


def test_outputs_byte_identical(trace_dir, tmp_path):
    outs = []
    for k in range(2):
        est, log = tmp_path / f"e{k}.csv", tmp_path / f"l{k}.json"
        assert main(["estimate-trace", "--traces", str(trace_dir / "traces.csv"),
                     "--out", str(est), "--log", str(log)]) == 0
        outs.append((est.read_bytes(), log.read_bytes()))
    assert outs[0] == outs[1]


def test_evaluate_self_is_zero(trace_dir, tmp_path):
    out = tmp_path / "r.json"
    gt = str(trace_dir / "gt.csv")
    assert main(["evaluate", "--est", gt, "--gt", gt, "--out", str(out)]) == 0
    assert json.loads(out.read_text())["rmse"] == 0


def test_disjoint_ranges_exit_2(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    a.write_text("t_s,hr_bpm\n0,70\n10,70\n")
    b.write_text("t_s,hr_bpm\n100,70\n110,70\n")
    assert main(["evaluate", "--est", str(a), "--gt", str(b)]) == 2


def test_usage_errors_exit_64(tmp_path, trace_dir):
    with pytest.raises(SystemExit) as exc:
        main(["estimate-trace"])
    assert exc.value.code == 64
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 64
    assert main(["estimate-trace", "--traces", str(trace_dir / "traces.csv"),
                 "--out", str(tmp_path / "x.csv"), "--nlms-mu", "3"]) == 64


def test_pipeline_errors_exit_1(tmp_path, capsys):
    assert main(["estimate-trace", "--traces", str(tmp_path / "none.csv"), "--out", str(tmp_path / "o.csv")]) == 1
    short = tmp_path / "short.csv"
    short.write_text("t,R,G,B\n" + "".join(f"{i / 60},1,{i % 7},3\n" for i in range(600)))
    assert main(["estimate-trace", "--traces", str(short), "--out", str(tmp_path / "o.csv")]) == 1
    assert "hr" in capsys.readouterr().err


def test_no_skin_error_names_roi_stage(tmp_path, capsys):
    frames = np.zeros((4, 32, 32, 3), np.uint8)
    frames[..., 2] = 255
    from facehr.types import FrameSequence

    manifest = ingest.write_frame_sequence(FrameSequence.from_array(frames), tmp_path / "v")
    assert main(["estimate", "--manifest", str(manifest), "--out", str(tmp_path / "o.csv")]) == 1
    err = capsys.readouterr().err
    assert "roi" in err and "NoSkinPixels" in err


def test_green_only_reduction(trace_dir, tmp_path):
    """--no-rectify --no-ica equals detrend, band-pass and sliding HR on green."""
    from facehr.pulse import sliding_hr
    from facehr.trace import detrend, normalize

    est = tmp_path / "g.csv"
    assert main(["estimate-trace", "--traces", str(trace_dir / "traces.csv"),
                 "--no-rectify", "--no-ica", "--out", str(est)]) == 0
    green = ingest.load_trace_csv(trace_dir / "traces.csv").channel("G")
    ref = sliding_hr(detrend(normalize(green)))
    np.testing.assert_array_equal(ingest.load_hr_csv(est).hr, ref.hr)


def test_synth_frames_and_spectrum(tmp_path):
    out = tmp_path / "v"
    assert main(["synth", "frames", "--duration", "2", "--width", "32", "--height", "32",
                 "--out", str(out)]) == 0
    assert (out / "manifest.json").exists() and (out / "roi.csv").exists()
    spec = tmp_path / "s.csv"
    assert main(["spectrum", "--manifest", str(out / "manifest.json"), "--roi", str(out / "roi.csv"),
                 "--max-freq", "5", "--out", str(spec)]) == 0
    lines = spec.read_text().splitlines()
    assert lines[0] == "freq_hz,power_r,power_g,power_b"
    assert float(lines[-1].split(",")[0]) <= 5.0
