"""Agreement metrics between estimated and reference heart-rate series."""
import json
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import NoOverlap, TooFewPairs

REPORT_FIELDS = (
    "mean_error",
    "mae",
    "rmse",
    "rmse_pct",
    "pct_within_5",
    "pearson_r",
    "n_samples",
)


@dataclass(frozen=True)
class EvalReport:
    mean_error: float
    mae: float
    rmse: float
    rmse_pct: float
    pct_within_5: float
    pearson_r: Optional[float]
    n_samples: int


def align(est, gt):
    """Pair each estimate with the ground truth interpolated at its time.

    Estimates outside the ground-truth time range are dropped.

    Returns
    -------
    ndarray, shape (n, 2)
        Columns ``(hr_est, hr_true)``.
    """
    t = est.times
    inside = (t >= gt.times[0]) & (t <= gt.times[-1])
    if not inside.any():
        raise NoOverlap(
            f"estimates span [{t[0] if t.size else 'n/a'}, {t[-1] if t.size else 'n/a'}] s, "
            f"ground truth [{gt.times[0]}, {gt.times[-1]}] s"
        )
    truth = np.interp(t[inside], gt.times, gt.hr)
    return np.column_stack([est.hr[inside], truth])


def pearson(a, b):
    """Sample correlation, or None when either side has zero variance."""
    da = a - a.mean()
    db = b - b.mean()
    sa = np.sqrt(np.sum(da * da))
    sb = np.sqrt(np.sum(db * db))
    if sa <= 1e-12 * max(1.0, np.abs(a).max()) or sb <= 1e-12 * max(1.0, np.abs(b).max()):
        return None
    return float(np.clip(np.sum(da * db) / (sa * sb), -1.0, 1.0))


def compute_metrics(pairs):
    pairs = np.asarray(pairs, dtype=np.float64).reshape(-1, 2)
    n = pairs.shape[0]
    if n < 2:
        raise TooFewPairs(f"need at least 2 pairs, got {n}")
    if not np.all(np.isfinite(pairs)):
        raise ValueError("pairs must be finite")
    est, truth = pairs[:, 0], pairs[:, 1]
    err = est - truth
    abs_err = np.abs(err)
    rmse = float(np.sqrt(np.mean(err * err)))
    return EvalReport(
        mean_error=float(np.mean(err)),
        mae=float(np.mean(abs_err)),
        rmse=rmse,
        rmse_pct=100.0 * rmse / float(np.mean(truth)),
        pct_within_5=100.0 * np.count_nonzero(abs_err < 5.0) / n,
        pearson_r=pearson(est, truth),
        n_samples=n,
    )


def evaluate(est, gt):
    return compute_metrics(align(est, gt))


def _sig6(v):
    return float(f"{v:.6g}")


def report_to_json(report):
    """Serialize with fixed key order and reals rounded to 6 significant digits."""
    out = {}
    for key in REPORT_FIELDS:
        v = getattr(report, key)
        if key == "n_samples":
            out[key] = int(v)
        else:
            out[key] = None if v is None else _sig6(v)
    return json.dumps(out, indent=2) + "\n"


def report_from_json(text):
    data = json.loads(text)
    return EvalReport(**{k: data[k] for k in REPORT_FIELDS})
