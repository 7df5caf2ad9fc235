"""Illumination rectification by NLMS adaptive noise cancellation.

The foreground trace is the primary input and the same-channel background
trace is the noise reference. The adaptive FIR filter learns how illumination
seen in the background leaks into the foreground; its output is the
illumination estimate and the a-priori error is the rectified pulse signal.
"""
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import FsMismatch, LengthMismatch, NonFinite, TooShort
from .types import ChannelTraceSet

DEFAULT_ORDER = 8
DEFAULT_MU = 0.5
DEFAULT_EPS = 1e-6
# the pipeline feeds unit-variance references; eps on that scale keeps the
# weights from wandering while the reference carries only sensor noise
PIPELINE_EPS = 1.0


@dataclass(frozen=True, eq=False)
class RectificationModel:
    order: int = DEFAULT_ORDER
    mu: float = DEFAULT_MU
    eps: float = DEFAULT_EPS
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 1:
            raise ValueError(f"order must be an integer >= 1, got {self.order}")
        if not 0 < self.mu <= 2:
            raise ValueError(f"mu must lie in (0, 2], got {self.mu}")
        if not self.eps > 0:
            raise ValueError(f"eps must be positive, got {self.eps}")
        w = np.zeros(self.order) if self.weights is None else np.array(self.weights, dtype=np.float64)
        if w.shape != (self.order,) or not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite with one entry per tap")
        w.setflags(write=False)
        object.__setattr__(self, "order", int(self.order))
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True, eq=False)
class RectifiedTrace:
    pure: object
    noise_estimate: object
    model: RectificationModel


def exact_split(d, y):
    """Split ``d`` into ``(d - y, rest)`` so that ``pure + rest`` rounds back to ``d``.

    ``rest`` is recomputed as ``d - pure`` instead of reusing ``y``; by the
    Fast2Sum argument the pair then adds back to ``d`` exactly whenever
    ``|d| >= |y|``. When ``|y|`` exceeds ``|d|`` and ``d`` carries bits below
    the spacing of floats near ``y``, no float pair close to ``(d - y, y)``
    sums back to ``d`` exactly; the error is then at most one unit in the
    last place of ``y``.
    """
    pure = d - y
    return pure, d - pure


def nlms_rectify(primary, reference, order=DEFAULT_ORDER, mu=DEFAULT_MU, eps=DEFAULT_EPS):
    """Cancel the part of ``primary`` that is linearly predictable from ``reference``.

    At each step ``t`` with tap vector ``x_t = [ref[t], ..., ref[t-L+1]]``
    (zeros before the start)::

        y_t = w . x_t
        e_t = primary[t] - y_t
        w  <- w + mu * e_t * x_t / (eps + |x_t|^2)

    with ``w`` starting at zero and outputs taken before the update.

    Returns
    -------
    RectifiedTrace
        ``pure`` holds ``e``, ``noise_estimate`` holds ``y``.
    """
    model = RectificationModel(order, mu, eps)
    if len(primary) != len(reference):
        raise LengthMismatch(f"primary has {len(primary)} samples, reference {len(reference)}")
    if primary.fs != reference.fs:
        raise FsMismatch(f"primary fs {primary.fs} != reference fs {reference.fs}")
    d = primary.samples
    x = reference.samples
    if not (np.all(np.isfinite(d)) and np.all(np.isfinite(x))):
        raise NonFinite("rectification inputs must be finite")
    if d.size < model.order:
        raise TooShort(f"need at least {model.order} samples, got {d.size}")
    y, w = kernels.nlms_filter(d, x, model.order, model.mu, model.eps)
    if not np.all(np.isfinite(w)):
        raise NonFinite("NLMS weights diverged")
    pure, noise = exact_split(d, y)
    return RectifiedTrace(
        pure=primary.with_samples(pure),
        noise_estimate=primary.with_samples(noise),
        model=RectificationModel(model.order, model.mu, model.eps, w),
    )


def rectify_set(traces, order=DEFAULT_ORDER, mu=DEFAULT_MU, eps=DEFAULT_EPS):
    """Rectify each foreground channel against its background channel.

    Without background traces the input comes back unchanged, with a warning
    added to the set.
    """
    if traces.background is None:
        return ChannelTraceSet(
            traces.foreground,
            None,
            traces.fs,
            traces.times,
            traces.warnings + ("rectify skipped: no background traces",),
        )
    pure = tuple(
        nlms_rectify(fg, bg, order, mu, eps).pure
        for fg, bg in zip(traces.foreground, traces.background)
    )
    return ChannelTraceSet(pure, traces.background, traces.fs, traces.times, traces.warnings)
