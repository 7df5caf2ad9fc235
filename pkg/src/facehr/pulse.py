"""Pulse extraction: ICA unmixing, band-pass filtering and spectral HR estimation."""
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .errors import (
    BandInvalid,
    EmptyBand,
    FsMismatch,
    SingularCovariance,
    TooShort,
    TraceTooShort,
    ZeroPower,
)
from .types import ChannelTrace, HrSeries

ICA_SEED = 42
ICA_MAX_ITER = 200
ICA_TOL = 1e-6
ICA_MIN_SAMPLES = 256
DEFAULT_RESOLUTION = 0.01
WINDOW_S = 30.0
STEP_S = 10.0
FILTER_ORDER = 4


@dataclass(frozen=True)
class BandLimits:
    low: float = 0.7
    high: float = 4.0

    def validate(self, fs):
        if not (0 < self.low < self.high < fs / 2.0):
            raise BandInvalid(
                f"band [{self.low}, {self.high}] Hz invalid for fs={fs} Hz "
                "(need 0 < low < high < fs/2)"
            )
        return self


DEFAULT_BAND = BandLimits()


@dataclass(frozen=True, eq=False)
class IcaResult:
    components: np.ndarray  # (3, n)
    unmixing: np.ndarray  # (3, 3), acts on whitened data
    whitening: np.ndarray  # (3, 3)
    iterations: int
    converged: bool


@dataclass(frozen=True, eq=False)
class Spectrum:
    freqs: np.ndarray
    power: np.ndarray

    @property
    def resolution(self):
        return float(self.freqs[1] - self.freqs[0])


def _as_matrix(traces):
    if isinstance(traces, np.ndarray):
        return np.asarray(traces, dtype=np.float64), None
    traces = list(traces)
    fs = {tr.fs for tr in traces}
    if len(fs) != 1:
        raise FsMismatch("ICA inputs must share fs")
    return np.stack([tr.samples for tr in traces]), fs.pop()


def _sym_decorrelate(w):
    s, u = np.linalg.eigh(w @ w.T)
    return (u * (1.0 / np.sqrt(s))) @ u.T @ w


def fastica3(traces, seed=ICA_SEED, max_iter=ICA_MAX_ITER, tol=ICA_TOL):
    """Symmetric FastICA with the tanh contrast on three aligned traces.

    Parameters
    ----------
    traces : sequence of 3 ChannelTrace, or ndarray (3, n)
    seed : int
        Seed for the initial unmixing matrix.

    Returns
    -------
    IcaResult
        ``components = unmixing @ whitening @ (X - mean)``; each has zero
        mean and unit variance. ``converged`` is False when ``max_iter`` was
        reached before ``1 - min|diag(W_new W_old^T)| < tol``.
    """
    x, _ = _as_matrix(traces)
    if x.ndim != 2 or x.shape[0] != 3:
        raise ValueError("fastica3 needs exactly 3 traces")
    n = x.shape[1]
    if n < ICA_MIN_SAMPLES:
        raise TooShort(f"ICA needs at least {ICA_MIN_SAMPLES} samples, got {n}")
    if not np.all(np.isfinite(x)):
        raise ValueError("ICA inputs must be finite")
    xc = x - x.mean(axis=1, keepdims=True)
    cov = xc @ xc.T / n
    evals, evecs = np.linalg.eigh(cov)
    scale = max(float(np.max(np.diag(cov))), np.finfo(float).tiny)
    if np.min(np.diag(cov)) <= 1e-12 * scale or evals[0] <= 1e-10 * evals[-1]:
        raise SingularCovariance(
            f"covariance is rank deficient (eigenvalues {evals.tolist()})"
        )
    whitening = (evecs / np.sqrt(evals)).T
    z = whitening @ xc

    rng = np.random.default_rng(seed)
    w = _sym_decorrelate(rng.standard_normal((3, 3)))
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        g = np.tanh(w @ z)
        g_prime = 1.0 - g * g
        w_new = _sym_decorrelate(g @ z.T / n - g_prime.mean(axis=1)[:, None] * w)
        gap = 1.0 - np.min(np.abs(np.einsum("ij,ij->i", w_new, w)))
        w = w_new
        if gap < tol:
            converged = True
            break
    components = w @ z
    # remove the rounding residue left by the linear transforms
    components -= components.mean(axis=1, keepdims=True)
    return IcaResult(components, w, whitening, it, converged)


def _band_mask(freqs, band):
    return (freqs >= band.low) & (freqs <= band.high)


def select_pulse_component(result, fs, band=DEFAULT_BAND):
    """Index of the component whose spectrum is most concentrated in one in-band bin.

    The score is the highest in-band bin's power over the total in-band
    power; ties go to the lowest index.
    """
    scores = []
    for comp in result.components:
        spec = power_spectrum(ChannelTrace(comp, fs))
        p = spec.power[_band_mask(spec.freqs, band)]
        total = p.sum()
        scores.append(p.max() / total if total > 0 else 0.0)
    return int(np.argmax(scores))


def bandpass(trace, band=DEFAULT_BAND, order=FILTER_ORDER):
    """Zero-phase Butterworth band-pass (forward-backward ``sosfiltfilt``)."""
    band.validate(trace.fs)
    sos = signal.butter(order, [band.low, band.high], btype="bandpass", fs=trace.fs, output="sos")
    return trace.with_samples(signal.sosfiltfilt(sos, trace.samples))


def nfft_for(fs, nperseg, resolution):
    """Smallest power of two >= nperseg whose bin spacing is <= resolution."""
    nfft = 1
    while nfft < nperseg or fs / nfft > resolution:
        nfft *= 2
    return nfft


def power_spectrum(trace, resolution=DEFAULT_RESOLUTION):
    """Welch PSD: Hann segments of min(n, 20 s), 50 % overlap, zero-padded FFT."""
    x = trace.samples
    if x.size < 64:
        raise TooShort(f"power spectrum needs at least 64 samples, got {x.size}")
    fs = trace.fs
    nperseg = min(x.size, int(round(20.0 * fs)))
    nfft = nfft_for(fs, nperseg, resolution)
    freqs, power = signal.welch(
        x,
        fs=fs,
        window="hann",
        nperseg=nperseg,
        noverlap=nperseg // 2,
        nfft=nfft,
        detrend=False,
        scaling="density",
        average="mean",
    )
    return Spectrum(freqs, np.maximum(power, 0.0))


def spectrum_peak_hr(spectrum, band=DEFAULT_BAND):
    """Dominant in-band frequency in bpm, refined by a parabola through log-power."""
    f = spectrum.freqs
    p = spectrum.power
    idx = np.flatnonzero(_band_mask(f, band))
    if idx.size == 0:
        raise EmptyBand(f"no spectrum bins within [{band.low}, {band.high}] Hz")
    if not np.any(p[idx] > 0):
        raise ZeroPower("all in-band power is zero")
    k = int(idx[np.argmax(p[idx])])
    peak = f[k]
    if 0 < k < f.size - 1 and p[k - 1] > 0 and p[k + 1] > 0:
        a, b, c = np.log(p[k - 1]), np.log(p[k]), np.log(p[k + 1])
        denom = a - 2.0 * b + c
        if denom < 0:
            offset = float(np.clip(0.5 * (a - c) / denom, -0.5, 0.5))
            peak = f[k] + offset * (f[1] - f[0])
    return 60.0 * float(np.clip(peak, band.low, band.high))


def window_starts(n, fs, window_s=WINDOW_S, step_s=STEP_S):
    """Sample offsets of every full window; raises TraceTooShort if none fits."""
    span = int(round(window_s * fs))
    if n < span:
        raise TraceTooShort(f"trace of {n / fs:.3f} s is shorter than the {window_s} s window")
    starts = []
    k = 0
    while True:
        start = int(round(k * step_s * fs))
        if start + span > n:
            break
        starts.append(start)
        k += 1
    return starts, span


def window_hr(trace, band=DEFAULT_BAND, resolution=DEFAULT_RESOLUTION):
    return spectrum_peak_hr(power_spectrum(bandpass(trace, band), resolution), band)


def sliding_hr(trace, window_s=WINDOW_S, step_s=STEP_S, band=DEFAULT_BAND,
               resolution=DEFAULT_RESOLUTION):
    """Heart rate every ``step_s`` seconds from ``window_s``-second windows.

    Each estimate is stamped at its window's center.
    """
    band.validate(trace.fs)
    if not (window_s > 0 and step_s > 0):
        raise ValueError("window_s and step_s must be positive")
    x = trace.samples
    fs = trace.fs
    starts, span = window_starts(x.size, fs, window_s, step_s)
    times = [(s + span / 2.0) / fs for s in starts]
    hr = [window_hr(trace.with_samples(x[s:s + span]), band, resolution) for s in starts]
    return HrSeries(times, hr)
