"""Independent reference implementations used by the tests."""
import math


def nlms_brute(d, x, order, mu, eps):
    """Textbook NLMS written with plain Python floats and lists.

    Returns (e, y, w) with a-priori outputs.
    """
    w = [0.0] * order
    e_out, y_out = [], []
    for t in range(len(d)):
        taps = [x[t - k] if t - k >= 0 else 0.0 for k in range(order)]
        y = sum(wk * xk for wk, xk in zip(w, taps))
        e = d[t] - y
        norm = sum(xk * xk for xk in taps)
        w = [wk + mu * e * xk / (eps + norm) for wk, xk in zip(w, taps)]
        e_out.append(e)
        y_out.append(y)
    return e_out, y_out, w


def dft_power(x, fs, freq):
    """|sum x[n] exp(-2 pi i f n / fs)|^2 evaluated directly."""
    re = sum(v * math.cos(2 * math.pi * freq * n / fs) for n, v in enumerate(x))
    im = sum(v * math.sin(2 * math.pi * freq * n / fs) for n, v in enumerate(x))
    return re * re + im * im


def dense_dft_peak(x, fs, lo, hi, step):
    """Frequency in [lo, hi] maximizing the direct DFT magnitude on a dense grid."""
    import numpy as np

    x = np.asarray(x, dtype=float)
    n = np.arange(x.size)
    grid = np.arange(lo, hi + step / 2, step)
    power = np.abs(np.exp(-2j * np.pi * np.outer(grid, n) / fs) @ x) ** 2
    return float(grid[np.argmax(power)])


def fit_sinusoid(x, fs, freq):
    """Least-squares amplitude and phase of a known-frequency sinusoid."""
    import numpy as np

    t = np.arange(len(x)) / fs
    basis = np.column_stack([np.sin(2 * np.pi * freq * t), np.cos(2 * np.pi * freq * t)])
    (a, b), *_ = np.linalg.lstsq(basis, np.asarray(x, float), rcond=None)
    return math.hypot(a, b), math.atan2(b, a)
