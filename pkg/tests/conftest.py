import numpy as np
import pytest

from facehr.types import ChannelTrace


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def textured(height=64, width=64, seed=0, smooth=1.5):
    """Smooth random texture in [0, 255] for tracker tests."""
    from scipy import ndimage

    r = np.random.default_rng(seed)
    img = ndimage.gaussian_filter(r.uniform(0, 255, (height, width)), smooth)
    img = (img - img.min()) / (img.max() - img.min()) * 200 + 20
    return img


def sine_trace(freq, seconds=30.0, fs=60.0, amp=1.0, phase=0.0):
    t = np.arange(int(round(seconds * fs))) / fs
    return ChannelTrace(amp * np.sin(2 * np.pi * freq * t + phase), fs)


ACCEPTANCE_LINES = []


def record_criterion(number, title, ok, detail):
    line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
