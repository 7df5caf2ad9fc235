import numpy as np
import pytest
from scipy import signal as sps

from conftest import sine_trace
from facehr import errors
from facehr.pulse import (
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
from facehr.synth import SynthSpec, synth_traces
from facehr.types import ChannelTrace
from oracles import dense_dft_peak, fit_sinusoid

FS = 60.0


def best_match(components, sources):
    """|corr| of every source with its best-matching component."""
    c = np.corrcoef(np.vstack([sources, components]))[:3, 3:]
    return np.abs(c).max(axis=1)


def mixed_sources(n=6000, seed=0):
    t = np.arange(n) / FS
    s = np.vstack([
        np.sin(2 * np.pi * 1.2 * t),
        sps.sawtooth(2 * np.pi * 0.5 * t),
        np.random.default_rng(seed).standard_normal(n),
    ])
    a = np.array([[1.0, 0.5, 0.3], [0.4, 1.0, 0.6], [0.2, 0.7, 1.0]])
    return s, a @ s


def test_independent_inputs_recovered():
    r = np.random.default_rng(5)
    q, _ = np.linalg.qr(r.uniform(-1, 1, (4000, 3)) ** 3)
    src = (q * np.sqrt(4000)).T
    res = fastica3(src)
    assert np.all(best_match(res.components, src) > 0.99)


def test_known_mixing_recovered():
    s, x = mixed_sources()
    res = fastica3(x)
    assert res.converged
    assert np.all(best_match(res.components, s) > 0.95)


def test_ica_deterministic():
    _, x = mixed_sources()
    a = fastica3(x)
    b = fastica3(x)
    np.testing.assert_array_equal(a.components, b.components)


def test_ica_scale_invariance():
    s, x = mixed_sources()
    base = fastica3(x).components
    scaled = fastica3(x * np.array([[3.0], [0.2], [7.5]])).components
    assert np.all(best_match(scaled, base) >= 0.999)


def test_ica_components_whitened():
    _, x = mixed_sources()
    c = fastica3(x).components
    np.testing.assert_allclose(c @ c.T / c.shape[1], np.eye(3), atol=1e-8)


def test_identical_channels_singular():
    r = np.random.default_rng(0)
    a = r.standard_normal(1000)
    with pytest.raises(errors.SingularCovariance):
        fastica3(np.vstack([a, a, r.standard_normal(1000)]))


def test_ica_accepts_traces():
    _, x = mixed_sources()
    res = fastica3([ChannelTrace(row, FS) for row in x])
    assert res.components.shape == x.shape


def fake_result(components):
    return IcaResult(np.asarray(components), np.eye(3), np.eye(3), 1, True)


def test_select_picks_sinusoid():
    r = np.random.default_rng(1)
    t = np.arange(1800) / FS
    comps = np.vstack([r.standard_normal(1800), np.sin(2 * np.pi * 1.3 * t), r.standard_normal(1800)])
    assert select_pulse_component(fake_result(comps), FS) == 1
    flipped = comps * np.array([[-1.0], [-1.0], [1.0]])
    assert select_pulse_component(fake_result(flipped), FS) == 1


def test_select_ties_go_first():
    row = np.random.default_rng(2).standard_normal(1800)
    assert select_pulse_component(fake_result([row, row, row]), FS) == 0


def test_bandpass_passband():
    x = sine_trace(1.2, 60.0, FS)
    y = bandpass(x).samples
    core = slice(600, -600)
    amp_in, ph_in = fit_sinusoid(x.samples[core], FS, 1.2)
    amp_out, ph_out = fit_sinusoid(y[core], FS, 1.2)
    assert abs(amp_out / amp_in - 1) < 0.05
    assert abs(np.angle(np.exp(1j * (ph_out - ph_in)))) < 0.01


def test_bandpass_stopbands():
    assert np.max(np.abs(bandpass(ChannelTrace(np.full(1800, 5.0), FS)).samples)) < 1e-3
    y = bandpass(sine_trace(8.0, 30.0, FS)).samples
    assert fit_sinusoid(y[300:-300], FS, 8.0)[0] < 0.1


def test_band_validation():
    with pytest.raises(errors.BandInvalid):
        bandpass(sine_trace(1.0, 30.0, 6.0), BandLimits(0.7, 4.0))
    with pytest.raises(errors.BandInvalid):
        BandLimits(2.0, 1.0).validate(60.0)


def test_spectrum_sinusoid_peak_near_oracle():
    x = sine_trace(1.2, 30.0, FS)
    spec = power_spectrum(x)
    assert spec.resolution <= 0.01
    k = int(np.argmax(spec.power))
    oracle = dense_dft_peak(x.samples, FS, 0.5, 2.0, 0.0005)
    assert abs(spec.freqs[k] - oracle) <= spec.resolution
    assert abs(spec.freqs[k] - 1.2) <= spec.resolution


def test_spectrum_white_noise_flat():
    x = ChannelTrace(np.random.default_rng(1234).standard_normal(1800), FS)
    spec = power_spectrum(x)
    band = (spec.freqs >= 0.7) & (spec.freqs <= 4.0)
    assert spec.power[band].max() <= 10 * np.median(spec.power[band])


def test_spectrum_zero_input():
    assert np.all(power_spectrum(ChannelTrace(np.zeros(600), FS)).power == 0)


def test_peak_on_bin():
    freqs = np.arange(0, 10, 0.01)
    power = np.exp(-((freqs - 1.2) / 0.05) ** 2)
    assert spectrum_peak_hr(Spectrum(freqs, power)) == pytest.approx(72.0, abs=1e-9)


def test_peak_interpolated():
    x = sine_trace(1.25, 30.0, FS)
    hr = spectrum_peak_hr(power_spectrum(x))
    assert hr == pytest.approx(75.0, abs=0.3)
    assert hr == pytest.approx(60 * dense_dft_peak(x.samples, FS, 1.0, 1.5, 0.0005), abs=0.3)


def test_zero_power():
    with pytest.raises(errors.ZeroPower):
        spectrum_peak_hr(Spectrum(np.arange(0, 10, 0.01), np.zeros(1000)))


def test_sliding_window_count():
    series = sliding_hr(sine_trace(1.2, 600.0, FS))
    assert len(series) == 58
    np.testing.assert_allclose(series.times, np.arange(15, 586, 10))


def test_sliding_constant_hr():
    traces, _ = synth_traces(SynthSpec(duration=120.0), seed=9)
    series = sliding_hr(traces.channel("G"))
    assert np.all(np.abs(series.hr - 72.0) <= 1.0)


def test_sliding_too_short():
    with pytest.raises(errors.TraceTooShort):
        sliding_hr(sine_trace(1.2, 20.0, FS))
