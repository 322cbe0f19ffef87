"""Sweep measurement unit tests: excitation synthesis, regularized
inversion, band projection, and filter-to-response conversion."""

import numpy as np
import pytest
import scipy.signal

from ctfrir import (CtfFilter, Rir, StftConfig, SweepSpec, band_limit,
                    ctf_to_rir, gen_inverse_filter, gen_log_sweep)
from ctfrir.errors import (InvalidSpec, NonFinite, PeakNotFound,
                           ShapeMismatch)
from ctfrir.sweep import zero_lag_index

FS = 16000
SHORT = SweepSpec(duration=1.024)   # cheap spec for structural checks


def test_sweep_sample_count():
    assert len(gen_log_sweep(SweepSpec())) == 131072
    assert zero_lag_index(SweepSpec()) == 131072
    assert len(gen_log_sweep(SHORT)) == 16384


def test_sweep_instantaneous_frequency_law():
    # interior instantaneous frequency follows f1 * (f2/f1)^(t/T);
    # extrapolating the fitted exponential to the ends gives f1 and f2
    spec = SweepSpec(fade_in=0, fade_out=0)
    e = gen_log_sweep(spec).samples
    phase = np.unwrap(np.angle(scipy.signal.hilbert(e)))
    finst = np.gradient(phase) * spec.sample_rate / (2.0 * np.pi)
    t = np.arange(e.size) / spec.sample_rate
    sel = (t > 0.5) & (t < spec.duration - 0.7)
    coef = np.polyfit(t[sel], np.log(finst[sel]), 1)
    assert np.exp(np.polyval(coef, 0.0)) == pytest.approx(spec.f1, rel=1e-3)
    assert np.exp(np.polyval(coef, spec.duration)) == pytest.approx(spec.f2,
                                                                    rel=1e-3)


def test_sweep_fades():
    spec = SHORT
    faded = gen_log_sweep(spec).samples
    plain = gen_log_sweep(SweepSpec(duration=spec.duration, fade_in=0,
                                    fade_out=0)).samples
    assert faded[0] == 0.0
    # the fade envelope ends exactly at the fade-in boundary
    k = np.arange(spec.fade_in)
    env = 0.5 - 0.5 * np.cos(np.pi * k / spec.fade_in)
    assert np.abs(faded[:spec.fade_in] - env * plain[:spec.fade_in]).max() \
        <= 1e-15
    n = len(faded)
    assert np.array_equal(faded[spec.fade_in:n - spec.fade_out],
                          plain[spec.fade_in:n - spec.fade_out])


def test_spec_validation():
    with pytest.raises(InvalidSpec):
        SweepSpec(f1=9000.0, f2=8000.0)
    with pytest.raises(InvalidSpec):
        SweepSpec(f2=9000.0)   # above Nyquist at 16 kHz
    with pytest.raises(InvalidSpec):
        SweepSpec(duration=0.0)
    with pytest.raises(InvalidSpec):
        SweepSpec(duration=0.01, fade_in=200, fade_out=200)
    with pytest.raises(InvalidSpec):
        SweepSpec(eps=0.0)


def test_inverse_filter_unit_peak_and_sidelobes():
    e = gen_log_sweep(SHORT).samples
    v = gen_inverse_filter(spec=SHORT).samples
    d = scipy.signal.fftconvolve(e, v)
    z = zero_lag_index(SHORT)
    assert d[z] == pytest.approx(1.0, abs=1e-12)
    assert np.abs(d).max() == pytest.approx(1.0, abs=1e-9)
    # outside the +-1 ms resolution window everything is small even for
    # this short sweep; the full-length budget lives in the acceptance run
    guard = round(0.001 * SHORT.sample_rate)
    side = np.abs(np.concatenate([d[:z - guard], d[z + guard + 1:]])).max()
    assert 20.0 * np.log10(side) <= -45.0


def test_inverse_filter_argument_contracts():
    sweep = gen_log_sweep(SHORT)
    same = gen_inverse_filter(sweep, SHORT)
    assert np.array_equal(same.samples, gen_inverse_filter(spec=SHORT).samples)
    assert np.all(np.isfinite(gen_inverse_filter(spec=SHORT, eps=1e-4).samples))
    with pytest.raises(NonFinite):
        gen_inverse_filter(sweep, SHORT, eps=0.0)
    with pytest.raises(ShapeMismatch):
        gen_inverse_filter(gen_log_sweep(SweepSpec(duration=0.512)), SHORT)


def test_identity_filter_round_trip():
    # measuring the identity filter recovers a band-limited impulse:
    # unit peak 1 ms into the extraction, nothing outside the kernel
    cfg = StftConfig()
    coeffs = np.zeros((cfg.num_bands, 10), dtype=complex)
    coeffs[:, 0] = 1.0
    rec = ctf_to_rir(CtfFilter(coeffs, cfg, FS), SHORT)
    assert len(rec) == 10 * cfg.hop
    lead = round(0.001 * FS)
    assert abs(rec.direct_index - lead) <= 1
    assert rec.samples[rec.direct_index] == pytest.approx(1.0, abs=0.01)
    # residual outside the +-1 ms measurement kernel
    mask = np.ones(len(rec), dtype=bool)
    mask[max(0, rec.direct_index - lead):rec.direct_index + lead + 1] = False
    resid = (rec.samples[mask] ** 2).sum() / rec.samples[rec.direct_index] ** 2
    assert 10.0 * np.log10(resid) <= -40.0


def test_conversion_is_linear_in_the_filter():
    cfg = StftConfig()
    rng = np.random.default_rng(7)
    coeffs = (rng.standard_normal((cfg.num_bands, 8)) * 0.05
              + 1j * rng.standard_normal((cfg.num_bands, 8)) * 0.05)
    coeffs[:, 0] += 1.0
    base = ctf_to_rir(CtfFilter(coeffs, cfg, FS), SHORT)
    scaled = ctf_to_rir(CtfFilter(2.5 * coeffs, cfg, FS), SHORT)
    assert np.abs(scaled.samples - 2.5 * base.samples).max() <= 1e-9


def test_all_zero_filter_raises():
    cfg = StftConfig()
    coeffs = np.zeros((cfg.num_bands, 4), dtype=complex)
    with pytest.raises(PeakNotFound):
        ctf_to_rir(CtfFilter(coeffs, cfg, FS), SHORT)


def test_conversion_checks_sample_rate():
    cfg = StftConfig()
    coeffs = np.zeros((cfg.num_bands, 4), dtype=complex)
    coeffs[:, 0] = 1.0
    with pytest.raises(ShapeMismatch):
        ctf_to_rir(CtfFilter(coeffs, cfg, 48000), SHORT)


def test_band_limit_passes_mid_band():
    n = 4000
    t = np.arange(n) / FS
    tone = np.sin(2.0 * np.pi * 4000.0 * t) * np.hanning(n) + 1e-9
    h = Rir(tone, FS, direct_index=int(np.argmax(np.abs(tone))))
    out = band_limit(h)
    pad = len(out) - n
    core = out.samples[pad:pad + n]
    assert np.linalg.norm(core - h.samples) / np.linalg.norm(h.samples) <= 1e-6


def test_band_limit_removes_sub_band_content():
    n = 4000
    t = np.arange(n) / FS
    delta = np.zeros(n)
    delta[0] = 1.0
    slow = 0.5 * np.sin(2.0 * np.pi * 30.0 * t)
    with_wave = band_limit(Rir(delta + slow, FS, direct_index=0))
    without = band_limit(Rir(delta, FS, direct_index=0))
    resid = (np.linalg.norm(with_wave.samples - without.samples)
             / np.linalg.norm(without.samples))
    assert resid <= 0.05
    spectrum = np.abs(np.fft.rfft(with_wave.samples, 1 << 16)) ** 2
    freqs = np.fft.rfftfreq(1 << 16, 1.0 / FS)
    spec = SweepSpec()
    out_of_band = spectrum[(freqs < spec.f1) | (freqs > spec.f2)].sum()
    assert out_of_band / spectrum.sum() <= 1e-5


def test_band_limit_checks_sample_rate():
    h = Rir(np.concatenate([[1.0], np.zeros(99)]), 48000, direct_index=0)
    with pytest.raises(ShapeMismatch):
        band_limit(h, SweepSpec())
