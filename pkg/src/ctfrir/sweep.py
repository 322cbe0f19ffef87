"""Exponential sine sweeps and filter-to-response conversion.

A per-band filter is turned back into a time-domain impulse response by
simulating an intrusive measurement: synthesize a known sweep, push its
spectrogram through the filter, resynthesize, and deconvolve with a
regularized inverse filter.
"""

from dataclasses import dataclass

import numpy as np
import scipy.signal

from .ctf import CtfFilter, ctf_convolve
from .errors import InvalidSpec, NonFinite, PeakNotFound, ShapeMismatch
from .signals import DEFAULT_SAMPLE_RATE, AudioSignal, Rir
from .stft import istft, stft


@dataclass(frozen=True)
class SweepSpec:
    """Exponential sine sweep parameters.

    Frequency runs from ``f1`` to ``f2`` Hz over ``duration`` seconds;
    raised-cosine fades of ``fade_in`` / ``fade_out`` samples taper the
    ends.  ``eps`` regularizes the spectral inversion.
    """

    f1: float = 62.5
    f2: float = 8000.0
    duration: float = 8.192
    sample_rate: int = DEFAULT_SAMPLE_RATE
    fade_in: int = 256
    fade_out: int = 128
    eps: float = 1e-8

    def __post_init__(self):
        if not (0.0 < self.f1 < self.f2 <= self.sample_rate / 2):
            raise InvalidSpec("need 0 < f1 < f2 <= sample_rate / 2")
        if self.duration <= 0:
            raise InvalidSpec("duration must be positive")
        n = round(self.duration * self.sample_rate)
        if self.fade_in < 0 or self.fade_out < 0 or self.fade_in + self.fade_out > n:
            raise InvalidSpec("fades must be nonnegative and fit in the sweep")
        if not 0 < self.eps < 1:
            raise InvalidSpec("eps must lie in (0, 1)")

    @property
    def num_samples(self) -> int:
        return round(self.duration * self.sample_rate)


def gen_log_sweep(spec: SweepSpec) -> AudioSignal:
    """Synthesize the exponential sine sweep described by ``spec``.

    Instantaneous frequency rises exponentially from f1 (at t = 0) to f2
    (at t = duration).  The first sample is zero and the fade-in envelope
    reaches one exactly at sample ``fade_in``.
    """
    n = spec.num_samples
    t = np.arange(n) / spec.sample_rate
    ln_ratio = np.log(spec.f2 / spec.f1)
    rate = spec.duration / ln_ratio
    phase = 2.0 * np.pi * spec.f1 * rate * (np.exp(t / rate) - 1.0)
    e = np.sin(phase)
    if spec.fade_in > 0:
        k = np.arange(spec.fade_in)
        e[:spec.fade_in] *= 0.5 - 0.5 * np.cos(np.pi * k / spec.fade_in)
    if spec.fade_out > 0:
        k = np.arange(spec.fade_out)
        e[n - spec.fade_out:] *= 0.5 - 0.5 * np.cos(
            np.pi * (spec.fade_out - 1 - k) / spec.fade_out)
    return AudioSignal(e, spec.sample_rate)


def _smoothstep(u: np.ndarray) -> np.ndarray:
    # 7th-order smoothstep: C^3 at both ends, keeps deconvolution ringing
    # near the peak below the -60 dB sidelobe budget.
    u = np.clip(u, 0.0, 1.0)
    return u ** 4 * (35.0 + u * (-84.0 + u * (70.0 - 20.0 * u)))


def _band_mask(freqs: np.ndarray, spec: SweepSpec,
               transition: float) -> np.ndarray:
    width_lo = min(transition, (spec.f2 - spec.f1) / 4.0)
    mask = _smoothstep((freqs - spec.f1) / width_lo)
    nyquist = spec.sample_rate / 2.0
    if spec.f2 < nyquist * (1.0 - 1e-12):
        width_hi = min(transition, (spec.f2 - spec.f1) / 4.0)
        mask *= _smoothstep((spec.f2 - freqs) / width_hi)
    mask[(freqs < spec.f1) | (freqs > spec.f2)] = 0.0
    return mask


def zero_lag_index(spec: SweepSpec) -> int:
    """Index of the deconvolution peak in conv(sweep, inverse)."""
    return spec.num_samples


def band_limit(h: Rir, spec: SweepSpec = SweepSpec(),
               transition: float = 2000.0, pad: int | None = None) -> Rir:
    """Project an impulse response onto the measurement band.

    Applies, zero-phase, the same spectral mask that shapes the inverse
    filter: hard zero outside [f1, f2], smooth transition inside.  Content
    outside the band cannot survive a band-limited measurement, so this is
    the natural reference when comparing a response against its recovered
    estimate.  The output grows by ``pad`` leading samples (default 96 ms)
    to hold the acausal ringing of the band edges; the direct index moves
    to the filtered peak.
    """
    if h.sample_rate != spec.sample_rate:
        raise ShapeMismatch("response is at %d Hz, sweep spec at %d Hz"
                            % (h.sample_rate, spec.sample_rate))
    if pad is None:
        pad = round(0.096 * spec.sample_rate)
    n = len(h)
    nfft = 1 << (n + 3 * max(pad, 1) - 1).bit_length()
    buf = np.zeros(nfft)
    buf[pad:pad + n] = h.samples
    freqs = np.fft.rfftfreq(nfft, 1.0 / spec.sample_rate)
    mask = _band_mask(freqs, spec, transition)
    out = np.fft.irfft(np.fft.rfft(buf) * mask, nfft)[:pad + n]
    return Rir(out, spec.sample_rate,
               direct_index=int(np.argmax(np.abs(out))))


def gen_inverse_filter(sweep: AudioSignal | None = None,
                       spec: SweepSpec = SweepSpec(),
                       eps: float | None = None,
                       transition: float = 2000.0) -> AudioSignal:
    """Regularized, band-limited inverse of the sweep.

    Built by spectral inversion conj(E) / (|E|^2 + eps * max |E|^2) over an
    FFT at least twice the sweep length, zeroed outside [f1, f2] with a
    smooth in-band transition of width ``transition`` Hz at each brick
    edge, and scaled so conv(sweep, inverse) is 1 at the zero-lag index.
    ``sweep`` defaults to gen_log_sweep(spec); ``eps`` overrides spec.eps.
    """
    if sweep is None:
        sweep = gen_log_sweep(spec)
    elif (sweep.sample_rate != spec.sample_rate
          or len(sweep) != spec.num_samples):
        raise ShapeMismatch("sweep was not generated from this spec")
    if eps is None:
        eps = spec.eps
    if not (np.isfinite(eps) and eps > 0.0):
        # A band-limited sweep has bins with no energy; unregularized
        # inversion would divide by zero there.
        raise NonFinite("eps must be positive and finite")
    e = sweep.samples
    n = e.size
    nfft = 1 << (2 * n - 1).bit_length()
    coeff = np.fft.rfft(e, nfft)
    power = coeff.real ** 2 + coeff.imag ** 2
    inv = np.conj(coeff) / (power + eps * power.max())
    freqs = np.fft.rfftfreq(nfft, 1.0 / spec.sample_rate)
    inv *= _band_mask(freqs, spec, transition)
    # Roll the circular response so zero lag sits at index n and the
    # acausal half does not wrap into the tail.
    v = np.roll(np.fft.irfft(inv, nfft), n)
    peak = scipy.signal.fftconvolve(e, v)[zero_lag_index(spec)]
    return AudioSignal(v / peak, spec.sample_rate)


def ctf_to_rir(filt: CtfFilter, spec: SweepSpec = SweepSpec()) -> Rir:
    """Convert a per-band filter to a time-domain impulse response.

    Runs the simulated measurement (sweep -> filter -> deconvolution) and
    extracts a window of num_taps * hop samples starting 1 ms before the
    zero-lag position; ``direct_index`` marks the peak of the extraction.
    """
    if filt.sample_rate != spec.sample_rate:
        raise ShapeMismatch("filter is at %d Hz, sweep spec at %d Hz"
                            % (filt.sample_rate, spec.sample_rate))
    sweep = gen_log_sweep(spec)
    span = filt.num_taps * filt.config.hop
    # Record past the sweep end so the filter's ring-out is captured.
    padded = AudioSignal(np.concatenate([sweep.samples, np.zeros(span)]),
                         spec.sample_rate)
    measured = istft(ctf_convolve(filt, stft(padded, filt.config)),
                     len(sweep) + span)
    v = gen_inverse_filter(sweep, spec)
    full = scipy.signal.fftconvolve(measured.samples, v.samples)
    lead = round(0.001 * spec.sample_rate)
    start = zero_lag_index(spec) - lead
    window = full[start:start + filt.num_taps * filt.config.hop]
    if not np.any(window):
        raise PeakNotFound("deconvolved response is identically zero")
    direct = int(np.argmax(np.abs(window)))
    return Rir(window, spec.sample_rate, direct_index=direct)
