"""Synthetic room impulse responses and dataset mixing.

Shoebox rooms use the image-source method with frequency-independent wall
reflection; statistical responses use an exponentially decaying Gaussian
tail behind a dominant direct impulse.  ``mix_dataset`` assembles aligned
(mix, reverberant, direct-path) triples at a prescribed SNR.
"""

from dataclasses import dataclass

import numpy as np
import scipy.signal

from .errors import (InvalidGeometry, InvalidTarget, ZeroNoise, ZeroSpeech)
from .signals import DEFAULT_SAMPLE_RATE, DEFAULT_SEED, AudioSignal, Rir

#: Sabine constant (metric units).
SABINE = 0.161

#: Half-width of the fractional-delay interpolator (81 taps total).
SINC_HALF = 40

SPEED_OF_SOUND = 343.0


@dataclass(frozen=True)
class RoomSpec:
    """Shoebox room geometry for the image-source model.

    ``absorption`` is one coefficient in (0, 1] shared by all six surfaces
    or a sequence of six (x0, x1, y0, y1, z0, z1).  ``max_order`` caps the
    total reflection count per image; None means unlimited (images are
    then pruned only by the requested response length).
    """

    dimensions: tuple
    source: tuple
    mic: tuple
    absorption: object = 0.3
    max_order: int | None = None
    speed_of_sound: float = SPEED_OF_SOUND

    def __post_init__(self):
        dims = np.asarray(self.dimensions, dtype=np.float64)
        src = np.asarray(self.source, dtype=np.float64)
        mic = np.asarray(self.mic, dtype=np.float64)
        if dims.shape != (3,) or src.shape != (3,) or mic.shape != (3,):
            raise InvalidGeometry("dimensions, source, and mic must be 3-vectors")
        if np.any(dims <= 0):
            raise InvalidGeometry("room dimensions must be positive")
        for name, p in (("source", src), ("mic", mic)):
            if np.any(p <= 0) or np.any(p >= dims):
                raise InvalidGeometry("%s must lie strictly inside the room" % name)
        if np.array_equal(src, mic):
            raise InvalidGeometry("source and mic coincide")
        alpha = self.absorption_coefficients()
        if np.any(alpha <= 0) or np.any(alpha > 1):
            raise InvalidGeometry("absorption must lie in (0, 1]")
        if self.max_order is not None and self.max_order < 0:
            raise InvalidGeometry("max_order must be nonnegative or None")
        if self.speed_of_sound <= 0:
            raise InvalidGeometry("speed_of_sound must be positive")

    def absorption_coefficients(self) -> np.ndarray:
        alpha = np.asarray(self.absorption, dtype=np.float64)
        if alpha.ndim == 0:
            alpha = np.repeat(alpha, 6)
        if alpha.shape != (6,):
            raise InvalidGeometry("absorption must be a scalar or six values")
        return alpha


@dataclass(frozen=True)
class MixSpec:
    """Target signal-to-noise ratio in dB and the seed for noise placement."""

    snr: float = 20.0
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if not np.isfinite(self.snr):
            raise InvalidTarget("snr must be finite")


def absorption_for_rt60(dimensions, rt60_target: float) -> float:
    """Uniform absorption that gives the target RT60 by Sabine's formula."""
    dims = np.asarray(dimensions, dtype=np.float64)
    if dims.shape != (3,) or np.any(dims <= 0):
        raise InvalidGeometry("dimensions must be three positive values")
    if rt60_target <= 0:
        raise InvalidTarget("rt60 target must be positive")
    volume = dims.prod()
    surface = 2.0 * (dims[0] * dims[1] + dims[0] * dims[2] + dims[1] * dims[2])
    alpha = SABINE * volume / (surface * rt60_target)
    if alpha > 1.0:
        raise InvalidTarget("target RT60 %.3f s needs absorption > 1 in this room"
                            % rt60_target)
    return float(alpha)


def _axis_images(room_len: float, src: float, mic: float, reach: float):
    """Image coordinates along one axis with reflection counts per wall."""
    n_max = int(reach / (2.0 * room_len)) + 2
    n = np.arange(-n_max, n_max + 1)
    coords, low_counts, high_counts = [], [], []
    for q in (0, 1):
        coords.append((1 - 2 * q) * src + 2.0 * n * room_len - mic)
        low_counts.append(np.abs(n - q))
        high_counts.append(np.abs(n))
    return (np.concatenate(coords), np.concatenate(low_counts),
            np.concatenate(high_counts))


def _deposit(out: np.ndarray, pos: np.ndarray, amp: np.ndarray):
    """Add windowed-sinc pulses at fractional sample positions."""
    half = SINC_HALF
    support = half + 0.5
    n0 = np.round(pos).astype(np.int64)
    frac = pos - n0
    sin_pf = np.sin(np.pi * frac)
    cos_w = np.cos(np.pi * frac / support)
    sin_w = np.sin(np.pi * frac / support)
    for k in range(-half, half + 1):
        u = k - frac
        window = 0.5 * (1.0 + np.cos(np.pi * k / support) * cos_w
                        + np.sin(np.pi * k / support) * sin_w)
        sign = -1.0 if k % 2 else 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            core = -sign * sin_pf / (np.pi * u)
        core = np.where(np.abs(u) < 1e-12, 1.0, core)
        idx = n0 + k
        valid = (idx >= 0) & (idx < out.size)
        if np.any(valid):
            out += np.bincount(idx[valid], weights=(amp * core * window)[valid],
                               minlength=out.size)


def simulate_ism(room: RoomSpec, sample_rate: int = DEFAULT_SAMPLE_RATE,
                 length: int = DEFAULT_SAMPLE_RATE) -> Rir:
    """Image-source impulse response of ``length`` samples.

    Each image contributes an 81-tap Hann-windowed-sinc pulse at its
    fractional arrival time with amplitude (product of wall reflection
    coefficients) / (4 pi distance).  ``direct_index`` is the rounded
    direct arrival.
    """
    if length <= 0:
        raise InvalidGeometry("length must be positive")
    dims = np.asarray(room.dimensions, dtype=np.float64)
    src = np.asarray(room.source, dtype=np.float64)
    mic = np.asarray(room.mic, dtype=np.float64)
    c = room.speed_of_sound
    beta = np.sqrt(1.0 - room.absorption_coefficients())
    reach = (length + SINC_HALF) / sample_rate * c

    axes = [_axis_images(dims[i], src[i], mic[i], reach) for i in range(3)]
    bx = beta[0] ** axes[0][1] * beta[1] ** axes[0][2]
    by = beta[2] ** axes[1][1] * beta[3] ** axes[1][2]
    bz = beta[4] ** axes[2][1] * beta[5] ** axes[2][2]
    ox = axes[0][1] + axes[0][2]
    oy = axes[1][1] + axes[1][2]
    oz = axes[2][1] + axes[2][2]
    dx2 = axes[0][0] ** 2
    dy2 = axes[1][0] ** 2

    out = np.zeros(length)
    positions, amplitudes = [], []
    plane_d2 = dx2[:, None] + dy2[None, :]
    plane_b = bx[:, None] * by[None, :]
    plane_o = ox[:, None] + oy[None, :]
    for j in range(axes[2][0].size):
        d2 = plane_d2 + axes[2][0][j] ** 2
        dist = np.sqrt(d2)
        keep = dist <= reach
        if room.max_order is not None:
            keep &= plane_o + oz[j] <= room.max_order
        if not np.any(keep):
            continue
        dist = dist[keep]
        amp = (plane_b[keep] * bz[j]) / (4.0 * np.pi * dist)
        positions.append(dist / c * sample_rate)
        amplitudes.append(amp)
    if positions:
        _deposit(out, np.concatenate(positions), np.concatenate(amplitudes))

    direct = int(round(np.linalg.norm(src - mic) / c * sample_rate))
    if direct >= length:
        raise InvalidGeometry("length %d too short for the direct arrival at %d"
                              % (length, direct))
    return Rir(out, sample_rate, direct_index=direct)


def gen_polack(rt60_target: float, drr_target: float,
               sample_rate: int = DEFAULT_SAMPLE_RATE,
               length: int = DEFAULT_SAMPLE_RATE,
               seed: int = DEFAULT_SEED) -> Rir:
    """Statistical impulse response: direct impulse plus Gaussian tail.

    The tail starts 2.5 ms after the direct impulse and decays as
    10^(-3 n / (fs * rt60_target)); the direct amplitude is set so the
    realized direct-to-reverberant ratio equals ``drr_target`` exactly
    under the acoustics-module windows.
    """
    if rt60_target <= 0 or not np.isfinite(drr_target):
        raise InvalidTarget("rt60 must be positive and drr finite")
    if length < 1.5 * rt60_target * sample_rate:
        raise InvalidTarget("length must cover at least 1.5 x rt60")
    gap = round(0.0025 * sample_rate)
    rng = np.random.default_rng(seed)
    h = np.zeros(length)
    n = np.arange(length - gap, dtype=np.float64)
    envelope = 10.0 ** (-3.0 * n / (sample_rate * rt60_target))
    h[gap:] = rng.standard_normal(length - gap) * envelope
    late_energy = float((h[gap:] ** 2).sum())
    h[0] = np.sqrt(late_energy * 10.0 ** (drr_target / 10.0))
    return Rir(h, sample_rate, direct_index=0)


def mix_dataset(speech: AudioSignal, h: Rir, h_direct: Rir,
                noise: AudioSignal, mix: MixSpec):
    """Reverberate, add noise at the target SNR, and keep the aligned
    direct-path reference.

    Returns ``(mixture, reverberant, direct_path)`` as AudioSignals of a
    common length (full convolution of speech with ``h``).  Noise shorter
    than that is extended cyclically from a seeded offset; longer noise is
    used from the start.  The SNR is the energy ratio of the reverberant
    image to the scaled noise.
    """
    for sig in (h, h_direct, noise):
        if sig.sample_rate != speech.sample_rate:
            raise InvalidTarget("all inputs must share one sample rate")
    if not np.any(speech.samples):
        raise ZeroSpeech("speech is identically zero")
    if not np.any(noise.samples):
        raise ZeroNoise("noise is identically zero")

    reverb = scipy.signal.fftconvolve(speech.samples, h.samples)
    out_len = reverb.size
    direct = scipy.signal.fftconvolve(speech.samples, h_direct.samples)
    if direct.size < out_len:
        direct = np.concatenate([direct, np.zeros(out_len - direct.size)])
    direct = direct[:out_len]

    w = noise.samples
    if w.size >= out_len:
        w = w[:out_len]
    else:
        offset = int(np.random.default_rng(mix.seed).integers(w.size))
        w = np.resize(np.roll(w, -offset), out_len)
    gain = np.sqrt((reverb ** 2).sum()
                   / ((w ** 2).sum() * 10.0 ** (mix.snr / 10.0)))
    mixture = reverb + gain * w
    fs = speech.sample_rate
    return (AudioSignal(mixture, fs), AudioSignal(reverb, fs),
            AudioSignal(direct, fs))
