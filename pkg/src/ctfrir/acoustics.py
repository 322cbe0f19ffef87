"""Acoustic parameters of impulse responses: decay curve, RT60, DRR, C50.

All ratios are energy ratios in dB.  DRR and C50 are clamped to +/- 80 dB
so empty or silent regions stay representable.  Every parameter here is
invariant to amplitude scaling, and shifting a response (with its direct
index) leaves the values unchanged.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InsufficientDecayRange, TooShort, ZeroEnergy
from .signals import Rir

#: Clamp applied to DRR and C50 when one side of the ratio has no energy.
DB_CLAMP = 80.0

#: Direct-sound window around the direct index: 0.5 ms before, 2.5 ms after.
DIRECT_PRE = 0.0005
DIRECT_POST = 0.0025

#: Early/late split for C50.
EARLY_SPAN = 0.050


@dataclass(frozen=True)
class AcousticParams:
    rt60: float
    drr: float
    c50: float


def edc(h: Rir) -> np.ndarray:
    """Energy decay curve in dB: 10*log10 of the normalized tail energy.

    Starts at exactly 0 dB and never increases; entries where the tail
    energy underflows to zero are -inf.
    """
    energy = h.samples ** 2
    tail = np.cumsum(energy[::-1])[::-1]
    # normalize by the same cumulative total so the first entry is 0 exactly
    total = tail[0]
    if total == 0.0:
        raise ZeroEnergy("impulse response has zero energy")
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(tail / total)


def _fit_range(curve: np.ndarray, fs: int, floor_db: float) -> float:
    start = int(np.argmax(curve <= -5.0))
    if curve[start] > -5.0:
        raise InsufficientDecayRange("decay never reaches -5 dB")
    below = np.nonzero(curve <= floor_db)[0]
    below = below[below >= start]
    if below.size == 0:
        raise InsufficientDecayRange("decay never reaches %.0f dB" % floor_db)
    stop = int(below[0])
    idx = np.arange(start, stop + 1)
    finite = np.isfinite(curve[idx])
    idx = idx[finite]
    if idx.size < 2:
        raise InsufficientDecayRange("too few points between -5 and %.0f dB"
                                     % floor_db)
    slope, _ = np.polyfit(idx / fs, curve[idx], 1)
    if slope >= 0.0:
        raise InsufficientDecayRange("decay curve is not decreasing")
    return -60.0 / slope


def rt60(h: Rir) -> float:
    """Reverberation time from a line fit on the decay curve.

    Fits the [-5, -35] dB span of the Schroeder curve and extrapolates to
    60 dB; falls back to [-5, -25] when the response never decays 35 dB.
    """
    curve = edc(h)
    try:
        return _fit_range(curve, h.sample_rate, -35.0)
    except InsufficientDecayRange:
        return _fit_range(curve, h.sample_rate, -25.0)


def _direct_slice(h: Rir) -> tuple[int, int]:
    fs = h.sample_rate
    lo = max(0, h.direct_index - round(DIRECT_PRE * fs))
    hi = min(len(h), h.direct_index + round(DIRECT_POST * fs))
    return lo, hi


def drr(h: Rir) -> float:
    """Direct-to-reverberant ratio in dB.

    Direct energy is the window [direct - 0.5 ms, direct + 2.5 ms); the
    reverberant part is everything after that window.  Samples before the
    window are ignored.
    """
    energy = h.samples ** 2
    lo, hi = _direct_slice(h)
    direct = energy[lo:hi].sum()
    late = energy[hi:].sum()
    if direct == 0.0 and late == 0.0:
        raise ZeroEnergy("no energy in or after the direct window")
    return _ratio_db(direct, late)


def c50(h: Rir) -> float:
    """Clarity index: early (first 50 ms from the direct index) over late
    energy, in dB.  Samples before the direct index are excluded."""
    fs = h.sample_rate
    span = round(EARLY_SPAN * fs)
    if len(h) - h.direct_index < span:
        raise TooShort("response must extend >= 50 ms past the direct index")
    energy = h.samples ** 2
    early = energy[h.direct_index:h.direct_index + span].sum()
    late = energy[h.direct_index + span:].sum()
    if early == 0.0 and late == 0.0:
        raise ZeroEnergy("no energy after the direct index")
    return _ratio_db(early, late)


def _ratio_db(num: float, den: float) -> float:
    if num == 0.0:
        return -DB_CLAMP
    if den == 0.0:
        return DB_CLAMP
    return float(np.clip(10.0 * np.log10(num / den), -DB_CLAMP, DB_CLAMP))


def acoustic_params(h: Rir) -> AcousticParams:
    """RT60, DRR, and C50 of one response."""
    return AcousticParams(rt60=rt60(h), drr=drr(h), c50=c50(h))
