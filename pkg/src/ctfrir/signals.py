"""Time-domain signal carriers shared across the toolkit."""

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySignal, NonFinite, ShapeMismatch

#: Seed used by every seeded default in the package (probe noise, CLI).
DEFAULT_SEED = 12345

#: Default sample rate in Hz.
DEFAULT_SAMPLE_RATE = 16000


def _as_samples(x) -> np.ndarray:
    samples = np.asarray(x, dtype=np.float64)
    if samples.ndim != 1 or samples.size == 0:
        raise EmptySignal("expected a non-empty 1-D sample array, got shape %r"
                          % (samples.shape,))
    if not np.all(np.isfinite(samples)):
        raise NonFinite("sample array contains NaN or Inf")
    return samples


@dataclass
class AudioSignal:
    """A mono sample array with its sample rate.

    Samples are held as float64; ``sample_rate`` is in Hz and must be
    positive.
    """

    samples: np.ndarray
    sample_rate: int = DEFAULT_SAMPLE_RATE

    def __post_init__(self):
        self.samples = _as_samples(self.samples)
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise EmptySignal("sample_rate must be a positive integer, got %r"
                              % (self.sample_rate,))
        self.sample_rate = int(self.sample_rate)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass
class Rir(AudioSignal):
    """A room impulse response.

    ``direct_index`` marks the sample of the direct-path arrival; it must
    carry the peak absolute amplitude of the response (ties from
    fractional-delay interpolation get a one-ulp-scale slack).
    """

    direct_index: int = 0

    def __post_init__(self):
        super().__post_init__()
        if not (0 <= self.direct_index < self.samples.size):
            raise ShapeMismatch(
                "direct_index %d outside [0, %d)" % (self.direct_index,
                                                     self.samples.size))
        peak = np.abs(self.samples).max()
        if peak == 0.0:
            raise EmptySignal("RIR has no nonzero sample")
        if abs(self.samples[self.direct_index]) < peak * (1.0 - 1e-9):
            raise ShapeMismatch(
                "direct_index %d does not carry the peak amplitude"
                % self.direct_index)
