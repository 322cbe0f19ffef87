"""STFT analysis/synthesis with square-root Hann windows.

Framing convention: the signal is front-padded with ``hop`` zeros and
back-padded so that the padded length is ``(T - 1) * hop + win_len`` with
``T = ceil(N / hop) + 1`` frames.  Analysis and synthesis both use the
square-root of a periodic Hann window, so the product window pair sums to
one on every original sample and synthesis needs no weight division.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig, NonFinite, OutLenTooLarge, ShapeMismatch
from .signals import AudioSignal


@dataclass(frozen=True)
class StftConfig:
    """Analysis geometry: window length and hop, both in samples.

    Only 50% overlap is supported (``hop == win_len // 2``); that is what
    makes the sqrt-Hann pair reconstruct exactly.
    """

    win_len: int = 512
    hop: int = 256

    def __post_init__(self):
        if self.win_len < 2 or self.win_len % 2 != 0:
            raise InvalidConfig("win_len must be even and >= 2, got %r"
                                % (self.win_len,))
        if self.hop * 2 != self.win_len:
            raise InvalidConfig("hop must equal win_len / 2, got hop=%r win_len=%r"
                                % (self.hop, self.win_len))

    @property
    def num_bands(self) -> int:
        return self.win_len // 2 + 1

    def num_frames(self, num_samples: int) -> int:
        if num_samples <= 0:
            raise InvalidConfig("num_samples must be positive")
        return -(-num_samples // self.hop) + 1

    def window(self) -> np.ndarray:
        n = np.arange(self.win_len)
        hann = 0.5 - 0.5 * np.cos(2.0 * np.pi * n / self.win_len)
        return np.sqrt(hann)


@dataclass
class Spectrogram:
    """Complex STFT coefficients, shape (num_bands, num_frames)."""

    data: np.ndarray
    config: StftConfig
    sample_rate: int

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.complex128)
        if self.data.ndim != 2 or self.data.shape[1] == 0:
            raise ShapeMismatch("expected a 2-D (bands, frames) array, got shape %r"
                                % (self.data.shape,))
        if self.data.shape[0] != self.config.num_bands:
            raise ShapeMismatch("band count %d does not match config (%d bands)"
                                % (self.data.shape[0], self.config.num_bands))
        if not np.all(np.isfinite(self.data)):
            raise NonFinite("spectrogram contains NaN or Inf")

    @property
    def num_bands(self) -> int:
        return self.data.shape[0]

    @property
    def num_frames(self) -> int:
        return self.data.shape[1]


def stft(signal: AudioSignal, config: StftConfig = StftConfig()) -> Spectrogram:
    """Analyze a signal into a (bands, frames) complex spectrogram.

    The forward DFT is unnormalized; ``istft`` applies the 1/win_len
    factor.  ``istft(stft(x), len(x))`` reproduces x to float64 round-off.
    """
    x = signal.samples
    hop, win_len = config.hop, config.win_len
    t_frames = config.num_frames(x.size)
    padded = np.zeros((t_frames - 1) * hop + win_len)
    padded[hop:hop + x.size] = x
    frames = np.lib.stride_tricks.sliding_window_view(padded, win_len)[::hop]
    coeff = np.fft.rfft(frames * config.window(), axis=1)
    return Spectrogram(coeff.T, config, signal.sample_rate)


def istft(spec: Spectrogram, out_len: int) -> AudioSignal:
    """Synthesize a time signal by windowed overlap-add.

    ``out_len`` may not exceed (num_frames - 1) * hop, the span where the
    analysis/synthesis window pair sums to unit weight.
    """
    config = spec.config
    hop, win_len = config.hop, config.win_len
    t_frames = spec.num_frames
    max_len = (t_frames - 1) * hop
    if out_len <= 0:
        raise OutLenTooLarge("out_len must be positive, got %d" % out_len)
    if out_len > max_len:
        raise OutLenTooLarge("out_len %d exceeds reconstructable span %d"
                             % (out_len, max_len))
    frames = np.fft.irfft(spec.data.T, n=win_len, axis=1) * config.window()
    acc = np.zeros((t_frames - 1) * hop + win_len)
    for t in range(t_frames):
        acc[t * hop:t * hop + win_len] += frames[t]
    return AudioSignal(acc[hop:hop + out_len], spec.sample_rate)
