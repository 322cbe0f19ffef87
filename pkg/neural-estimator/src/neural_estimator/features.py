"""STFT analysis and real/imaginary feature packing.

The framing convention matches the companion identification toolkit so
that spectrograms and CTF1 files interchange: sqrt periodic-Hann window,
50% overlap, one hop of leading zero padding, back padding to
``(T - 1) * hop + win_len`` with ``T = ceil(N / hop) + 1``, unnormalized
forward DFT.
"""

from dataclasses import dataclass

import torch

from .errors import NonFinite, ShapeMismatch


@dataclass(frozen=True)
class StftGeometry:
    """Window length and hop in samples; only 50% overlap is supported."""

    win_len: int = 512
    hop: int = 256

    def __post_init__(self):
        if self.win_len < 2 or self.win_len % 2 != 0:
            raise ShapeMismatch("win_len must be even and >= 2")
        if self.hop * 2 != self.win_len:
            raise ShapeMismatch("hop must equal win_len / 2")

    @property
    def num_bands(self) -> int:
        return self.win_len // 2 + 1

    def window(self, dtype=torch.float64) -> torch.Tensor:
        return torch.hann_window(self.win_len, periodic=True,
                                 dtype=dtype).sqrt()


def stft(signal: torch.Tensor, geometry: StftGeometry = StftGeometry()
         ) -> torch.Tensor:
    """Complex (bands, frames) spectrogram of a 1-D signal."""
    if signal.ndim != 1 or signal.numel() == 0:
        raise ShapeMismatch("expected a non-empty 1-D signal")
    if not torch.isfinite(signal).all():
        raise NonFinite("signal contains NaN or Inf")
    hop, win_len = geometry.hop, geometry.win_len
    n = signal.numel()
    t_frames = -(-n // hop) + 1
    padded = signal.new_zeros((t_frames - 1) * hop + win_len)
    padded[hop:hop + n] = signal
    frames = padded.unfold(0, win_len, hop)
    return torch.fft.rfft(frames * geometry.window(signal.dtype), dim=1).T


def pack_features(spec: torch.Tensor) -> torch.Tensor:
    """Stack real and imaginary parts as channels: (F, T) -> (2, F, T).

    Lossless: ``unpack_features(pack_features(Y))`` equals Y exactly.
    """
    if spec.ndim != 2:
        raise ShapeMismatch("expected a 2-D (bands, frames) spectrogram")
    if not spec.is_complex():
        raise ShapeMismatch("expected a complex spectrogram")
    if not torch.isfinite(spec.real).all() or not torch.isfinite(spec.imag).all():
        raise NonFinite("spectrogram contains NaN or Inf")
    return torch.stack([spec.real, spec.imag])


def unpack_features(tensor: torch.Tensor) -> torch.Tensor:
    """Inverse of pack_features: (2, F, T) -> complex (F, T)."""
    if tensor.ndim != 3 or tensor.shape[0] != 2:
        raise ShapeMismatch("expected a (2, bands, frames) tensor")
    return torch.complex(tensor[0], tensor[1])
