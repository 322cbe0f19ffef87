"""Network that maps a noisy reverberant spectrogram to a per-band filter.

Input is a real/imaginary feature tensor shaped ``(2, F, T)``.  The
network produces three outputs:

* ``H`` shaped ``(2, F, L)`` — a length-``L`` filter per frequency band,
  applied along STFT frames; its length is independent of the input
  frame count because a softmax frame-weighting pools time away.
* ``X`` shaped ``(2, F, T)`` — the denoised reverberant spectrogram.
* ``S`` shaped ``(2, F, T)`` — the denoised *and* dereverberated
  (direct-path) spectrogram.

Structure: a frame-wise input convolution lifts the two channels to an
embedding; a denoising stage and then a dereverberation stage refine it,
each stage a stack of blocks pairing a cross-band unit (convolution
along frequency, frames independent) with a narrow-band unit
(bidirectional recurrence along frames, bands independent and
parameter-shared).  The filter head blends the two stage outputs with
learnable scalars, runs extra narrow-band blocks, pools frames with
per-band softmax weights, and decodes ``2 L`` values per band.
"""

from dataclasses import dataclass

import torch
from torch import nn

from .errors import ShapeMismatch

_NARROWBAND_KINDS = ("bigru",)


@dataclass(frozen=True)
class NetConfig:
    """Hyperparameters of the estimator.

    Defaults are full scale; desk-size experiments shrink them (for
    example ``embed_dim=24, num_dereverb_blocks=2``, or smaller still
    for unit tests).  ``narrowband`` records which bidirectional
    sequence layer the narrow-band units use, so runs are labeled with
    the substitution they actually made ("bigru" = bidirectional GRU).
    """

    num_denoise_blocks: int = 2
    num_dereverb_blocks: int = 6
    num_filter_blocks: int = 4
    embed_dim: int = 96
    num_taps: int = 60
    kernel_size: int = 5
    narrowband: str = "bigru"

    def __post_init__(self):
        for name in ("num_denoise_blocks", "num_dereverb_blocks",
                     "num_filter_blocks", "embed_dim", "num_taps",
                     "kernel_size"):
            if int(getattr(self, name)) < 1:
                raise ShapeMismatch(f"{name} must be a positive integer")
        if self.kernel_size % 2 != 1:
            raise ShapeMismatch("kernel_size must be odd")
        if self.narrowband not in _NARROWBAND_KINDS:
            raise ShapeMismatch(
                f"unknown narrowband layer {self.narrowband!r};"
                f" supported: {_NARROWBAND_KINDS}")


class FrameConv(nn.Module):
    """Input lift: 1-D convolution along frames, each band separately."""

    def __init__(self, channels: int, kernel_size: int):
        super().__init__()
        self.conv = nn.Conv1d(2, channels, kernel_size,
                              padding=kernel_size // 2)

    def forward(self, y: torch.Tensor) -> torch.Tensor:
        # (B, 2, F, T) -> (B, F, T, C)
        b, _, f, t = y.shape
        x = y.permute(0, 2, 1, 3).reshape(b * f, 2, t)
        x = self.conv(x)
        return x.reshape(b, f, -1, t).permute(0, 1, 3, 2)


class CrossBandBlock(nn.Module):
    """Mixes information across frequency bands; frames stay independent."""

    def __init__(self, channels: int, kernel_size: int):
        super().__init__()
        self.norm = nn.LayerNorm(channels)
        self.conv = nn.Conv1d(channels, channels, kernel_size,
                              padding=kernel_size // 2)
        self.act = nn.LeakyReLU()
        self.proj = nn.Linear(channels, channels)

    def forward(self, e: torch.Tensor) -> torch.Tensor:
        # (B, F, T, C), convolving along F within each frame
        b, f, t, c = e.shape
        x = self.norm(e)
        x = x.permute(0, 2, 3, 1).reshape(b * t, c, f)
        x = self.conv(x)
        x = x.reshape(b, t, c, f).permute(0, 3, 1, 2)
        return e + self.proj(self.act(x))


class NarrowBandBlock(nn.Module):
    """Bidirectional recurrence along frames, one band at a time.

    All bands share the same parameters, so permuting the band axis of
    the input permutes the output identically.
    """

    def __init__(self, channels: int, narrowband: str = "bigru"):
        super().__init__()
        if narrowband not in _NARROWBAND_KINDS:
            raise ShapeMismatch(
                f"unknown narrowband layer {narrowband!r}")
        self.norm = nn.LayerNorm(channels)
        self.rnn = nn.GRU(channels, channels, batch_first=True,
                          bidirectional=True)
        self.proj = nn.Linear(2 * channels, channels)

    def forward(self, e: torch.Tensor) -> torch.Tensor:
        # (B, F, T, C), recurring along T within each band
        b, f, t, c = e.shape
        x = self.norm(e).reshape(b * f, t, c)
        x, _ = self.rnn(x)
        x = self.proj(x)
        return e + x.reshape(b, f, t, c)


class DualPathBlock(nn.Module):
    """One cross-band unit followed by one narrow-band unit."""

    def __init__(self, channels: int, kernel_size: int, narrowband: str):
        super().__init__()
        self.cross = CrossBandBlock(channels, kernel_size)
        self.narrow = NarrowBandBlock(channels, narrowband)

    def forward(self, e: torch.Tensor) -> torch.Tensor:
        return self.narrow(self.cross(e))


class SpectrumDecoder(nn.Module):
    """Two linear layers with LeakyReLU; emits a 2-channel spectrogram."""

    def __init__(self, channels: int):
        super().__init__()
        self.net = nn.Sequential(nn.Linear(channels, channels),
                                 nn.LeakyReLU(),
                                 nn.Linear(channels, 2))

    def forward(self, e: torch.Tensor) -> torch.Tensor:
        # (B, F, T, C) -> (B, 2, F, T)
        return self.net(e).permute(0, 3, 1, 2)


class FrameWeightBlock(nn.Module):
    """Per-band softmax weights over frames; each band's weights sum to 1."""

    def __init__(self, channels: int):
        super().__init__()
        self.net = nn.Sequential(nn.Linear(channels, channels),
                                 nn.LeakyReLU(),
                                 nn.Linear(channels, 1))

    def forward(self, e: torch.Tensor) -> torch.Tensor:
        # (B, F, T, C) -> (B, F, T)
        return torch.softmax(self.net(e).squeeze(-1), dim=-1)


class FilterDecoder(nn.Module):
    """Two linear layers with LeakyReLU; emits 2*L values per band."""

    def __init__(self, channels: int, num_taps: int):
        super().__init__()
        self.net = nn.Sequential(nn.Linear(channels, channels),
                                 nn.LeakyReLU(),
                                 nn.Linear(channels, 2 * num_taps))

    def forward(self, e: torch.Tensor) -> torch.Tensor:
        # (B, F, C) -> (B, 2, F, L)
        x = self.net(e)
        b, f, _ = x.shape
        return x.reshape(b, f, 2, -1).permute(0, 2, 1, 3)


class CtfEstimator(nn.Module):
    """Full estimator; see module docstring for the data flow."""

    def __init__(self, config: NetConfig = NetConfig()):
        super().__init__()
        self.config = config
        c, k, nb = config.embed_dim, config.kernel_size, config.narrowband
        self.input_conv = FrameConv(c, k)
        self.denoise = nn.ModuleList(
            DualPathBlock(c, k, nb) for _ in range(config.num_denoise_blocks))
        self.dereverb = nn.ModuleList(
            DualPathBlock(c, k, nb) for _ in range(config.num_dereverb_blocks))
        self.decode_reverb = SpectrumDecoder(c)
        self.decode_direct = SpectrumDecoder(c)
        self.alpha = nn.Parameter(torch.tensor(0.5))
        self.beta = nn.Parameter(torch.tensor(0.5))
        self.filter_blocks = nn.ModuleList(
            NarrowBandBlock(c, nb) for _ in range(config.num_filter_blocks))
        self.frame_weights = FrameWeightBlock(c)
        self.decode_filter = FilterDecoder(c, config.num_taps)

    def forward(self, y: torch.Tensor, return_weights: bool = False):
        """Map features (2, F, T) or (B, 2, F, T) to (H, X, S).

        With ``return_weights=True`` also returns the per-band frame
        weights, shaped (F, T) (or (B, F, T) when batched).
        """
        single = y.ndim == 3
        if single:
            y = y.unsqueeze(0)
        if y.ndim != 4 or y.shape[1] != 2:
            raise ShapeMismatch(
                f"expected (2, F, T) or (batch, 2, F, T), got {tuple(y.shape)}")
        if y.shape[2] < 1 or y.shape[3] < 1:
            raise ShapeMismatch("empty frequency or frame axis")

        e_noi = self.input_conv(y)
        for block in self.denoise:
            e_noi = block(e_noi)
        e_rev = e_noi
        for block in self.dereverb:
            e_rev = block(e_rev)

        x_hat = self.decode_reverb(e_noi)
        s_hat = self.decode_direct(e_rev)

        e_ctf = self.alpha * e_noi + self.beta * e_rev
        for block in self.filter_blocks:
            e_ctf = block(e_ctf)
        weights = self.frame_weights(e_ctf)
        pooled = (e_ctf * weights.unsqueeze(-1)).sum(dim=2)
        h_hat = self.decode_filter(pooled)

        if single:
            h_hat, x_hat, s_hat = h_hat[0], x_hat[0], s_hat[0]
            weights = weights[0]
        if return_weights:
            return h_hat, x_hat, s_hat, weights
        return h_hat, x_hat, s_hat
