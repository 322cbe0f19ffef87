"""Training losses on complex spectrograms.

``loss_ri_mag`` is the mean L1 distance over magnitude, real, and
imaginary parts; ``loss_composite`` combines a filter-reconstruction
term with weighted reverberant and clean terms.  The definitions match
the evaluation library that consumes the exported filters, so a loss
value computed here can be checked against that library on the same
inputs.
"""

from dataclasses import dataclass

import torch

from .errors import NonFinite, ShapeMismatch


@dataclass(frozen=True)
class LossWeights:
    """Weights of the reverberant and clean terms in the composite loss."""

    rvb: float = 1.0
    cln: float = 1.0

    def __post_init__(self):
        if not (torch.isfinite(torch.tensor(self.rvb))
                and torch.isfinite(torch.tensor(self.cln))):
            raise NonFinite("loss weights must be finite")
        if self.rvb < 0 or self.cln < 0:
            raise NonFinite("loss weights must be nonnegative")


def as_complex(t: torch.Tensor) -> torch.Tensor:
    """Accept a complex array or a 2-channel real feature tensor.

    Real inputs must carry the (real, imag) channel pair on the third
    axis from the end: (2, F, N) or (batch, 2, F, N).
    """
    if t.is_complex():
        return t
    if t.ndim < 3 or t.shape[-3] != 2:
        raise ShapeMismatch(
            f"expected complex data or a 2-channel tensor, got {tuple(t.shape)}")
    return torch.complex(t[..., 0, :, :], t[..., 1, :, :])


def ctf_convolve(filt: torch.Tensor, s: torch.Tensor) -> torch.Tensor:
    """Apply a per-band filter along the frame axis, zero initial history:

        out[f, t] = sum_l filt[f, l] * s[f, t - l]

    ``filt`` is (F, L) and ``s`` (F, T), optionally with leading batch
    axes; either may be complex or a 2-channel real feature tensor.
    """
    filt, s = as_complex(filt), as_complex(s)
    if filt.shape[:-1] != s.shape[:-1]:
        raise ShapeMismatch(
            f"filter bands {tuple(filt.shape)} do not match"
            f" spectrogram {tuple(s.shape)}")
    t_frames = s.shape[-1]
    out = torch.zeros_like(s)
    for lag in range(min(filt.shape[-1], t_frames)):
        shifted = torch.cat(
            [s.new_zeros(*s.shape[:-1], lag), s[..., :t_frames - lag]], dim=-1)
        out = out + filt[..., lag:lag + 1] * shifted
    return out


def loss_ri_mag(a: torch.Tensor, b: torch.Tensor) -> torch.Tensor:
    """Mean of |{|a|-|b|}| + |Re a - Re b| + |Im a - Im b| over all bins."""
    a, b = as_complex(a), as_complex(b)
    if a.shape != b.shape:
        raise ShapeMismatch(
            f"operand shapes differ: {tuple(a.shape)} vs {tuple(b.shape)}")
    return ((a.abs() - b.abs()).abs()
            + (a.real - b.real).abs()
            + (a.imag - b.imag).abs()).mean()


def loss_composite(filt: torch.Tensor, s: torch.Tensor, x: torch.Tensor,
                   x_hat: torch.Tensor, s_hat: torch.Tensor,
                   weights: LossWeights = LossWeights()) -> torch.Tensor:
    """Reconstruction loss plus weighted reverberant and clean terms:

        loss_ri_mag(filt (*) S, X)
        + weights.rvb * loss_ri_mag(X_hat, X)
        + weights.cln * loss_ri_mag(S_hat, S)
    """
    rec = loss_ri_mag(ctf_convolve(filt, s), x)
    rvb = loss_ri_mag(x_hat, x)
    cln = loss_ri_mag(s_hat, s)
    return rec + weights.rvb * rvb + weights.cln * cln
