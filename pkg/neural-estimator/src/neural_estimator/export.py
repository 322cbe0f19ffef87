"""Export estimated filters in the binary CTF1 exchange format.

Layout (little-endian): magic ``CTF1``; u32 band count F; u32 tap count
L; u32 sample_rate; u32 win_len; u32 hop; then F*L complex values as
interleaved (real, imag) 32-bit floats in band-major order.
"""

import os
import struct

import numpy as np
import torch

from .errors import IoError, NonFinite, ShapeMismatch
from .features import StftGeometry

_HEADER = struct.Struct("<4sIIIII")
_MAGIC = b"CTF1"


def export_ctf(filt: torch.Tensor, sample_rate: int, path: str,
               geometry: StftGeometry = StftGeometry()):
    """Write a filter tensor — (2, F, L) real channels or (F, L) complex —
    to ``path``.  The band count must match the STFT geometry
    (F = win_len // 2 + 1).  Writing is atomic (temp file then rename)."""
    if filt.is_complex():
        if filt.ndim != 2:
            raise ShapeMismatch(
                f"expected a (bands, taps) filter, got {tuple(filt.shape)}")
        coeffs = filt.detach().cpu().numpy().astype(np.complex64)
    else:
        if filt.ndim != 3 or filt.shape[0] != 2:
            raise ShapeMismatch(
                f"expected a (2, bands, taps) filter, got {tuple(filt.shape)}")
        arr = filt.detach().cpu().numpy()
        coeffs = (arr[0] + 1j * arr[1]).astype(np.complex64)
    bands, taps = coeffs.shape
    if taps < 1:
        raise ShapeMismatch("filter must have at least one tap")
    if bands != geometry.num_bands:
        raise ShapeMismatch(
            f"{bands} bands do not match win_len {geometry.win_len}"
            f" ({geometry.num_bands} bands)")
    if not np.all(np.isfinite(coeffs)):
        raise NonFinite("filter contains NaN or Inf")
    if int(sample_rate) < 1:
        raise ShapeMismatch("sample_rate must be positive")

    body = np.empty((bands, taps, 2), dtype="<f4")
    body[:, :, 0] = coeffs.real
    body[:, :, 1] = coeffs.imag
    blob = _HEADER.pack(_MAGIC, bands, taps, int(sample_rate),
                        geometry.win_len, geometry.hop) + body.tobytes()
    tmp = path + ".tmp"
    try:
        with open(tmp, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoError(f"cannot write {path!r}: {exc}") from exc
