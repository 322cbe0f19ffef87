"""Dataset loading: WAV files referenced by a JSON manifest.

A manifest (``kind: "dataset"``) lists items whose ``files`` entry names
a noisy reverberant mixture (``mix``), the noise-free reverberant signal
(``reverb``), and the direct-path signal (``direct``).  Each item is
turned into a complex spectrogram triple (Y, S, X) = (mixture, direct,
reverberant) for training.
"""

import json
import os
from dataclasses import dataclass

import numpy as np
import scipy.io.wavfile
import torch

from .errors import InvalidManifest, IoError, NonFinite
from .features import StftGeometry, pack_features, stft

_REQUIRED_FILES = ("mix", "reverb", "direct")


def read_wav(path: str) -> tuple[np.ndarray, int]:
    """Read a mono WAV file as float64 in [-1, 1] plus its sample rate.

    32-bit float samples are taken as-is; 16/32-bit integer PCM is
    scaled by its full-scale value.
    """
    try:
        rate, data = scipy.io.wavfile.read(path)
    except (OSError, ValueError) as exc:
        raise IoError(f"cannot read WAV file {path!r}: {exc}") from exc
    if data.ndim != 1:
        raise IoError(f"{path!r}: expected mono audio, got shape {data.shape}")
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.int32:
        samples = data.astype(np.float64) / 2147483648.0
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise IoError(f"{path!r}: unsupported sample format {data.dtype}")
    if not np.all(np.isfinite(samples)):
        raise NonFinite(f"{path!r}: samples contain NaN or Inf")
    return samples, int(rate)


def load_manifest(path: str) -> dict:
    """Parse and validate a dataset manifest; returns the JSON document."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read manifest {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidManifest(f"{path!r} is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("kind") != "dataset":
        raise InvalidManifest(f"{path!r}: expected a dataset manifest")
    if not isinstance(doc.get("sample_rate"), int):
        raise InvalidManifest(f"{path!r}: missing integer sample_rate")
    items = doc.get("items")
    if not isinstance(items, list) or not items:
        raise InvalidManifest(f"{path!r}: missing non-empty items list")
    for item in items:
        files = item.get("files") if isinstance(item, dict) else None
        if not isinstance(files, dict):
            raise InvalidManifest(f"{path!r}: item without files mapping")
        for key in _REQUIRED_FILES:
            if not isinstance(files.get(key), str):
                raise InvalidManifest(
                    f"{path!r}: item {item.get('id')!r} lacks a {key!r} file")
    return doc


@dataclass
class SpectrogramTriple:
    """Complex spectrograms of one item: network input Y, direct-path
    target S, reverberant target X, all shaped (bands, frames)."""

    y: torch.Tensor
    s: torch.Tensor
    x: torch.Tensor
    item_id: str


class SpectrogramDataset:
    """All items of a manifest as spectrogram triples, plus batching."""

    def __init__(self, manifest_path: str,
                 geometry: StftGeometry = StftGeometry()):
        doc = load_manifest(manifest_path)
        base = os.path.dirname(os.path.abspath(manifest_path))
        self.geometry = geometry
        self.sample_rate = doc["sample_rate"]
        self.triples: list[SpectrogramTriple] = []
        for item in doc["items"]:
            specs = {}
            for key in _REQUIRED_FILES:
                samples, rate = read_wav(os.path.join(base,
                                                      item["files"][key]))
                if rate != self.sample_rate:
                    raise InvalidManifest(
                        f"item {item.get('id')!r}: {key} sampled at {rate},"
                        f" manifest says {self.sample_rate}")
                specs[key] = stft(torch.from_numpy(samples), geometry)
            self.triples.append(SpectrogramTriple(
                y=specs["mix"], s=specs["direct"], x=specs["reverb"],
                item_id=str(item.get("id"))))

    def __len__(self) -> int:
        return len(self.triples)

    def __getitem__(self, index: int) -> SpectrogramTriple:
        return self.triples[index]

    def batch(self, indices) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """Stack items into (Y features, S, X): shapes (B, 2, F, T),
        (B, F, T) complex, (B, F, T) complex.  Items must share T."""
        chosen = [self.triples[i] for i in indices]
        frames = {t.y.shape[1] for t in chosen}
        if len(frames) != 1:
            raise InvalidManifest(
                f"batched items must share a frame count, got {sorted(frames)}")
        y = torch.stack([pack_features(t.y) for t in chosen]).float()
        s = torch.stack([t.s for t in chosen]).to(torch.complex64)
        x = torch.stack([t.x for t in chosen]).to(torch.complex64)
        return y, s, x

    def random_batches(self, batch_size: int, num_batches: int, seed: int):
        """Yield ``num_batches`` random batches drawn with replacement."""
        gen = torch.Generator().manual_seed(seed)
        for _ in range(num_batches):
            idx = torch.randint(len(self.triples), (batch_size,),
                                generator=gen).tolist()
            yield self.batch(idx)
