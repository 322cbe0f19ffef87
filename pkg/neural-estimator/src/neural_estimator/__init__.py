"""Neural estimation of per-band convolutive filters from noisy
reverberant spectrograms, trained on simulator-produced datasets and
exporting filters in the CTF1 exchange format."""

from .data import (SpectrogramDataset, SpectrogramTriple, load_manifest,
                   read_wav)
from .errors import (InvalidManifest, IoError, NeuralEstimatorError,
                     NonFinite, NonFiniteLoss, ShapeMismatch)
from .export import export_ctf
from .features import (StftGeometry, pack_features, stft, unpack_features)
from .losses import LossWeights, as_complex, ctf_convolve, loss_composite, \
    loss_ri_mag
from .model import (CrossBandBlock, CtfEstimator, DualPathBlock, NarrowBandBlock,
                    NetConfig)
from .train import TrainConfig, Trainer, run_training, train_step

__version__ = "0.1.0"

__all__ = [
    "CrossBandBlock",
    "CtfEstimator",
    "DualPathBlock",
    "InvalidManifest",
    "IoError",
    "LossWeights",
    "NarrowBandBlock",
    "NetConfig",
    "NeuralEstimatorError",
    "NonFinite",
    "NonFiniteLoss",
    "ShapeMismatch",
    "SpectrogramDataset",
    "SpectrogramTriple",
    "StftGeometry",
    "TrainConfig",
    "Trainer",
    "as_complex",
    "ctf_convolve",
    "export_ctf",
    "load_manifest",
    "loss_composite",
    "loss_ri_mag",
    "pack_features",
    "read_wav",
    "run_training",
    "stft",
    "train_step",
    "unpack_features",
]
