"""Room impulse response identification via per-band STFT-domain filters.

Fit short complex filters per frequency band to a reverberant/clean
spectrogram pair, convert them to a time-domain impulse response through a
simulated sine-sweep measurement, and score the result with standard
acoustic parameters.
"""

from .acoustics import AcousticParams, acoustic_params, c50, drr, edc, rt60
from .ctf import (CtfFilter, LossWeights, ProbeSpec, RefineOptions,
                  ctf_convolve, ctf_l1_refine, ctf_ls_fit, loss_composite,
                  loss_ri_mag, rir_to_ctf)
from .errors import CtfRirError, ValidationError
from .evaluate import (MetricsReport, ParamMetrics, align_by_direct_peak,
                       evaluate_pairs, metrics, rir50_rmse)
from .io import (read_ctf, read_rir, read_wav, write_ctf, write_report,
                 write_wav)
from .roomsim import (MixSpec, RoomSpec, absorption_for_rt60, gen_polack,
                      mix_dataset, simulate_ism)
from .signals import DEFAULT_SAMPLE_RATE, DEFAULT_SEED, AudioSignal, Rir
from .stft import Spectrogram, StftConfig, istft, stft
from .sweep import (SweepSpec, band_limit, ctf_to_rir, gen_inverse_filter,
                    gen_log_sweep)

__version__ = "0.1.0"

__all__ = [
    "AcousticParams", "AudioSignal", "CtfFilter", "CtfRirError",
    "DEFAULT_SAMPLE_RATE", "DEFAULT_SEED", "LossWeights", "MetricsReport",
    "MixSpec", "ParamMetrics", "ProbeSpec", "RefineOptions", "Rir", "RoomSpec",
    "Spectrogram", "StftConfig", "SweepSpec", "ValidationError",
    "absorption_for_rt60", "acoustic_params", "align_by_direct_peak",
    "band_limit", "c50",
    "ctf_convolve", "ctf_l1_refine", "ctf_ls_fit", "ctf_to_rir", "drr", "edc",
    "evaluate_pairs", "gen_inverse_filter", "gen_log_sweep", "gen_polack",
    "istft", "loss_composite", "loss_ri_mag", "metrics", "mix_dataset",
    "read_ctf", "read_rir", "read_wav",
    "rir50_rmse", "rir_to_ctf", "rt60", "simulate_ism", "stft",
    "write_ctf", "write_report", "write_wav",
]
