"""Analysis/synthesis unit tests: framing arithmetic, round trip, linearity,
Parseval consistency, and the error contracts."""

import numpy as np
import pytest

from ctfrir import AudioSignal, Spectrogram, StftConfig, istft, stft
from ctfrir.errors import (EmptySignal, InvalidConfig, OutLenTooLarge,
                           ShapeMismatch)

FS = 16000
CFG = StftConfig()


def _rel_max_err(a, b):
    return np.abs(a - b).max() / np.abs(b).max()


def test_frame_count_arithmetic():
    # T = ceil(N / hop) + 1 under the fixed padding convention
    sig = AudioSignal(np.random.default_rng(0).standard_normal(64000), FS)
    spec = stft(sig, CFG)
    assert spec.num_frames == 251
    assert spec.num_bands == 257
    for n in (1, 255, 256, 257, 512, 1000, 4097):
        assert CFG.num_frames(n) == -(-n // CFG.hop) + 1


def test_zero_input_zero_spectrogram():
    spec = stft(AudioSignal(np.zeros(3000), FS), CFG)
    assert not np.any(spec.data)


def test_round_trip_white_noise():
    x = np.random.default_rng(1).standard_normal(10000)
    y = istft(stft(AudioSignal(x, FS), CFG), 10000)
    assert _rel_max_err(y.samples, x) <= 1e-10


def test_round_trip_many_lengths():
    rng = np.random.default_rng(2)
    for length in (512, 513, 767, 768, 1000, 4096, 10001, 30000):
        x = rng.standard_normal(length)
        y = istft(stft(AudioSignal(x, FS), CFG), length)
        assert _rel_max_err(y.samples, x) <= 1e-10, length


def test_round_trip_edges_exact():
    # first and last hop of samples reconstruct as well as the interior
    x = np.random.default_rng(3).standard_normal(5000)
    y = istft(stft(AudioSignal(x, FS), CFG), 5000).samples
    assert np.abs(y[:256] - x[:256]).max() <= 1e-12
    assert np.abs(y[-256:] - x[-256:]).max() <= 1e-12


def test_linearity():
    rng = np.random.default_rng(4)
    x = rng.standard_normal(3000)
    y = rng.standard_normal(3000)
    sx = stft(AudioSignal(x, FS), CFG).data
    sy = stft(AudioSignal(y, FS), CFG).data
    sboth = stft(AudioSignal(2.5 * x - 0.7 * y, FS), CFG).data
    assert np.abs(sboth - (2.5 * sx - 0.7 * sy)).max() <= 1e-9


def test_parseval_consistency():
    # rfft keeps half the spectrum: double the interior bins, then undo the
    # unnormalized-forward scaling; sqrt-Hann pairs give unit COLA weight.
    rng = np.random.default_rng(5)
    for length in (2000, 8191, 16384):
        x = rng.standard_normal(length)
        spec = stft(AudioSignal(x, FS), CFG)
        weights = np.full(spec.num_bands, 2.0)
        weights[0] = weights[-1] = 1.0
        e_spec = (weights @ (np.abs(spec.data) ** 2)).sum() / CFG.win_len
        e_sig = (x ** 2).sum()
        assert abs(e_spec - e_sig) / e_sig <= 1e-8


def test_single_frame_support():
    # one nonzero frame synthesizes inside that frame's window span only
    rng = np.random.default_rng(6)
    t_frames, t0 = 6, 2
    data = np.zeros((CFG.num_bands, t_frames), dtype=complex)
    data[:, t0] = rng.standard_normal(CFG.num_bands) \
        + 1j * rng.standard_normal(CFG.num_bands)
    out = istft(Spectrogram(data, CFG, FS), (t_frames - 1) * CFG.hop).samples
    lo = t0 * CFG.hop - CFG.hop
    hi = lo + CFG.win_len
    assert np.any(out[lo:hi])
    mask = np.ones(out.size, dtype=bool)
    mask[lo:hi] = False
    assert not np.any(out[mask])


def test_zero_spectrogram_zero_signal():
    data = np.zeros((CFG.num_bands, 5), dtype=complex)
    out = istft(Spectrogram(data, CFG, FS), 4 * CFG.hop)
    assert not np.any(out.samples)


def test_istft_out_len_limit():
    spec = stft(AudioSignal(np.ones(1000), FS), CFG)
    max_len = (spec.num_frames - 1) * CFG.hop
    istft(spec, max_len)
    with pytest.raises(OutLenTooLarge):
        istft(spec, max_len + 1)
    with pytest.raises(OutLenTooLarge):
        istft(spec, 0)


def test_config_validation():
    with pytest.raises(InvalidConfig):
        StftConfig(win_len=511, hop=255)
    with pytest.raises(InvalidConfig):
        StftConfig(win_len=512, hop=128)
    with pytest.raises(EmptySignal):
        AudioSignal(np.array([]), FS)


def test_spectrogram_band_count_checked():
    with pytest.raises(ShapeMismatch):
        Spectrogram(np.zeros((100, 4), dtype=complex), CFG, FS)


def test_window_is_sqrt_periodic_hann():
    w = CFG.window()
    n = np.arange(CFG.win_len)
    hann = 0.5 - 0.5 * np.cos(2.0 * np.pi * n / CFG.win_len)
    assert np.abs(w ** 2 - hann).max() <= 1e-15
    # 50% overlap COLA: squared window and its half-shift sum to one
    assert np.abs(hann[:256] + hann[256:] - 1.0).max() <= 1e-15
