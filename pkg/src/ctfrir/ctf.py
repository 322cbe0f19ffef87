"""Per-band convolutive filters in the STFT domain.

A filter is a short complex FIR per frequency band, applied causally along
the frame axis with zero initial history:

    X[f, t] = sum_l H[f, l] * S[f, t - l],   S[f, t'] = 0 for t' < 0

Fitting is ridge-regularized least squares per band (normal equations),
optionally refined under a robust L1-type objective.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.signal

from .errors import (DegenerateInput, InvalidConfig, NonFinite, NonFiniteLoss,
                     RirTooLong, ShapeMismatch, TooFewFrames)
from .signals import DEFAULT_SEED, AudioSignal, Rir
from .stft import Spectrogram, StftConfig, stft


@dataclass
class CtfFilter:
    """Per-band FIR coefficients, shape (num_bands, num_taps).

    The filter spans num_taps * hop samples of the underlying time axis.
    """

    coeffs: np.ndarray
    config: StftConfig
    sample_rate: int

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.complex128)
        if self.coeffs.ndim != 2 or self.coeffs.shape[1] == 0:
            raise ShapeMismatch("expected a 2-D (bands, taps) array, got shape %r"
                                % (self.coeffs.shape,))
        if self.coeffs.shape[0] != self.config.num_bands:
            raise ShapeMismatch("band count %d does not match config (%d bands)"
                                % (self.coeffs.shape[0], self.config.num_bands))
        if not np.all(np.isfinite(self.coeffs)):
            raise NonFinite("filter contains NaN or Inf")

    @property
    def num_bands(self) -> int:
        return self.coeffs.shape[0]

    @property
    def num_taps(self) -> int:
        return self.coeffs.shape[1]


@dataclass(frozen=True)
class LossWeights:
    """Weights of the reverberant and clean terms in the composite loss."""

    rvb: float = 1.0
    cln: float = 1.0

    def __post_init__(self):
        if not (np.isfinite(self.rvb) and np.isfinite(self.cln)):
            raise NonFinite("loss weights must be finite")
        if self.rvb < 0 or self.cln < 0:
            raise NonFinite("loss weights must be nonnegative")


@dataclass(frozen=True)
class ProbeSpec:
    """Probe signal for identifying a filter from a time-domain response:
    seeded unit-variance white Gaussian noise of the given duration."""

    duration: float = 8.0
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.duration < 4.0:
            raise InvalidConfig("probe duration must be >= 4 s, got %r"
                                % (self.duration,))


@dataclass(frozen=True)
class RefineOptions:
    """Settings for the L1 refinement: initial step, iteration budget, and
    the Charbonnier smoothing width."""

    step: float = 1.0
    max_iter: int = 100
    eps: float = 1e-6

    def __post_init__(self):
        if self.step <= 0 or self.max_iter < 0 or self.eps <= 0:
            raise InvalidConfig("step and eps must be positive, max_iter >= 0")


def _check_pair(filt: CtfFilter, spec: Spectrogram):
    if filt.config != spec.config or filt.sample_rate != spec.sample_rate:
        raise ShapeMismatch("filter and spectrogram disagree on STFT geometry "
                            "or sample rate")


def _convolve(coeffs: np.ndarray, s: np.ndarray) -> np.ndarray:
    # Direct causal sum over taps; exact for the identity filter and cheap
    # for the short filters used here.
    n_taps = coeffs.shape[1]
    t_frames = s.shape[1]
    out = np.zeros_like(s)
    for lag in range(min(n_taps, t_frames)):
        out[:, lag:] += coeffs[:, lag:lag + 1] * s[:, :t_frames - lag]
    return out


def ctf_convolve(filt: CtfFilter, s: Spectrogram) -> Spectrogram:
    """Apply a per-band filter along the frame axis (zero initial history).

    Output has the same (bands, frames) shape as ``s``.
    """
    _check_pair(filt, s)
    return Spectrogram(_convolve(filt.coeffs, s.data), s.config, s.sample_rate)


def ctf_ls_fit(s: Spectrogram, x: Spectrogram, num_taps: int,
               ridge: float | None = None) -> CtfFilter:
    """Fit per-band filter coefficients by regularized least squares.

    Solves the normal equations of || H (*) S - X ||^2 independently per
    band.  ``ridge`` is the Tikhonov weight added to the Gram diagonal;
    when omitted it defaults per band to 1e-10 * trace(Gram) / num_taps.
    Bands where S is identically zero get zero coefficients; if every band
    is zero the problem is degenerate.
    """
    if s.config != x.config or s.sample_rate != x.sample_rate:
        raise ShapeMismatch("spectrograms disagree on STFT geometry or sample rate")
    if s.data.shape != x.data.shape:
        raise ShapeMismatch("spectrogram shapes differ: %r vs %r"
                            % (s.data.shape, x.data.shape))
    if ridge is not None and ridge < 0:
        raise DegenerateInput("ridge must be nonnegative")
    t_frames = s.num_frames
    if num_taps < 1 or t_frames < num_taps:
        raise TooFewFrames("need at least num_taps=%d frames, got %d"
                           % (num_taps, t_frames))

    sd = s.data
    n_bands = sd.shape[0]
    padded = np.concatenate([np.zeros((n_bands, num_taps - 1),
                                      dtype=sd.dtype), sd], axis=1)
    # windows[f, t, k] = S[f, t - (num_taps - 1) + k]; reversing k gives the
    # convolution matrix A[f, t, l] = S[f, t - l].
    windows = np.lib.stride_tricks.sliding_window_view(padded, num_taps, axis=1)
    gram = np.empty((n_bands, num_taps, num_taps), dtype=np.complex128)
    rhs = np.empty((n_bands, num_taps), dtype=np.complex128)
    # Materializing every band at once costs O(F*T*L) memory, which blows up
    # for long probe fits; process bands in groups of a few hundred MB.
    group = max(1, int(2.5e8 // (t_frames * num_taps * 16)))
    for lo in range(0, n_bands, group):
        hi = min(lo + group, n_bands)
        a = np.ascontiguousarray(windows[lo:hi, :, ::-1])
        ah = np.conj(a).transpose(0, 2, 1)
        gram[lo:hi] = ah @ a
        rhs[lo:hi] = (ah @ x.data[lo:hi, :, None])[:, :, 0]

    trace = np.einsum('fll->f', gram).real
    live = trace > 0.0
    if not np.any(live):
        raise DegenerateInput("S is identically zero in every band")
    lam = np.where(live, 1e-10 * trace / num_taps, 1.0) if ridge is None \
        else np.full(trace.shape, float(ridge))
    # Zero bands keep lam > 0 so the solve stays nonsingular; their rhs is
    # zero, hence their coefficients come out zero.
    lam = np.where(live, lam, np.maximum(lam, 1.0))
    gram[:, np.arange(num_taps), np.arange(num_taps)] += lam[:, None]
    coeffs = np.linalg.solve(gram, rhs[:, :, None])[:, :, 0]
    return CtfFilter(coeffs, s.config, s.sample_rate)


def _smoothed_terms(r: np.ndarray, x: np.ndarray, eps: float):
    delta = r - x
    mag_r = np.sqrt(r.real ** 2 + r.imag ** 2 + eps ** 2)
    dmag = mag_r - np.abs(x)
    t_mag = np.sqrt(dmag ** 2 + eps ** 2)
    t_re = np.sqrt(delta.real ** 2 + eps ** 2)
    t_im = np.sqrt(delta.imag ** 2 + eps ** 2)
    return delta, mag_r, dmag, t_mag, t_re, t_im


def refine_objective(coeffs: np.ndarray, s: np.ndarray, x: np.ndarray,
                     eps: float = 1e-6):
    """Charbonnier-smoothed L1 objective and its gradient.

    Returns ``(loss, grad)`` where ``grad`` packs d/d(Re H) + 1j * d/d(Im H)
    per coefficient.  This is the objective minimized by ``ctf_l1_refine``;
    it approaches ``loss_ri_mag`` as eps -> 0.
    """
    f_bands, t_frames = x.shape
    r = _convolve(coeffs, s)
    delta, mag_r, dmag, t_mag, t_re, t_im = _smoothed_terms(r, x, eps)
    scale = 1.0 / (f_bands * t_frames)
    loss = scale * float(t_mag.sum() + t_re.sum() + t_im.sum())
    g_r = scale * ((dmag / t_mag) * (r / mag_r)
                   + delta.real / t_re + 1j * (delta.imag / t_im))
    n_taps = coeffs.shape[1]
    grad = np.zeros_like(coeffs)
    for lag in range(min(n_taps, t_frames)):
        grad[:, lag] = (g_r[:, lag:] * np.conj(s[:, :t_frames - lag])).sum(axis=1)
    return loss, grad


def ctf_l1_refine(init: CtfFilter, s: Spectrogram, x: Spectrogram,
                  opts: RefineOptions = RefineOptions()) -> CtfFilter:
    """Refine a filter under the smoothed L1 objective.

    Gradient descent with backtracking line search (Armijo condition);
    only improving steps are accepted, so the returned filter never has a
    higher smoothed loss than the initializer.
    """
    _check_pair(init, s)
    if s.data.shape != x.data.shape:
        raise ShapeMismatch("spectrogram shapes differ: %r vs %r"
                            % (s.data.shape, x.data.shape))
    coeffs = init.coeffs.copy()
    loss, grad = refine_objective(coeffs, s.data, x.data, opts.eps)
    if not np.isfinite(loss):
        raise NonFiniteLoss("objective is not finite at the initializer")
    step = opts.step
    for _ in range(opts.max_iter):
        gsq = float((grad.real ** 2 + grad.imag ** 2).sum())
        if gsq == 0.0 or step < 1e-15:
            break
        cand = coeffs - step * grad
        cand_loss, cand_grad = refine_objective(cand, s.data, x.data, opts.eps)
        if np.isfinite(cand_loss) and cand_loss <= loss - 1e-4 * step * gsq:
            coeffs, loss, grad = cand, cand_loss, cand_grad
            step *= 1.3
        else:
            step *= 0.5
    return CtfFilter(coeffs, init.config, init.sample_rate)


def rir_to_ctf(h: Rir, config: StftConfig = StftConfig(),
               probe: ProbeSpec = ProbeSpec(), num_taps: int = 60,
               ridge: float | None = None,
               allow_truncate: bool = False) -> CtfFilter:
    """Identify the per-band filter equivalent to a time-domain response.

    Simulates a measurement: a seeded white Gaussian probe is convolved
    with ``h`` and the filter is fit on the (probe, response) spectrogram
    pair.  The response must fit within num_taps * hop samples; longer
    responses raise ``RirTooLong`` unless ``allow_truncate`` is set, which
    warns and truncates instead.
    """
    span = num_taps * config.hop
    nonzero = np.flatnonzero(h.samples)
    effective = int(nonzero[-1]) + 1 if nonzero.size else 0
    samples = h.samples
    if effective > span:
        if not allow_truncate:
            raise RirTooLong("response spans %d samples, filter covers %d"
                             % (effective, span))
        warnings.warn("truncating response from %d to %d samples"
                      % (effective, span))
        samples = samples[:span]
    rng = np.random.default_rng(probe.seed)
    p = rng.standard_normal(round(probe.duration * h.sample_rate))
    x = scipy.signal.fftconvolve(p, samples)[:p.size]
    fs = h.sample_rate
    return ctf_ls_fit(stft(AudioSignal(p, fs), config),
                      stft(AudioSignal(x, fs), config), num_taps, ridge)


def _ri_mag_sum(a: np.ndarray, b: np.ndarray, complex_diff: bool) -> float:
    if complex_diff:
        first = np.abs(a - b)
    else:
        first = np.abs(np.abs(a) - np.abs(b))
    return float(first.sum()
                 + np.abs(a.real - b.real).sum()
                 + np.abs(a.imag - b.imag).sum())


def _loss_operand(x) -> np.ndarray:
    if isinstance(x, Spectrogram):
        return x.data
    data = np.asarray(x, dtype=np.complex128)
    if data.ndim != 2:
        raise ShapeMismatch("loss operands must be 2-D, got shape %r"
                            % (data.shape,))
    return data


def loss_ri_mag(a, b, complex_diff: bool = False) -> float:
    """Mean L1 distance over magnitude, real, and imaginary parts.

    Operands are spectrograms or plain 2-D complex arrays of equal shape.
    The first term compares magnitudes; pass ``complex_diff=True`` to use
    the modulus of the complex difference instead.  Symmetric in its
    arguments under the default reading, zero iff a == b, and positively
    homogeneous of degree one.
    """
    if (isinstance(a, Spectrogram) and isinstance(b, Spectrogram)
            and a.config != b.config):
        raise ShapeMismatch("spectrograms disagree on STFT geometry")
    da, db = _loss_operand(a), _loss_operand(b)
    if da.shape != db.shape:
        raise ShapeMismatch("operand shapes differ: %r vs %r"
                            % (da.shape, db.shape))
    f_bands, t_frames = da.shape
    return _ri_mag_sum(da, db, complex_diff) / (f_bands * t_frames)


def loss_composite(filt: CtfFilter, s: Spectrogram, x: Spectrogram,
                   x_hat: Spectrogram, s_hat: Spectrogram,
                   weights: LossWeights = LossWeights()) -> float:
    """Reconstruction loss plus weighted reverberant and clean terms:

        loss_ri_mag(H (*) S, X)
        + weights.rvb * loss_ri_mag(X_hat, X)
        + weights.cln * loss_ri_mag(S_hat, S)
    """
    rec = loss_ri_mag(ctf_convolve(filt, s), x)
    rvb = loss_ri_mag(x_hat, x)
    cln = loss_ri_mag(s_hat, s)
    return rec + weights.rvb * rvb + weights.cln * cln
