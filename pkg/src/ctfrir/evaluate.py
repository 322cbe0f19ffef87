"""Comparing estimated impulse responses against references."""

from dataclasses import asdict, dataclass

import numpy as np

from .acoustics import acoustic_params
from .errors import LengthMismatch, TooShort, ZeroRir
from .signals import Rir

#: Span of the early-response waveform comparison.
RIR_WINDOW = 0.050


def align_by_direct_peak(est: Rir, ref: Rir) -> tuple[Rir, Rir]:
    """Shift both responses onto a common grid and peak-normalize them.

    The direct peaks land on the same index (the later of the two); each
    response is divided by its peak absolute amplitude.  Identical inputs
    come back identical, and a pure delay is undone exactly.
    """
    if est.sample_rate != ref.sample_rate:
        raise LengthMismatch("responses must share one sample rate")
    peaks = []
    for sig in (est, ref):
        peak = abs(sig.samples[sig.direct_index])
        if peak == 0.0:
            raise ZeroRir("response peak amplitude is zero")
        peaks.append(peak)
    target = max(est.direct_index, ref.direct_index)
    length = max(est.samples.size + target - est.direct_index,
                 ref.samples.size + target - ref.direct_index)
    out = []
    for sig, peak in zip((est, ref), peaks):
        shifted = np.zeros(length)
        lo = target - sig.direct_index
        shifted[lo:lo + sig.samples.size] = sig.samples / peak
        out.append(Rir(shifted, sig.sample_rate, direct_index=target))
    return out[0], out[1]


def rir50_rmse(est: Rir, ref: Rir) -> float:
    """RMSE between aligned, peak-normalized responses over the first
    50 ms from the direct peak."""
    span = round(RIR_WINDOW * est.sample_rate)
    for sig in (est, ref):
        if sig.samples.size - sig.direct_index < span:
            raise TooShort("responses must extend >= 50 ms past the direct peak")
    a, b = align_by_direct_peak(est, ref)
    start = a.direct_index
    diff = a.samples[start:start + span] - b.samples[start:start + span]
    return float(np.sqrt(np.mean(diff ** 2)))


@dataclass(frozen=True)
class ParamMetrics:
    """Aggregate agreement of one scalar parameter across items."""

    mae: float
    rmse: float
    pearson: float


def metrics(estimates, references) -> ParamMetrics:
    """MAE, RMSE, and Pearson correlation of paired scalar estimates.

    Pearson is NaN when either side has zero variance; MAE and RMSE are
    always defined.  MAE never exceeds RMSE.
    """
    est = np.asarray(estimates, dtype=np.float64)
    ref = np.asarray(references, dtype=np.float64)
    if est.shape != ref.shape or est.ndim != 1 or est.size == 0:
        raise LengthMismatch("expected two equally long, non-empty sequences")
    err = est - ref
    mae = float(np.mean(np.abs(err)))
    rmse = float(np.sqrt(np.mean(err ** 2)))
    de = est - est.mean()
    dr = ref - ref.mean()
    denom = np.sqrt((de ** 2).sum() * (dr ** 2).sum())
    pearson = float((de * dr).sum() / denom) if denom > 0.0 else float("nan")
    return ParamMetrics(mae=mae, rmse=rmse, pearson=pearson)


@dataclass(frozen=True)
class MetricsReport:
    """Agreement summary over a set of (estimate, reference) pairs."""

    n_items: int
    rt60: ParamMetrics
    drr: ParamMetrics
    c50: ParamMetrics
    rir50_rmse: float
    per_item: tuple

    def to_dict(self) -> dict:
        return asdict(self)


def evaluate_pairs(pairs) -> MetricsReport:
    """Score estimated responses against references.

    ``pairs`` is a sequence of (estimate, reference) Rir tuples.  Acoustic
    parameters are computed on both sides and aggregated; the waveform
    error is the mean 50 ms RMSE over items.
    """
    pairs = list(pairs)
    if not pairs:
        raise LengthMismatch("need at least one pair")
    rows = []
    for est, ref in pairs:
        pe, pr = acoustic_params(est), acoustic_params(ref)
        rows.append({
            "rt60_est": pe.rt60, "rt60_ref": pr.rt60,
            "drr_est": pe.drr, "drr_ref": pr.drr,
            "c50_est": pe.c50, "c50_ref": pr.c50,
            "rir50_rmse": rir50_rmse(est, ref),
        })
    def agg(name):
        return metrics([r[name + "_est"] for r in rows],
                       [r[name + "_ref"] for r in rows])
    return MetricsReport(
        n_items=len(rows),
        rt60=agg("rt60"), drr=agg("drr"), c50=agg("c50"),
        rir50_rmse=float(np.mean([r["rir50_rmse"] for r in rows])),
        per_item=tuple(rows),
    )
