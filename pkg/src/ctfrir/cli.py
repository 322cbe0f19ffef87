"""Command-line interface.

Every artifact-producing command is deterministic for a fixed seed: the
same invocation writes bit-identical files.  Numeric behavior is driven
only by flags or by a JSON config file whose keys mirror the flag names
(explicit flags win).  The CTFRIR_LOG environment variable sets log
verbosity and nothing else.
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import asdict

import numpy as np
import scipy.signal

from . import io as fio
from .acoustics import acoustic_params
from .ctf import ProbeSpec, RefineOptions, ctf_l1_refine, ctf_ls_fit, rir_to_ctf
from .errors import ValidationError
from .evaluate import evaluate_pairs, rir50_rmse
from .roomsim import (MixSpec, RoomSpec, absorption_for_rt60, gen_polack,
                      mix_dataset, simulate_ism)
from .signals import DEFAULT_SAMPLE_RATE, DEFAULT_SEED, AudioSignal, Rir
from .stft import StftConfig, stft
from .sweep import SweepSpec, ctf_to_rir, gen_inverse_filter, gen_log_sweep

log = logging.getLogger("ctfrir")

_SWEEP_DEFAULTS = SweepSpec()


def _triple(text: str):
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected three comma-separated numbers")
    return tuple(parts)


def _add_sweep_flags(sub):
    sub.add_argument("--f1", type=float, default=_SWEEP_DEFAULTS.f1,
                     help="sweep start frequency in Hz")
    sub.add_argument("--f2", type=float, default=_SWEEP_DEFAULTS.f2,
                     help="sweep end frequency in Hz")
    sub.add_argument("--duration", type=float, default=_SWEEP_DEFAULTS.duration,
                     help="sweep duration in seconds")
    sub.add_argument("--fade-in", type=int, default=_SWEEP_DEFAULTS.fade_in,
                     help="fade-in length in samples")
    sub.add_argument("--fade-out", type=int, default=_SWEEP_DEFAULTS.fade_out,
                     help="fade-out length in samples")
    sub.add_argument("--eps", type=float, default=_SWEEP_DEFAULTS.eps,
                     help="inversion regularization")


def _sweep_spec(args, sample_rate: int) -> SweepSpec:
    return SweepSpec(f1=args.f1, f2=args.f2, duration=args.duration,
                     sample_rate=sample_rate, fade_in=args.fade_in,
                     fade_out=args.fade_out, eps=args.eps)


def _add_config_flag(sub):
    sub.add_argument("--config", default=None,
                     help="JSON file of defaults; keys mirror flag names "
                          "with underscores, explicit flags override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ctfrir",
        description="Identify room impulse responses through per-band "
                    "STFT-domain filters.")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("sweep", help="write a measurement sweep and its "
                                      "inverse filter")
    _add_config_flag(p)
    p.add_argument("--out-sweep", required=True)
    p.add_argument("--out-inverse", required=True)
    p.add_argument("--fs", type=int, default=DEFAULT_SAMPLE_RATE)
    _add_sweep_flags(p)
    p.set_defaults(func=cmd_sweep)

    p = subs.add_parser("simulate-rir", help="synthesize an impulse response")
    _add_config_flag(p)
    p.add_argument("--out", required=True)
    p.add_argument("--model", choices=("ism", "polack"), default="ism")
    p.add_argument("--fs", type=int, default=DEFAULT_SAMPLE_RATE)
    p.add_argument("--length-s", type=float, default=1.0,
                   help="response length in seconds")
    p.add_argument("--dims", type=_triple, default=(6.0, 5.0, 3.5),
                   help="room dimensions in meters, e.g. 6,5,3.5")
    p.add_argument("--source", type=_triple, default=(1.2, 2.1, 1.5))
    p.add_argument("--mic", type=_triple, default=(4.3, 3.2, 1.4))
    p.add_argument("--absorption", type=float, default=None,
                   help="uniform wall absorption in (0, 1]")
    p.add_argument("--rt60", type=float, default=0.5,
                   help="target RT60 in seconds (ism: via Sabine inversion "
                        "unless --absorption is given)")
    p.add_argument("--max-order", type=int, default=None,
                   help="total reflection order cap (default: unlimited)")
    p.add_argument("--drr", type=float, default=0.0,
                   help="polack model: target direct-to-reverberant ratio, dB")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.set_defaults(func=cmd_simulate_rir)

    p = subs.add_parser("make-dataset", help="emit mix/reverb/direct triples "
                                             "with reference responses")
    _add_config_flag(p)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--items", type=int, default=8)
    p.add_argument("--fs", type=int, default=DEFAULT_SAMPLE_RATE)
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--speech-dur", type=float, default=4.0)
    p.add_argument("--rir-len-s", type=float, default=0.6)
    p.add_argument("--model", choices=("polack", "ism"), default="polack")
    p.add_argument("--snr-min", type=float, default=5.0)
    p.add_argument("--snr-max", type=float, default=20.0)
    p.add_argument("--rt60-min", type=float, default=0.3)
    p.add_argument("--rt60-max", type=float, default=0.39)
    p.add_argument("--drr-min", type=float, default=0.0)
    p.add_argument("--drr-max", type=float, default=6.0)
    p.set_defaults(func=cmd_make_dataset)

    p = subs.add_parser("fit-ctf", help="fit a per-band filter from a "
                                        "clean/reverberant pair")
    _add_config_flag(p)
    p.add_argument("--clean", required=True)
    p.add_argument("--reverb", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--taps", type=int, default=60)
    p.add_argument("--ridge", type=float, default=None)
    p.add_argument("--win-len", type=int, default=512)
    p.add_argument("--refine", action="store_true",
                   help="run the robust L1 refinement after the LS fit")
    p.add_argument("--refine-iters", type=int, default=100)
    p.add_argument("--refine-step", type=float, default=1.0)
    p.add_argument("--refine-eps", type=float, default=1e-6)
    p.set_defaults(func=cmd_fit_ctf)

    p = subs.add_parser("ctf-to-rir", help="convert a filter file to a "
                                           "time-domain impulse response")
    _add_config_flag(p)
    p.add_argument("--ctf", required=True)
    p.add_argument("--out", required=True)
    _add_sweep_flags(p)
    p.set_defaults(func=cmd_ctf_to_rir)

    p = subs.add_parser("rir-params", help="report RT60, DRR, and C50 of a "
                                           "response")
    _add_config_flag(p)
    p.add_argument("--rir", required=True)
    p.add_argument("--out", default=None, help="also write the JSON report here")
    p.set_defaults(func=cmd_rir_params)

    p = subs.add_parser("evaluate", help="score estimated responses against "
                                         "references")
    _add_config_flag(p)
    p.add_argument("--est", required=True, help="WAV file or directory")
    p.add_argument("--ref", required=True, help="WAV file or directory")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_evaluate)

    p = subs.add_parser("roundtrip", help="response -> filter -> response, "
                                          "with a parameter comparison report")
    _add_config_flag(p)
    p.add_argument("--rir", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--out-rir", default=None,
                   help="also write the recovered response here")
    p.add_argument("--taps", type=int, default=60)
    p.add_argument("--win-len", type=int, default=512)
    p.add_argument("--ridge", type=float, default=None)
    p.add_argument("--probe-dur", type=float, default=8.0)
    p.add_argument("--probe-seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--allow-truncate", action="store_true",
                   help="truncate responses longer than the filter span "
                        "instead of failing")
    _add_sweep_flags(p)
    p.set_defaults(func=cmd_roundtrip)

    return parser


# -- commands ---------------------------------------------------------------

def cmd_sweep(args) -> int:
    spec = _sweep_spec(args, args.fs)
    fio.write_wav(args.out_sweep, gen_log_sweep(spec))
    fio.write_wav(args.out_inverse, gen_inverse_filter(spec=spec))
    log.info("wrote %s and %s", args.out_sweep, args.out_inverse)
    return 0


def _simulate(args, seed: int) -> Rir:
    length = round(args.length_s * args.fs)
    if args.model == "polack":
        return gen_polack(args.rt60, args.drr, args.fs, length, seed)
    absorption = args.absorption
    if absorption is None:
        absorption = absorption_for_rt60(args.dims, args.rt60)
    room = RoomSpec(dimensions=args.dims, source=args.source, mic=args.mic,
                    absorption=absorption, max_order=args.max_order)
    return simulate_ism(room, args.fs, length)


def cmd_simulate_rir(args) -> int:
    fio.write_wav(args.out, _simulate(args, args.seed))
    return 0


def _synth_speech(rng: np.random.Generator, n: int, fs: int) -> np.ndarray:
    # Speech-like stand-in: band-limited noise carrier under a slow random
    # amplitude envelope.
    carrier = rng.standard_normal(n)
    b, a = scipy.signal.butter(4, 0.45)
    carrier = scipy.signal.lfilter(b, a, carrier)
    b, a = scipy.signal.butter(2, 3.0 / (fs / 2.0))
    envelope = np.abs(scipy.signal.lfilter(b, a, rng.standard_normal(n)))
    envelope /= envelope.max() + 1e-12
    speech = carrier * (0.05 + envelope)
    return 0.9 * speech / (np.abs(speech).max() + 1e-12)


def cmd_make_dataset(args) -> int:
    if args.items <= 0:
        raise ValidationError("--items must be positive")
    os.makedirs(args.out_dir, exist_ok=True)
    fs = args.fs
    n_speech = round(args.speech_dur * fs)
    rir_len = round(args.rir_len_s * fs)
    entries = []
    for i in range(args.items):
        rng = np.random.default_rng([args.seed, i])
        rt60_target = float(rng.uniform(args.rt60_min, args.rt60_max))
        drr_target = float(rng.uniform(args.drr_min, args.drr_max))
        snr = float(rng.uniform(args.snr_min, args.snr_max))
        item_seed = int(rng.integers(2 ** 31))
        if args.model == "polack":
            h = gen_polack(rt60_target, drr_target, fs, rir_len, item_seed)
            dp = np.zeros(round(0.004 * fs))
            dp[0] = h.samples[h.direct_index]
            h_dp = Rir(dp, fs, direct_index=0)
        else:
            dims = tuple(rng.uniform(4.0, 8.0, 3))
            margin = 0.6
            src = tuple(rng.uniform(margin, np.asarray(dims) - margin))
            mic = tuple(rng.uniform(margin, np.asarray(dims) - margin))
            alpha = absorption_for_rt60(dims, rt60_target)
            room = RoomSpec(dimensions=dims, source=src, mic=mic,
                            absorption=alpha)
            h = simulate_ism(room, fs, rir_len)
            h_dp = simulate_ism(
                RoomSpec(dimensions=dims, source=src, mic=mic,
                         absorption=alpha, max_order=0), fs, rir_len)
        speech = AudioSignal(_synth_speech(rng, n_speech, fs), fs)
        noise = AudioSignal(rng.standard_normal(n_speech), fs)
        y, x, s_dp = mix_dataset(speech, h, h_dp, noise,
                                 MixSpec(snr=snr, seed=item_seed))
        item = "item%04d" % i
        files = {"mix": item + "_mix.wav", "reverb": item + "_reverb.wav",
                 "direct": item + "_direct.wav", "rir": item + "_rir.wav",
                 "rir_direct": item + "_rir_direct.wav"}
        fio.write_wav(os.path.join(args.out_dir, files["mix"]), y)
        fio.write_wav(os.path.join(args.out_dir, files["reverb"]), x)
        fio.write_wav(os.path.join(args.out_dir, files["direct"]), s_dp)
        fio.write_wav(os.path.join(args.out_dir, files["rir"]), h)
        fio.write_wav(os.path.join(args.out_dir, files["rir_direct"]), h_dp)
        entries.append({"id": item, "snr": snr, "rt60": rt60_target,
                        "drr": drr_target, "files": files})
    fio.write_report(os.path.join(args.out_dir, "manifest.json"), "dataset",
                     {"sample_rate": fs, "items": entries})
    log.info("wrote %d items to %s", args.items, args.out_dir)
    return 0


def cmd_fit_ctf(args) -> int:
    clean = fio.read_wav(args.clean)
    reverb = fio.read_wav(args.reverb)
    if clean.sample_rate != reverb.sample_rate:
        raise ValidationError("sample rates differ: %d vs %d"
                              % (clean.sample_rate, reverb.sample_rate))
    n = min(len(clean), len(reverb))
    config = StftConfig(win_len=args.win_len, hop=args.win_len // 2)
    s = stft(AudioSignal(clean.samples[:n], clean.sample_rate), config)
    x = stft(AudioSignal(reverb.samples[:n], reverb.sample_rate), config)
    filt = ctf_ls_fit(s, x, args.taps, args.ridge)
    if args.refine:
        opts = RefineOptions(step=args.refine_step, max_iter=args.refine_iters,
                             eps=args.refine_eps)
        filt = ctf_l1_refine(filt, s, x, opts)
    fio.write_ctf(args.out, filt)
    return 0


def cmd_ctf_to_rir(args) -> int:
    filt = fio.read_ctf(args.ctf)
    fio.write_wav(args.out, ctf_to_rir(filt, _sweep_spec(args, filt.sample_rate)))
    return 0


def cmd_rir_params(args) -> int:
    params = asdict(acoustic_params(fio.read_rir(args.rir)))
    text = json.dumps(params, indent=2, sort_keys=True)
    print(text)
    if args.out:
        fio.write_report(args.out, "rir-params", params)
    return 0


def _collect_pairs(est: str, ref: str):
    if os.path.isdir(est) != os.path.isdir(ref):
        raise ValidationError("--est and --ref must both be files or both "
                              "be directories")
    if not os.path.isdir(est):
        return [(fio.read_rir(est), fio.read_rir(ref))]
    names = sorted(set(os.listdir(est)) & set(os.listdir(ref)))
    names = [n for n in names if n.lower().endswith(".wav")]
    if not names:
        raise ValidationError("no matching WAV files between %s and %s"
                              % (est, ref))
    return [(fio.read_rir(os.path.join(est, n)),
             fio.read_rir(os.path.join(ref, n))) for n in names]


def cmd_evaluate(args) -> int:
    report = evaluate_pairs(_collect_pairs(args.est, args.ref))
    fio.write_report(args.out, "evaluation", report.to_dict())
    return 0


def cmd_roundtrip(args) -> int:
    h = fio.read_rir(args.rir)
    config = StftConfig(win_len=args.win_len, hop=args.win_len // 2)
    probe = ProbeSpec(duration=args.probe_dur, seed=args.probe_seed)
    filt = rir_to_ctf(h, config, probe, num_taps=args.taps, ridge=args.ridge,
                      allow_truncate=args.allow_truncate)
    recovered = ctf_to_rir(filt, _sweep_spec(args, h.sample_rate))
    if args.out_rir:
        fio.write_wav(args.out_rir, recovered)
    payload = {
        "input": asdict(acoustic_params(h)),
        "recovered": asdict(acoustic_params(recovered)),
        "rir50_rmse": rir50_rmse(recovered, h),
    }
    fio.write_report(args.out, "roundtrip", payload)
    return 0


# -- entry point -------------------------------------------------------------

def _suppress_defaults(parser: argparse.ArgumentParser):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            for sub in action.choices.values():
                _suppress_defaults(sub)
        action.default = argparse.SUPPRESS


def _apply_config(parser: argparse.ArgumentParser, argv, args):
    path = getattr(args, "config", None)
    if not path:
        return args
    try:
        with open(path) as fh:
            overrides = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ValidationError("cannot read config %s: %s" % (path, exc))
    if not isinstance(overrides, dict):
        raise ValidationError("config must be a JSON object")
    known = set(vars(args)) - {"config", "command", "func"}
    unknown = set(overrides) - known
    if unknown:
        raise ValidationError("config keys not recognized by %s: %s"
                              % (args.command, ", ".join(sorted(unknown))))
    # A second parse with every default suppressed reveals which flags were
    # typed out on the command line; config values fill in only the rest.
    # (Subparser defaults overwrite the parent namespace on this Python, so
    # seeding set_defaults/namespace would lose the overrides.)
    probe = build_parser()
    _suppress_defaults(probe)
    explicit = vars(probe.parse_args(argv))
    merged = dict(vars(args))
    merged.update({k: v for k, v in overrides.items() if k not in explicit})
    return argparse.Namespace(**merged)


def main(argv=None) -> int:
    logging.basicConfig(
        level=getattr(logging, os.environ.get("CTFRIR_LOG", "WARNING").upper(),
                      logging.WARNING),
        format="%(name)s: %(message)s")
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(argv)
    try:
        args = _apply_config(parser, argv, args)
        return args.func(args)
    except ValidationError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure: diagnostics, nonzero exit
        log.debug("unhandled failure", exc_info=True)
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
