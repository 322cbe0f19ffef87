"""End-to-end tests of the command-line interface, run in process through
``main(argv)`` so exit codes and artifacts can be checked directly."""

import json
import subprocess
import sys

import numpy as np
import pytest

from ctfrir import gen_polack, read_ctf, read_rir, read_wav, write_wav
from ctfrir.cli import main
from ctfrir.signals import DEFAULT_SEED

FS = 16000


@pytest.fixture(scope="module")
def rir_wav(tmp_path_factory):
    path = str(tmp_path_factory.mktemp("rir") / "rir.wav")
    assert main(["simulate-rir", "--model", "polack", "--rt60", "0.35",
                 "--drr", "3.0", "--length-s", "0.6", "--out", path]) == 0
    return path


def test_sweep_writes_pair(tmp_path):
    out_s = str(tmp_path / "sweep.wav")
    out_i = str(tmp_path / "inv.wav")
    assert main(["sweep", "--duration", "1.024",
                 "--out-sweep", out_s, "--out-inverse", out_i]) == 0
    sweep = read_wav(out_s)
    inv = read_wav(out_i)
    assert len(sweep) == round(1.024 * FS)
    assert sweep.sample_rate == inv.sample_rate == FS
    # deconvolution of the pair peaks at unity
    peak = np.abs(np.convolve(sweep.samples, inv.samples)).max()
    assert abs(peak - 1.0) < 1e-3  # float32 storage rounds the samples


def test_simulate_rir_polack_matches_library(rir_wav):
    cli = read_wav(rir_wav)
    oracle = gen_polack(0.35, 3.0, FS, round(0.6 * FS), DEFAULT_SEED)
    assert np.array_equal(cli.samples,
                          oracle.samples.astype(np.float32).astype(np.float64))


def test_simulate_rir_ism(tmp_path):
    path = str(tmp_path / "ism.wav")
    assert main(["simulate-rir", "--model", "ism", "--dims", "4.2,3.1,2.7",
                 "--source", "1.3,1.1,1.4", "--mic", "1.94,1.7,1.88",
                 "--absorption", "0.34", "--length-s", "0.4",
                 "--out", path]) == 0
    h = read_rir(path)
    assert len(h) == round(0.4 * FS)
    assert np.abs(h.samples).max() > 0


def test_make_dataset_manifest(tmp_path):
    out = str(tmp_path / "ds")
    assert main(["make-dataset", "--out-dir", out, "--items", "2",
                 "--speech-dur", "1.5"]) == 0
    doc = json.load(open(out + "/manifest.json"))
    assert doc["schema_version"] == 1
    assert doc["kind"] == "dataset"
    assert doc["sample_rate"] == FS
    assert len(doc["items"]) == 2
    for entry in doc["items"]:
        assert 0.3 <= entry["rt60"] <= 0.39
        for name in entry["files"].values():
            sig = read_wav("%s/%s" % (out, name))
            assert sig.sample_rate == FS
    # mix = reverb + scaled noise, all on one length grid
    files = doc["items"][0]["files"]
    y = read_wav("%s/%s" % (out, files["mix"]))
    x = read_wav("%s/%s" % (out, files["reverb"]))
    assert len(y) == len(x)
    assert not np.array_equal(y.samples, x.samples)


def test_fit_ctf_and_convert(tmp_path, rir_wav):
    rng = np.random.default_rng(31)
    clean = rng.standard_normal(3 * FS)
    h = read_rir(rir_wav)
    reverb = np.convolve(clean, h.samples)[:clean.size]
    clean_p = str(tmp_path / "clean.wav")
    reverb_p = str(tmp_path / "reverb.wav")
    from ctfrir.signals import AudioSignal
    write_wav(clean_p, AudioSignal(clean, FS))
    write_wav(reverb_p, AudioSignal(reverb, FS))

    ctf_p = str(tmp_path / "fit.ctf")
    assert main(["fit-ctf", "--clean", clean_p, "--reverb", reverb_p,
                 "--taps", "40", "--out", ctf_p]) == 0
    filt = read_ctf(ctf_p)
    assert filt.num_bands == 257  # win_len 512 default
    assert filt.num_taps == 40
    assert filt.sample_rate == FS

    out_rir = str(tmp_path / "recovered.wav")
    assert main(["ctf-to-rir", "--ctf", ctf_p, "--out", out_rir,
                 "--duration", "1.024"]) == 0
    rec = read_wav(out_rir)
    assert np.abs(rec.samples).max() > 0


def test_rir_params_stdout_and_report(tmp_path, rir_wav, capsys):
    out = str(tmp_path / "params.json")
    assert main(["rir-params", "--rir", rir_wav, "--out", out]) == 0
    printed = json.loads(capsys.readouterr().out)
    assert abs(printed["rt60"] - 0.35) < 0.35 * 0.05
    assert abs(printed["drr"] - 3.0) < 0.1  # float32 file rounding
    doc = json.load(open(out))
    assert doc["kind"] == "rir-params"
    assert doc["rt60"] == printed["rt60"]
    assert {"rt60", "drr", "c50"} <= set(printed)


def test_evaluate_self_is_perfect(tmp_path, rir_wav):
    out = str(tmp_path / "eval.json")
    assert main(["evaluate", "--est", rir_wav, "--ref", rir_wav,
                 "--out", out]) == 0
    doc = json.load(open(out))
    assert doc["kind"] == "evaluation"
    assert doc["n_items"] == 1
    assert doc["rt60"]["mae"] == 0.0
    assert doc["rir50_rmse"] == 0.0
    assert doc["rt60"]["pearson"] is None  # single item: undefined


def test_evaluate_directories(tmp_path, rir_wav):
    est_dir, ref_dir = tmp_path / "est", tmp_path / "ref"
    est_dir.mkdir(), ref_dir.mkdir()
    h = read_rir(rir_wav)
    for d in (est_dir, ref_dir):
        write_wav(str(d / "a.wav"), h)
        write_wav(str(d / "b.wav"), h)
    out = str(tmp_path / "eval.json")
    assert main(["evaluate", "--est", str(est_dir), "--ref", str(ref_dir),
                 "--out", out]) == 0
    assert json.load(open(out))["n_items"] == 2


def test_roundtrip_recovers_parameters(tmp_path, rir_wav):
    out = str(tmp_path / "rt.json")
    out_rir = str(tmp_path / "rec.wav")
    assert main(["roundtrip", "--rir", rir_wav, "--out", out,
                 "--out-rir", out_rir, "--taps", "40",
                 "--probe-dur", "16.0", "--duration", "1.024"]) == 0
    doc = json.load(open(out))
    assert doc["kind"] == "roundtrip"
    got, want = doc["recovered"], doc["input"]
    assert abs(got["rt60"] - want["rt60"]) < 0.10 * want["rt60"]
    assert abs(got["drr"] - want["drr"]) < 1.0
    assert doc["rir50_rmse"] < 0.1
    assert np.abs(read_wav(out_rir).samples).max() > 0


def test_config_defaults_and_flag_precedence(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"rt60": 0.30, "length_s": 0.6,
                               "model": "polack"}))
    from_cfg = str(tmp_path / "a.wav")
    overridden = str(tmp_path / "b.wav")
    assert main(["simulate-rir", "--config", str(cfg), "--out", from_cfg]) == 0
    assert main(["simulate-rir", "--config", str(cfg), "--rt60", "0.36",
                 "--out", overridden]) == 0
    oracle_cfg = gen_polack(0.30, 0.0, FS, round(0.6 * FS), DEFAULT_SEED)
    oracle_flag = gen_polack(0.36, 0.0, FS, round(0.6 * FS), DEFAULT_SEED)
    as_f32 = lambda h: h.samples.astype(np.float32).astype(np.float64)
    assert np.array_equal(read_wav(from_cfg).samples, as_f32(oracle_cfg))
    assert np.array_equal(read_wav(overridden).samples, as_f32(oracle_flag))


def test_config_unknown_key_exits_2(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"no_such_flag": 1}))
    code = main(["simulate-rir", "--config", str(cfg),
                 "--out", str(tmp_path / "x.wav")])
    assert code == 2
    assert "no_such_flag" in capsys.readouterr().err


def test_validation_failure_exits_2(tmp_path, capsys):
    # polack length shorter than 1.5 x rt60
    code = main(["simulate-rir", "--model", "polack", "--rt60", "0.5",
                 "--length-s", "0.5", "--out", str(tmp_path / "x.wav")])
    assert code == 2
    assert capsys.readouterr().err.startswith("error:")


def test_rate_mismatch_exits_2(tmp_path, capsys):
    from ctfrir.signals import AudioSignal
    a = str(tmp_path / "a.wav")
    b = str(tmp_path / "b.wav")
    write_wav(a, AudioSignal(np.random.default_rng(0).standard_normal(4000), FS))
    write_wav(b, AudioSignal(np.random.default_rng(1).standard_normal(4000), 8000))
    code = main(["fit-ctf", "--clean", a, "--reverb", b,
                 "--out", str(tmp_path / "x.ctf")])
    assert code == 2
    assert "sample rates differ" in capsys.readouterr().err


def test_missing_input_exits_1(tmp_path, capsys):
    code = main(["ctf-to-rir", "--ctf", str(tmp_path / "missing.ctf"),
                 "--out", str(tmp_path / "x.wav")])
    assert code == 1
    assert capsys.readouterr().err.startswith("error:")


def test_missing_required_flag_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["sweep", "--out-sweep", "only_one.wav"])
    assert info.value.code == 2


def test_module_entry_point(tmp_path):
    out_s = str(tmp_path / "s.wav")
    out_i = str(tmp_path / "i.wav")
    proc = subprocess.run(
        [sys.executable, "-m", "ctfrir", "sweep", "--duration", "1.024",
         "--out-sweep", out_s, "--out-inverse", out_i],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert len(read_wav(out_s)) == round(1.024 * FS)
