"""File formats: WAV audio, the CTF1 filter container, JSON reports.

Every write lands atomically (temp file in the target directory, then
rename), so readers never observe partial artifacts.  Files store single
precision; re-writing what was read reproduces the bytes exactly.
"""

import io
import json
import os
import struct
import tempfile

import numpy as np
import scipy.io.wavfile

from .ctf import CtfFilter
from .errors import InvalidAudioFile, InvalidCtfFile
from .signals import AudioSignal, Rir
from .stft import StftConfig

#: Schema tag written into every JSON report.
REPORT_SCHEMA_VERSION = 1

_CTF_MAGIC = b"CTF1"
_CTF_HEADER = struct.Struct("<4sIIIII")


def write_bytes_atomic(path: str, payload: bytes):
    """Write bytes through a temp file and rename into place."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix="~")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_wav(path: str, signal: AudioSignal):
    """Write a mono 32-bit float RIFF/WAVE file."""
    buf = io.BytesIO()
    scipy.io.wavfile.write(buf, signal.sample_rate,
                           signal.samples.astype("<f4"))
    write_bytes_atomic(path, buf.getvalue())


def read_wav(path: str) -> AudioSignal:
    """Read a mono WAV file; 16/32-bit PCM is scaled to [-1, 1) floats."""
    try:
        rate, data = scipy.io.wavfile.read(path)
    except Exception as exc:
        raise InvalidAudioFile("cannot read %s: %s" % (path, exc)) from exc
    if data.ndim != 1:
        raise InvalidAudioFile("%s is not mono (shape %r)" % (path, data.shape))
    if data.dtype == np.int16:
        data = data / 32768.0
    elif data.dtype == np.int32:
        data = data / 2147483648.0
    elif data.dtype not in (np.float32, np.float64):
        raise InvalidAudioFile("%s has unsupported sample format %s"
                               % (path, data.dtype))
    return AudioSignal(np.asarray(data, dtype=np.float64), rate)


def read_rir(path: str) -> Rir:
    """Read an impulse response; the direct index is taken at the peak."""
    sig = read_wav(path)
    return Rir(sig.samples, sig.sample_rate,
               direct_index=int(np.argmax(np.abs(sig.samples))))


def write_ctf(path: str, filt: CtfFilter):
    """Write a filter as CTF1: a little-endian header (magic, bands, taps,
    sample rate, win_len, hop) followed by band-major float32
    (real, imag) pairs."""
    header = _CTF_HEADER.pack(_CTF_MAGIC, filt.num_bands, filt.num_taps,
                              filt.sample_rate, filt.config.win_len,
                              filt.config.hop)
    body = np.empty((filt.num_bands, filt.num_taps, 2), dtype="<f4")
    body[:, :, 0] = filt.coeffs.real
    body[:, :, 1] = filt.coeffs.imag
    write_bytes_atomic(path, header + body.tobytes())


def read_ctf(path: str) -> CtfFilter:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _CTF_HEADER.size or raw[:4] != _CTF_MAGIC:
        raise InvalidCtfFile("%s is not a CTF1 file" % path)
    magic, bands, taps, rate, win_len, hop = _CTF_HEADER.unpack_from(raw)
    expected = _CTF_HEADER.size + bands * taps * 2 * 4
    if len(raw) != expected:
        raise InvalidCtfFile("%s: expected %d bytes, found %d"
                             % (path, expected, len(raw)))
    try:
        config = StftConfig(win_len=win_len, hop=hop)
    except Exception as exc:
        raise InvalidCtfFile("%s: bad STFT geometry: %s" % (path, exc)) from exc
    if config.num_bands != bands:
        raise InvalidCtfFile("%s: %d bands inconsistent with win_len %d"
                             % (path, bands, win_len))
    flat = np.frombuffer(raw, dtype="<f4", offset=_CTF_HEADER.size)
    pairs = flat.reshape(bands, taps, 2).astype(np.float64)
    return CtfFilter(pairs[:, :, 0] + 1j * pairs[:, :, 1], config, rate)


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if np.isfinite(value) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def write_report(path: str, kind: str, payload: dict):
    """Write a JSON report with schema version and kind fields.

    Non-finite floats (an undefined correlation, say) serialize as null.
    """
    doc = {"schema_version": REPORT_SCHEMA_VERSION, "kind": kind}
    doc.update(payload)
    text = json.dumps(_jsonable(doc), indent=2, sort_keys=True)
    write_bytes_atomic(path, text.encode() + b"\n")
