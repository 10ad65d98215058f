"""WAV input and feature-file writers/readers (CSV, HTK, raw binary).

HTK layout (big-endian)::

    int32   nSamples     number of frames
    int32   sampPeriod   hop in 100 ns units (100000 for 10 ms)
    int16   sampSize     bytes per frame = 4 * dims
    int16   parmKind     9 (USER)
    float32 data[nSamples][dims]

Raw-binary layout (little-endian)::

    8 bytes  magic b"SSCFRAW\\0"
    uint32   version (1)
    uint32   dims
    uint32   frames
    float64  data[frames][dims]     row-major
    uint32   metadata length in bytes
    bytes    metadata, UTF-8 JSON (includes per-frame flags)
"""

from __future__ import annotations

import csv
import json
import struct
from pathlib import Path

import numpy as np
from scipy.io import wavfile

from .dsp import Waveform
from .errors import AudioFormatError, SscfKitError

HTK_USER = 9
HTK_HEADER = struct.Struct(">iihh")
RAW_MAGIC = b"SSCFRAW\0"
RAW_VERSION = 1
RAW_HEADER = struct.Struct("<8sIII")

FORMAT_SUFFIX = {"csv": ".csv", "htk": ".htk", "raw-binary": ".bin"}


def read_wav(path: str | Path) -> Waveform:
    """Read a mono 16-bit PCM or 32-bit float WAV file."""
    try:
        rate, data = wavfile.read(str(path))
    except (OSError, ValueError) as exc:
        raise AudioFormatError(f"{path}: {exc}") from None
    if data.ndim != 1:
        raise AudioFormatError(f"{path}: {data.shape[1]} channels; only mono audio is supported")
    if data.dtype == np.int16:
        samples = data.astype(np.float64) / 32768.0
    elif data.dtype == np.float32:
        samples = data.astype(np.float64)
    else:
        raise AudioFormatError(f"{path}: sample type {data.dtype} unsupported (need PCM16 or float32)")
    try:
        return Waveform(samples, rate)
    except SscfKitError as exc:
        raise AudioFormatError(f"{path}: {exc}") from None


def write_wav(path: str | Path, w: Waveform) -> None:
    """Write 16-bit PCM."""
    pcm = np.clip(np.round(w.samples * 32767.0), -32768, 32767).astype(np.int16)
    wavfile.write(str(path), w.sample_rate_hz, pcm)


def write_csv(path: str | Path, data: np.ndarray) -> None:
    data = np.asarray(data, dtype=np.float64)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["frame"] + [f"dim_{j:03d}" for j in range(data.shape[1])])
        for i, row in enumerate(data):
            # %-formatting never consults the locale
            writer.writerow([i] + ["%.6g" % v for v in row])


def read_csv(path: str | Path) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    dims = len(header) - 1
    if not body:
        return np.zeros((0, dims))
    return np.array([[float(v) for v in r[1:]] for r in body], dtype=np.float64)


def write_htk(path: str | Path, data: np.ndarray, hop_ms: float = 10.0, parm_kind: int = HTK_USER) -> None:
    data = np.asarray(data, dtype=np.float64)
    n_frames, dims = data.shape
    period = int(round(hop_ms * 1e4))
    with open(path, "wb") as fh:
        fh.write(HTK_HEADER.pack(n_frames, period, 4 * dims, parm_kind))
        fh.write(data.astype(">f4").tobytes())


def read_htk(path: str | Path) -> tuple[np.ndarray, int, int]:
    """Return ``(data, samp_period, parm_kind)``."""
    with open(path, "rb") as fh:
        n_frames, period, samp_size, kind = HTK_HEADER.unpack(fh.read(HTK_HEADER.size))
        dims = samp_size // 4
        data = np.frombuffer(fh.read(), dtype=">f4")
    return data.reshape(n_frames, dims).astype(np.float64), period, kind


def write_raw(path: str | Path, data: np.ndarray, metadata: dict | None = None) -> None:
    data = np.asarray(data, dtype=np.float64)
    n_frames, dims = data.shape
    meta = json.dumps(metadata or {}, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(RAW_HEADER.pack(RAW_MAGIC, RAW_VERSION, dims, n_frames))
        fh.write(data.astype("<f8").tobytes())
        fh.write(struct.pack("<I", len(meta)))
        fh.write(meta)


def read_raw(path: str | Path) -> tuple[np.ndarray, dict]:
    blob = Path(path).read_bytes()
    magic, version, dims, n_frames = RAW_HEADER.unpack_from(blob, 0)
    if magic != RAW_MAGIC:
        raise SscfKitError(f"{path}: not a raw feature file")
    if version != RAW_VERSION:
        raise SscfKitError(f"{path}: unsupported version {version}")
    offset = RAW_HEADER.size
    nbytes = 8 * dims * n_frames
    data = np.frombuffer(blob, dtype="<f8", count=dims * n_frames, offset=offset).reshape(n_frames, dims)
    offset += nbytes
    (meta_len,) = struct.unpack_from("<I", blob, offset)
    meta = json.loads(blob[offset + 4:offset + 4 + meta_len].decode("utf-8"))
    return data.astype(np.float64), meta


def write_features(path: str | Path, features, fmt: str) -> None:
    """Write a FeatureMatrix in ``fmt`` (``csv``, ``htk`` or ``raw-binary``)."""
    if fmt == "csv":
        write_csv(path, features.data)
    elif fmt == "htk":
        write_htk(path, features.data, hop_ms=features.metadata["hop_ms"])
    elif fmt == "raw-binary":
        meta = dict(features.metadata)
        meta["flags"] = features.flags.tolist()
        write_raw(path, features.data, meta)
    else:
        raise ValueError(f"unknown output format {fmt!r}")
