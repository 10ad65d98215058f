"""Feature profiles, whole-utterance extraction, batch runs and transition analysis."""

from __future__ import annotations

import logging
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import dsp, dynamics, spectral
from .config import ExtractionConfig
from .errors import ConfigurationError, ContractError, SscfKitError
from .formats import FORMAT_SUFFIX, read_wav, write_features

log = logging.getLogger(__name__)

# per-frame flag bits
FLAG_SSCF_DEGENERATE = 1
FLAG_POLAR_ORIGIN = 2
FLAG_MVN_CONSTANT = 4


@dataclass(frozen=True)
class Stream:
    """One block of columns in a profile.

    ``kind`` is ``mfcc`` (``n_coefs``), ``polar`` (polar radius/angle of the
    SSCF ``plane`` pair), ``ratio`` (polar radius/angle on the
    SSCF1/SSCF3 x SSCF2/SSCF3 plane) or ``sscf`` (one ``band``). ``order``
    appends first (1) or first and second (2) order deltas.
    """

    kind: str
    n_coefs: int = 0
    plane: tuple[int, int] = (1, 2)
    band: int = 0
    order: int = 0
    mvn: bool = False
    log: bool = False

    @property
    def base_dim(self) -> int:
        return {"mfcc": self.n_coefs, "polar": 2, "ratio": 2, "sscf": 1}[self.kind]

    @property
    def dim(self) -> int:
        return self.base_dim * (self.order + 1)

    def base_names(self) -> list[str]:
        if self.kind == "mfcc":
            return [f"mfcc{self.n_coefs}_c{k}" for k in range(self.n_coefs)]
        if self.kind == "polar":
            i, j = self.plane
            return [f"polar{i}{j}_radius", f"polar{i}{j}_angle"]
        if self.kind == "ratio":
            return ["ratio_radius", "ratio_angle"]
        suffix = ("_log" if self.log else "") + ("_mvn" if self.mvn else "")
        return [f"sscf{self.band}{suffix}"]

    def names(self) -> list[str]:
        base = self.base_names()
        prefixes = ["", "d_", "dd_"][: self.order + 1]
        return [p + n for p in prefixes for n in base]


_TOKEN = re.compile(r"^(mfcc(?P<n>\d+)|polar(?P<i>\d)(?P<j>\d)|ratio|sscf(?P<m>\d))$")


def parse_stream(token: str) -> Stream:
    head, *mods = [t.strip() for t in token.strip().split(":")]
    m = _TOKEN.match(head)
    if not m:
        raise ConfigurationError(f"unknown stream {head!r}")
    if head.startswith("mfcc"):
        kw = dict(kind="mfcc", n_coefs=int(m["n"]))
        if kw["n_coefs"] < 1:
            raise ConfigurationError("mfcc needs at least one coefficient")
    elif head.startswith("polar"):
        kw = dict(kind="polar", plane=(int(m["i"]), int(m["j"])))
    elif head == "ratio":
        kw = dict(kind="ratio")
    else:
        kw = dict(kind="sscf", band=int(m["m"]))
    for mod in mods:
        if mod == "d":
            kw["order"] = 1
        elif mod == "dd":
            kw["order"] = 2
        elif mod == "mvn":
            kw["mvn"] = True
        elif mod == "log":
            kw["log"] = True
        else:
            raise ConfigurationError(f"unknown modifier {mod!r} in {token!r}")
    if (kw.get("mvn") or kw.get("log")) and kw["kind"] != "sscf":
        raise ConfigurationError("mvn/log modifiers apply to sscf streams only")
    return Stream(**kw)


@dataclass(frozen=True)
class FeatureProfile:
    name: str
    spec: str
    components: tuple[Stream, ...]

    @property
    def expected_dim(self) -> int:
        return sum(s.dim for s in self.components)

    def column_names(self) -> list[str]:
        return [n for s in self.components for n in s.names()]


PROFILE_SPECS = {
    "mfcc6_dd": "mfcc6:dd",
    "mfcc13_dd": "mfcc13:dd",
    "mfcc6_dd_polar": "mfcc6:dd,polar12",
    "mfcc6_dd_polar_ratio": "mfcc6:dd,ratio",
    "mfcc6_dd_polar_ratio_sscf0": "mfcc6:dd,ratio,sscf0",
    "mfcc6_dd_polar_ratio_sscf0_mvn": "mfcc6:dd,ratio,sscf0:mvn",
}


def get_profile(name_or_spec: str) -> FeatureProfile:
    """Look up a named profile, or build a custom one from a stream list.

    Custom profiles are comma-separated streams such as
    ``"mfcc13:dd,polar23:d,sscf0:log:mvn"``.
    """
    spec = PROFILE_SPECS.get(name_or_spec, name_or_spec)
    streams = tuple(parse_stream(tok) for tok in spec.split(",") if tok.strip())
    if not streams:
        raise ConfigurationError("profile has no streams")
    return FeatureProfile(name_or_spec if name_or_spec in PROFILE_SPECS else "custom", spec, streams)


@dataclass
class FeatureMatrix:
    data: np.ndarray
    flags: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    @property
    def dims(self) -> int:
        return self.data.shape[1]


@dataclass
class Frontend:
    """Shared per-utterance intermediates: frames, power spectra and SSCFs."""

    frames: dsp.FrameMatrix
    spectra: np.ndarray
    bands: list[spectral.SubbandSpec]
    sscf: spectral.SscfTrack | None = None


def analyze_frontend(w: dsp.Waveform, config: ExtractionConfig, with_sscf: bool = True) -> Frontend:
    bands = config.bands_for(w.sample_rate_hz)
    emphasized = dsp.preemphasize(w, config.preemphasis)
    frames = dsp.frame(emphasized, config.frame_ms, config.hop_ms)
    dsp.check_fft_size(config.fft_size, frames.frame_length_samples)
    n_bins = config.fft_size // 2 + 1
    if frames.is_empty:
        spectra = np.zeros((0, n_bins))
    else:
        spectra = dsp.power_spectrum(dsp.apply_hamming(frames), config.fft_size)
    front = Frontend(frames, spectra, bands)
    if with_sscf:
        front.sscf = spectral.sscf_track(spectra, bands, w.sample_rate_hz, config.sscf_energy_floor)
    return front


def _stream_values(stream: Stream, front: Frontend, config: ExtractionConfig, sr: int,
                   flags: np.ndarray, filterbanks: dict) -> np.ndarray:
    if stream.kind == "mfcc":
        fb = filterbanks.get(stream.n_coefs)
        if fb is None:
            fmax = config.mel_fmax_hz if config.mel_fmax_hz is not None else sr / 2.0
            fb = spectral.build_mel_filterbank(stream.n_coefs, config.mel_fmin_hz, fmax, config.fft_size, sr)
            filterbanks[stream.n_coefs] = fb
        return spectral.mfcc(front.spectra, fb, stream.n_coefs, config.lifter, config.log_floor)

    track = front.sscf
    if stream.kind in ("polar", "ratio"):
        if stream.kind == "ratio":
            xy = dynamics.ratio_plane(track)
            a, b = xy[:, 0], xy[:, 1]
        else:
            i, j = stream.plane
            if max(i, j) >= track.values.shape[1]:
                raise ConfigurationError(f"plane {stream.plane} needs more than {track.values.shape[1]} bands")
            a, b = track.band(i), track.band(j)
        p = dynamics.polar(a, b, unit=config.angle_unit)
        flags[p.degenerate] |= FLAG_POLAR_ORIGIN
        return np.column_stack([p.radius, p.angle])

    if stream.band >= track.values.shape[1]:
        raise ConfigurationError(f"sscf{stream.band} is not a configured band")
    x = track.band(stream.band)
    if stream.log:
        x = np.log(np.maximum(x, config.log_floor))
    if stream.mvn:
        if x.size < 2:
            x, constant = np.zeros_like(x), True
        else:
            norm = dynamics.mvn(x)
            x, constant = norm.values, norm.constant
        if constant:
            flags |= FLAG_MVN_CONSTANT
    return x[:, None]


def extract(w: dsp.Waveform, profile: FeatureProfile | str, config: ExtractionConfig | None = None) -> FeatureMatrix:
    """Compute the profile's streams from one shared spectrum sequence and stack them."""
    config = config or ExtractionConfig()
    if isinstance(profile, str):
        profile = get_profile(profile)
    sr = w.sample_rate_hz
    needs_sscf = any(s.kind != "mfcc" for s in profile.components)
    front = analyze_frontend(w, config, with_sscf=needs_sscf)
    n = front.frames.n_frames
    metadata = {
        "profile": profile.name,
        "profile_spec": profile.spec,
        "columns": profile.column_names(),
        "config": config.to_dict(),
        "config_hash": config.digest(profile.spec),
        "sample_rate_hz": sr,
        "frame_length_samples": front.frames.frame_length_samples,
        "hop_length_samples": front.frames.hop_length_samples,
        "frame_ms": config.frame_ms,
        "hop_ms": config.hop_ms,
        "n_frames": n,
        "dims": profile.expected_dim,
        "subbands": [[b.low_hz, b.high_hz, b.weight_shape, b.gamma] for b in front.bands],
    }
    flags = np.zeros(n, dtype=np.int64)
    if n == 0:
        return FeatureMatrix(np.zeros((0, profile.expected_dim)), flags, metadata)
    if front.sscf is not None:
        flags[front.sscf.degenerate_frames] |= FLAG_SSCF_DEGENERATE

    filterbanks: dict = {}
    blocks = []
    for stream in profile.components:
        static = _stream_values(stream, front, config, sr, flags, filterbanks)
        block = [static]
        if stream.order >= 1:
            d = dynamics.deltas(static, config.delta_window)
            block.append(d)
            if stream.order >= 2:
                block.append(dynamics.deltas(d, config.delta_window))
        block = np.hstack(block)
        if block.shape != (n, stream.dim):
            raise SscfKitError(f"stream {stream} produced shape {block.shape}, expected {(n, stream.dim)}")
        blocks.append(block)
    data = np.hstack(blocks)
    if data.shape[1] != profile.expected_dim:
        raise SscfKitError(f"profile {profile.name}: {data.shape[1]} dims, expected {profile.expected_dim}")
    if not np.all(np.isfinite(data)):
        raise SscfKitError("non-finite feature values")
    return FeatureMatrix(data, flags, metadata)


def read_manifest(path: str | Path) -> list[tuple[str, Path]]:
    """Two-column UTF-8 TSV (utterance_id, audio path), no header.

    Relative audio paths are resolved against the manifest's directory.
    """
    path = Path(path)
    entries = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip():
            continue
        parts = line.rstrip("\n").split("\t")
        if len(parts) != 2 or not parts[0]:
            raise ContractError(f"{path}:{lineno}: expected 'utterance_id<TAB>path'")
        audio = Path(parts[1])
        if not audio.is_absolute():
            audio = path.parent / audio
        entries.append((parts[0], audio))
    return entries


@dataclass
class BatchReport:
    successes: dict[str, int] = field(default_factory=dict)  # utterance_id -> frames
    failures: dict[str, str] = field(default_factory=dict)  # utterance_id -> error

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_dict(self) -> dict:
        return {
            "successes": dict(sorted(self.successes.items())),
            "failures": dict(sorted(self.failures.items())),
        }


def batch_extract(manifest: Sequence[tuple[str, str | Path]], profile: FeatureProfile | str,
                  config: ExtractionConfig | None, output_dir: str | Path, fmt: str = "csv",
                  workers: int = 1) -> BatchReport:
    """Extract every manifest entry to ``output_dir/<utterance_id><suffix>``.

    A failing utterance is recorded in the report and does not stop the
    others.
    """
    config = config or ExtractionConfig()
    if isinstance(profile, str):
        profile = get_profile(profile)
    if fmt not in FORMAT_SUFFIX:
        raise ConfigurationError(f"unknown output format {fmt!r}")
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)

    def run(entry):
        utt_id, audio_path = entry
        try:
            feats = extract(read_wav(audio_path), profile, config)
            write_features(out / f"{utt_id}{FORMAT_SUFFIX[fmt]}", feats, fmt)
            return utt_id, feats.n_frames, None
        except (SscfKitError, OSError, ValueError) as exc:
            log.warning("%s: %s", utt_id, exc)
            return utt_id, None, str(exc)

    report = BatchReport()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, manifest))
    else:
        results = [run(e) for e in manifest]
    for utt_id, n_frames, err in sorted(results, key=lambda r: r[0]):
        if err is None:
            report.successes[utt_id] = n_frames
        else:
            report.failures[utt_id] = err
    return report


@dataclass
class TransitionStats:
    label: str
    mean_angle_deg: float
    std_angle_deg: float
    n: int
    n_excluded: int = 0
    pair_sum_deg: float | None = None


@dataclass
class SegmentTrajectory:
    label: str
    segment_index: int
    times_s: np.ndarray
    angle_deg: np.ndarray
    polar_radius: np.ndarray
    polar_angle_deg: np.ndarray
    net_angle_deg: float | None


@dataclass
class TransitionAnalysis:
    stats: list[TransitionStats]
    trajectories: list[SegmentTrajectory]
    excluded: dict[str, int] = field(default_factory=dict)

    def by_label(self) -> dict[str, TransitionStats]:
        return {s.label: s for s in self.stats}


def reverse_label(label: str) -> str:
    if "-" in label:
        return "-".join(reversed(label.split("-")))
    return label[::-1]


def _wrap180(deg):
    return (np.asarray(deg) + 180.0) % 360.0 - 180.0


def angle_summary(angles: Sequence[float]) -> tuple[float, float]:
    """Mean and population std of direction angles, robust to the +-180 cut.

    Angles are unwrapped around the first one before averaging.
    """
    a = np.asarray(angles, dtype=np.float64)
    dev = _wrap180(a - a[0])
    mean = float(_wrap180(a[0] + dev.mean()))
    if mean == -180.0:
        mean = 180.0
    return mean, float(dev.std())


def _plane_coords(track: spectral.SscfTrack, plane: str) -> tuple[np.ndarray, np.ndarray]:
    if plane == "sscf12":
        return track.band(1), track.band(2)
    if plane == "ratio":
        xy = dynamics.ratio_plane(track)
        return xy[:, 0], xy[:, 1]
    raise ConfigurationError(f"unknown plane {plane!r}; expected sscf12 or ratio")


def analyze_transitions(segments: Sequence[tuple[str, dsp.Waveform, float, float]], plane: str = "sscf12",
                        config: ExtractionConfig | None = None, edge_frames: int = 1) -> TransitionAnalysis:
    """Per-label statistics of the net transition angle over labelled segments.

    Each segment's angle is the direction of the end-minus-beginning
    displacement in the chosen plane, using the frames whose centres fall in
    ``[start_s, end_s]``. The four-quadrant angle is used so that a
    transition and its reverse point in opposite directions.
    Segments that do not move are excluded and counted.
    """
    config = config or ExtractionConfig()
    cache: dict[int, tuple[np.ndarray, spectral.SscfTrack]] = {}
    angles: dict[str, list[float]] = {}
    excluded: dict[str, int] = {}
    trajectories = []
    for idx, (label, w, start_s, end_s) in enumerate(segments):
        key = id(w)
        if key not in cache:
            front = analyze_frontend(w, config)
            cache[key] = (front.frames.frame_times(), front.sscf)
        times, track = cache[key]
        sel = (times >= start_s - 1e-9) & (times <= end_s + 1e-9)
        angles.setdefault(label, [])
        excluded.setdefault(label, 0)
        if sel.sum() < 2:
            excluded[label] += 1
            continue
        sub = spectral.SscfTrack(track.values[sel], track.degenerate[sel])
        a, b = _plane_coords(sub, plane)
        net = dynamics.net_transition_angle(a, b, four_quadrant=True, edge_frames=edge_frames)
        per_frame = dynamics.transition_angle(a, b)
        pol = dynamics.polar(a, b)
        trajectories.append(SegmentTrajectory(label, idx, times[sel], per_frame.angles, pol.radius, pol.angle, net))
        if net is None:
            excluded[label] += 1
        else:
            angles[label].append(net)

    stats = []
    for label in sorted(angles):
        if not angles[label]:
            continue
        mean, std = angle_summary(angles[label])
        stats.append(TransitionStats(label, mean, std, len(angles[label]), excluded[label]))
    means = {s.label: s.mean_angle_deg for s in stats}
    for s in stats:
        rev = reverse_label(s.label)
        if rev != s.label and rev in means:
            s.pair_sum_deg = abs(s.mean_angle_deg) + abs(means[rev])
    return TransitionAnalysis(stats, trajectories, excluded)
