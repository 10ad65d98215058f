"""Extraction configuration and its text-file form.

A config file is INI-style text. Top-level ``key = value`` lines (or an
``[extract]`` section) set frontend parameters; ``[subband.N]`` sections
replace the default SSCF bands::

    preemphasis = 0.97
    fft_size = 512
    subband_gamma = 1.0

    [subband.0]
    low = 0
    high = 300
    shape = rectangular
    gamma = 1.0

A ``[synth]`` section is read by the ``synth`` command only.
"""

from __future__ import annotations

import configparser
import hashlib
import json
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

from .errors import ConfigurationError
from .spectral import LOG_FLOOR, SSCF_ENERGY_FLOOR, SubbandSpec, default_subbands, validate_subbands


@dataclass(frozen=True)
class ExtractionConfig:
    frame_ms: float = 25.0
    hop_ms: float = 10.0
    preemphasis: float = 0.97
    fft_size: int = 512
    lifter: int = 22
    mel_fmin_hz: float = 0.0
    mel_fmax_hz: float | None = None
    log_floor: float = LOG_FLOOR
    delta_window: int = 2
    subbands: tuple[SubbandSpec, ...] | None = None
    subband_shape: str = "rectangular"
    subband_gamma: float = 1.0
    sscf_energy_floor: float = SSCF_ENERGY_FLOOR
    angle_unit: str = "degrees"

    def __post_init__(self):
        if not 0.0 <= self.preemphasis < 1.0:
            raise ConfigurationError(f"preemphasis must be in [0, 1), got {self.preemphasis}")
        if not self.frame_ms >= self.hop_ms > 0:
            raise ConfigurationError("need frame_ms >= hop_ms > 0")
        if self.delta_window < 1:
            raise ConfigurationError("delta_window must be >= 1")
        if self.angle_unit not in ("degrees", "radians"):
            raise ConfigurationError(f"angle_unit must be degrees or radians, got {self.angle_unit!r}")
        if self.subbands is not None:
            object.__setattr__(self, "subbands", tuple(self.subbands))

    def bands_for(self, sample_rate_hz: int) -> list[SubbandSpec]:
        if self.subbands is not None:
            bands = list(self.subbands)
        else:
            bands = [replace(b, weight_shape=self.subband_shape, gamma=self.subband_gamma)
                     for b in default_subbands(sample_rate_hz)]
        validate_subbands(bands, sample_rate_hz)
        return bands

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.subbands is not None:
            d["subbands"] = [asdict(b) for b in self.subbands]
        return d

    def digest(self, extra: str = "") -> str:
        blob = json.dumps({"config": self.to_dict(), "extra": extra}, sort_keys=True)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


_TYPES = {f.name: f.type for f in fields(ExtractionConfig)}


def _coerce(key: str, raw: str):
    kind = _TYPES[key]
    if "float | None" in kind:
        return None if raw.lower() in ("", "none") else float(raw)
    if kind.startswith("float"):
        return float(raw)
    if kind.startswith("int"):
        return int(raw)
    return raw


def read_config_text(path: str | Path) -> configparser.ConfigParser:
    text = Path(path).read_text(encoding="utf-8")
    parser = configparser.ConfigParser()
    try:
        parser.read_string("[extract]\n" + text, source=str(path))
    except configparser.Error as exc:
        raise ConfigurationError(f"{path}: {exc}") from None
    return parser


def parse_config(parser: configparser.ConfigParser) -> ExtractionConfig:
    kwargs = {}
    if parser.has_section("extract"):
        for key, raw in parser.items("extract"):
            if key not in _TYPES or key == "subbands":
                raise ConfigurationError(f"unknown config key {key!r}")
            try:
                kwargs[key] = _coerce(key, raw.strip())
            except ValueError:
                raise ConfigurationError(f"bad value for {key}: {raw!r}") from None
    band_sections = sorted(
        (s for s in parser.sections() if s.startswith("subband.")),
        key=lambda s: int(s.split(".", 1)[1]),
    )
    if band_sections:
        bands = []
        for s in band_sections:
            sec = parser[s]
            try:
                bands.append(SubbandSpec(
                    index=int(s.split(".", 1)[1]),
                    low_hz=float(sec["low"]),
                    high_hz=float(sec["high"]),
                    weight_shape=sec.get("shape", "rectangular").strip(),
                    gamma=float(sec.get("gamma", "1.0")),
                ))
            except (KeyError, ValueError) as exc:
                raise ConfigurationError(f"[{s}]: {exc}") from None
        kwargs["subbands"] = tuple(bands)
    return ExtractionConfig(**kwargs)


def load_config(path: str | Path | None) -> ExtractionConfig:
    if path is None:
        return ExtractionConfig()
    return parse_config(read_config_text(path))
