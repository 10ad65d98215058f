"""Cascade formant synthesizer for vowel-to-vowel transitions.

An impulse train at the (interpolated) fundamental drives three
second-order resonators in series whose centre frequencies glide between
the two vowel targets. The output is only meant to have well-controlled
formant trajectories, not to sound natural.

Preset formants are textbook averages for adult male vowels (after
Peterson & Barney and Klatt's synthesis tables, rounded). Female presets
scale formants by 1.18 and F0 by 1.7.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .dsp import Waveform
from .errors import ConfigurationError

FEMALE_FORMANT_SCALE = 1.18
FEMALE_F0_SCALE = 1.7
PEAK_AMPLITUDE = 0.9
MIN_DURATION_S = 0.05
MAX_DURATION_S = 5.0

# F0, (F1, F2, F3) in Hz
_MALE_TABLE = {
    "a": (120.0, (700.0, 1200.0, 2600.0)),
    "e": (120.0, (530.0, 1840.0, 2480.0)),
    "i": (120.0, (300.0, 2300.0, 3000.0)),
    "o": (120.0, (570.0, 840.0, 2410.0)),
    "u": (120.0, (300.0, 870.0, 2240.0)),
}
_BANDWIDTHS = (60.0, 90.0, 150.0)


@dataclass(frozen=True)
class VowelSpec:
    f0_hz: float
    formants_hz: tuple[float, float, float]
    bandwidths_hz: tuple[float, float, float] = _BANDWIDTHS

    def __post_init__(self):
        object.__setattr__(self, "formants_hz", tuple(float(f) for f in self.formants_hz))
        object.__setattr__(self, "bandwidths_hz", tuple(float(b) for b in self.bandwidths_hz))
        if len(self.formants_hz) != 3 or len(self.bandwidths_hz) != 3:
            raise ConfigurationError("a vowel needs exactly three formants and three bandwidths")
        f1, f2, f3 = self.formants_hz
        if not 0 < self.f0_hz < f1 < f2 < f3:
            raise ConfigurationError(f"need 0 < F0 < F1 < F2 < F3, got {self.f0_hz}, {self.formants_hz}")
        if min(self.bandwidths_hz) <= 0:
            raise ConfigurationError("bandwidths must be positive")

    def scaled(self, formant_factor: float, f0_factor: float = 1.0) -> "VowelSpec":
        return replace(
            self,
            f0_hz=self.f0_hz * f0_factor,
            formants_hz=tuple(f * formant_factor for f in self.formants_hz),
        )


@dataclass(frozen=True)
class TransitionSpec:
    start: VowelSpec
    end: VowelSpec
    duration_s: float = 0.3
    interpolation: str = "linear"
    hold_s: float = 0.0  # steady start/end vowel around the glide

    def __post_init__(self):
        if self.hold_s < 0:
            raise ConfigurationError("hold_s must be >= 0")
        if not MIN_DURATION_S <= self.duration_s <= MAX_DURATION_S:
            raise ConfigurationError(
                f"duration must be within [{MIN_DURATION_S}, {MAX_DURATION_S}] s, got {self.duration_s}"
            )
        if self.interpolation not in ("linear", "cosine"):
            raise ConfigurationError(f"unknown interpolation {self.interpolation!r}")


def vowel_presets() -> dict[str, dict[str, VowelSpec]]:
    """Preset vowels keyed by speaker (``male``/``female``) then vowel name."""
    male = {name: VowelSpec(f0, formants) for name, (f0, formants) in _MALE_TABLE.items()}
    female = {name: v.scaled(FEMALE_FORMANT_SCALE, FEMALE_F0_SCALE) for name, v in male.items()}
    return {"male": male, "female": female}


def preset(name: str, speaker: str = "male") -> VowelSpec:
    presets = vowel_presets()
    if speaker not in presets:
        raise ConfigurationError(f"unknown speaker {speaker!r}; expected male or female")
    key = name.strip().strip("/")
    if key not in presets[speaker]:
        raise ConfigurationError(f"unknown vowel {name!r}; known: {', '.join(sorted(presets[speaker]))}")
    return presets[speaker][key]


def _glide(start: float, end: float, weight: np.ndarray) -> np.ndarray:
    return start + (end - start) * weight


def _check_stable(freqs: np.ndarray, bws: np.ndarray, sample_rate_hz: int) -> None:
    nyquist = sample_rate_hz / 2.0
    if np.any(freqs >= nyquist):
        raise ConfigurationError(f"formant at {freqs.max():.0f} Hz is not below Nyquist ({nyquist:.0f} Hz)")
    radius = np.exp(-np.pi * bws / sample_rate_hz)
    if np.any(radius >= 1.0):
        raise ConfigurationError("resonator pole radius >= 1 (unstable)")


def synth_transition(spec: TransitionSpec, sample_rate_hz: int = 16000,
                     noise_snr_db: float | None = None, seed: int = 0) -> Waveform:
    """Synthesize ``spec`` at ``sample_rate_hz``, peak-normalized to 0.9.

    The output lasts ``duration_s + 2 * hold_s`` seconds.

    With ``noise_snr_db`` set, white Gaussian noise from ``seed`` is added at
    that signal-to-noise ratio before normalization; otherwise the output is
    fully deterministic.
    """
    n_glide = int(round(spec.duration_s * sample_rate_hz))
    n_hold = int(round(spec.hold_s * sample_rate_hz))
    progress = np.linspace(0.0, 1.0, n_glide)
    if spec.interpolation == "cosine":
        progress = 0.5 * (1.0 - np.cos(np.pi * progress))
    progress = np.concatenate([np.zeros(n_hold), progress, np.ones(n_hold)])
    n = progress.size

    f0 = _glide(spec.start.f0_hz, spec.end.f0_hz, progress)
    formants = np.stack([_glide(a, b, progress) for a, b in zip(spec.start.formants_hz, spec.end.formants_hz)])
    bws = np.stack([_glide(a, b, progress) for a, b in zip(spec.start.bandwidths_hz, spec.end.bandwidths_hz)])
    _check_stable(formants, bws, sample_rate_hz)

    # impulse whenever the accumulated F0 phase wraps; first pulse at n = 0
    phase = np.concatenate([[0.0], np.cumsum(f0[:-1] / sample_rate_hz)])
    cycles = np.floor(phase)
    source = np.zeros(n)
    source[0] = 1.0
    source[1:][np.diff(cycles) > 0] = 1.0

    T = 1.0 / sample_rate_hz
    c = -np.exp(-2.0 * np.pi * bws * T)
    b = 2.0 * np.exp(-np.pi * bws * T) * np.cos(2.0 * np.pi * formants * T)
    a = 1.0 - b - c

    y = source
    for k in range(formants.shape[0]):
        ak, bk, ck = a[k].tolist(), b[k].tolist(), c[k].tolist()
        x = y.tolist()
        out = [0.0] * n
        y1 = y2 = 0.0
        for i in range(n):
            v = ak[i] * x[i] + bk[i] * y1 + ck[i] * y2
            out[i] = v
            y2, y1 = y1, v
        y = np.asarray(out)

    if noise_snr_db is not None:
        rng = np.random.default_rng(seed)
        signal_power = float(np.mean(y**2))
        noise_power = signal_power / 10.0 ** (noise_snr_db / 10.0)
        y = y + rng.normal(0.0, np.sqrt(noise_power), n)

    peak = np.max(np.abs(y))
    if peak > 0:
        y = y * (PEAK_AMPLITUDE / peak)
    return Waveform(y, sample_rate_hz)


def steady_vowel(vowel: VowelSpec, duration_s: float = 0.3, sample_rate_hz: int = 16000) -> Waveform:
    return synth_transition(TransitionSpec(vowel, vowel, duration_s), sample_rate_hz)
