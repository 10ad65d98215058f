"""Filterbanks, MFCCs and spectral subband centroid frequencies (SSCFs)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.fft import dct

from .dsp import bin_frequencies
from .errors import ConfigurationError, ContractError

N_SUBBANDS = 6
LOG_FLOOR = 1e-10
SSCF_ENERGY_FLOOR = 1e-20


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


@dataclass(frozen=True)
class TriangularFilterbank:
    n_filters: int
    edges_hz: np.ndarray
    edge_bins: np.ndarray
    weights: np.ndarray  # (n_filters, n_bins)
    sample_rate_hz: int
    fft_size: int


def build_mel_filterbank(n_filters: int, fmin_hz: float, fmax_hz: float, fft_size: int,
                         sample_rate_hz: int) -> TriangularFilterbank:
    """Triangular filters with centres equally spaced on the mel scale.

    Edges are snapped to FFT bins so that every filter peaks at exactly 1 and
    neighbouring filters cross at complementary weights (they sum to 1 on
    the overlap).
    """
    if n_filters < 1:
        raise ConfigurationError("n_filters must be >= 1")
    nyquist = sample_rate_hz / 2.0
    if not 0.0 <= fmin_hz < fmax_hz <= nyquist:
        raise ConfigurationError(f"need 0 <= fmin < fmax <= {nyquist}, got {fmin_hz}, {fmax_hz}")
    mels = np.linspace(hz_to_mel(fmin_hz), hz_to_mel(fmax_hz), n_filters + 2)
    edges_hz = mel_to_hz(mels)
    edges_hz[0], edges_hz[-1] = fmin_hz, fmax_hz
    bins = np.rint(edges_hz / sample_rate_hz * fft_size).astype(int)
    if np.any(np.diff(bins) <= 0):
        raise ConfigurationError(
            f"{n_filters} filters over {fmin_hz}-{fmax_hz} Hz do not fit in a {fft_size}-point FFT"
        )
    n_bins = fft_size // 2 + 1
    weights = np.zeros((n_filters, n_bins))
    k = np.arange(n_bins)
    for j in range(n_filters):
        lo, mid, hi = bins[j], bins[j + 1], bins[j + 2]
        rising = (k - lo) / (mid - lo)
        falling = (hi - k) / (hi - mid)
        weights[j] = np.clip(np.minimum(rising, falling), 0.0, None)
    return TriangularFilterbank(n_filters, edges_hz, bins, weights, sample_rate_hz, fft_size)


def lifter_weights(n_coefs: int, lifter: int) -> np.ndarray:
    k = np.arange(n_coefs)
    if lifter <= 0:
        return np.ones(n_coefs)
    return 1.0 + (lifter / 2.0) * np.sin(np.pi * k / lifter)


def log_filterbank_energies(power: np.ndarray, fb: TriangularFilterbank,
                            floor: float = LOG_FLOOR) -> np.ndarray:
    energies = np.asarray(power, dtype=np.float64) @ fb.weights.T
    return np.log(np.maximum(energies, floor))


def mfcc(power: np.ndarray, fb: TriangularFilterbank, n_coefs: int, lifter: int = 22,
         floor: float = LOG_FLOOR) -> np.ndarray:
    """Liftered MFCCs (c0 included) from one spectrum or a stack of spectra.

    Log filterbank energies go through an orthonormal DCT-II; the first
    ``n_coefs`` coefficients are kept and weighted by
    ``1 + (L/2) sin(pi k / L)``.
    """
    if n_coefs > fb.n_filters:
        raise ConfigurationError(f"n_coefs={n_coefs} exceeds the {fb.n_filters} filters")
    logs = log_filterbank_energies(power, fb, floor)
    ceps = dct(logs, type=2, norm="ortho", axis=-1)[..., :n_coefs]
    return ceps * lifter_weights(n_coefs, lifter)


@dataclass(frozen=True)
class SubbandSpec:
    """One SSCF band: ``[low_hz, high_hz]`` with weight shape and gamma."""

    index: int
    low_hz: float
    high_hz: float
    weight_shape: str = "rectangular"
    gamma: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.low_hz < self.high_hz:
            raise ConfigurationError(f"band {self.index}: need 0 <= low < high, got {self.low_hz}, {self.high_hz}")
        if self.weight_shape not in ("rectangular", "triangular"):
            raise ConfigurationError(f"band {self.index}: unknown weight shape {self.weight_shape!r}")
        if not self.gamma > 0:
            raise ConfigurationError(f"band {self.index}: gamma must be > 0")

    @property
    def midpoint_hz(self) -> float:
        return 0.5 * (self.low_hz + self.high_hz)

    def weights(self, freqs: np.ndarray) -> np.ndarray:
        inside = (freqs >= self.low_hz) & (freqs <= self.high_hz)
        if self.weight_shape == "rectangular":
            return inside.astype(np.float64)
        half = 0.5 * (self.high_hz - self.low_hz)
        return np.where(inside, 1.0 - np.abs(freqs - self.midpoint_hz) / half, 0.0)


def default_subbands(sample_rate_hz: int, n_bands: int = N_SUBBANDS) -> list[SubbandSpec]:
    """Contiguous mel-spaced bands partitioning ``[0, Nyquist]``."""
    if sample_rate_hz < 8000:
        raise ConfigurationError("default subbands need a sample rate >= 8000 Hz")
    nyquist = sample_rate_hz / 2.0
    edges = mel_to_hz(np.linspace(0.0, hz_to_mel(nyquist), n_bands + 1))
    edges[0], edges[-1] = 0.0, nyquist
    return [SubbandSpec(m, float(edges[m]), float(edges[m + 1])) for m in range(n_bands)]


def validate_subbands(bands: Sequence[SubbandSpec], sample_rate_hz: int) -> None:
    nyquist = sample_rate_hz / 2.0
    for b in bands:
        if b.high_hz > nyquist:
            raise ConfigurationError(f"band {b.index} upper edge {b.high_hz} Hz exceeds Nyquist {nyquist}")
    lows = [b.low_hz for b in bands]
    if any(hi <= lo for lo, hi in zip(lows, lows[1:])):
        raise ConfigurationError("subband lower edges must be strictly increasing")


@dataclass(frozen=True)
class SscfTrack:
    """Per-frame centroids, shape ``(n_frames, n_bands)``, plus degenerate-band flags."""

    values: np.ndarray
    degenerate: np.ndarray  # bool, same shape as values

    @property
    def n_frames(self) -> int:
        return self.values.shape[0]

    def band(self, m: int) -> np.ndarray:
        return self.values[:, m]

    @property
    def degenerate_frames(self) -> np.ndarray:
        return self.degenerate.any(axis=1)


def _centroids(power: np.ndarray, bands: Sequence[SubbandSpec], freqs: np.ndarray,
               energy_floor: float) -> tuple[np.ndarray, np.ndarray]:
    power = np.atleast_2d(np.asarray(power, dtype=np.float64))
    if np.any(power < 0):
        raise ContractError("power spectrum has negative bins")
    values = np.empty((power.shape[0], len(bands)))
    degenerate = np.zeros(values.shape, dtype=bool)
    for m, band in enumerate(bands):
        w = band.weights(freqs)
        sel = w > 0
        p = power[:, sel] if band.gamma == 1.0 else power[:, sel] ** band.gamma
        den = p @ w[sel]
        num = p @ (w[sel] * freqs[sel])
        bad = ~(den > energy_floor)
        values[:, m] = np.where(bad, band.midpoint_hz, num / np.where(bad, 1.0, den))
        degenerate[:, m] = bad
    return values, degenerate


def sscf(power: np.ndarray, bands: Sequence[SubbandSpec], sample_rate_hz: int,
         energy_floor: float = SSCF_ENERGY_FLOOR) -> np.ndarray:
    """Subband centroid frequencies (Hz) of a single power spectrum.

    A band with no energy above ``energy_floor`` reports its midpoint;
    use :func:`sscf_track` to also get the degenerate-band flags.
    """
    power = np.asarray(power, dtype=np.float64)
    if power.ndim != 1:
        raise ContractError("sscf() takes a single spectrum; use sscf_track() for frames")
    fft_size = 2 * (power.size - 1)
    values, _ = _centroids(power, bands, bin_frequencies(fft_size, sample_rate_hz), energy_floor)
    return values[0]


def sscf_track(spectra: np.ndarray, bands: Sequence[SubbandSpec], sample_rate_hz: int,
               energy_floor: float = SSCF_ENERGY_FLOOR) -> SscfTrack:
    spectra = np.asarray(spectra, dtype=np.float64)
    if spectra.ndim != 2:
        raise ContractError("sscf_track() expects a (frames, bins) array")
    fft_size = 2 * (spectra.shape[1] - 1)
    if spectra.shape[0] == 0:
        return SscfTrack(np.zeros((0, len(bands))), np.zeros((0, len(bands)), dtype=bool))
    values, degenerate = _centroids(spectra, bands, bin_frequencies(fft_size, sample_rate_hz), energy_floor)
    return SscfTrack(values, degenerate)
