"""Signal conditioning: pre-emphasis, framing, Hamming window, power spectrum.

Every function here is a pure function of its inputs. The chain deliberately
has no dithering and no DC removal, so each stage can be checked exactly
against a direct computation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, ContractError

MIN_SAMPLE_RATE = 8000


@dataclass(frozen=True)
class Waveform:
    """Mono audio with samples in [-1, 1]."""

    samples: np.ndarray
    sample_rate_hz: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1:
            raise ContractError("waveform must be one-dimensional (mono)")
        if samples.size == 0:
            raise ContractError("waveform is empty")
        if not np.all(np.isfinite(samples)):
            raise ContractError("waveform contains non-finite samples")
        if int(self.sample_rate_hz) != self.sample_rate_hz or self.sample_rate_hz < MIN_SAMPLE_RATE:
            raise ContractError(
                f"sample rate must be an integer >= {MIN_SAMPLE_RATE} Hz, got {self.sample_rate_hz}"
            )
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate_hz", int(self.sample_rate_hz))

    @property
    def duration_s(self) -> float:
        return self.samples.size / self.sample_rate_hz

    def __len__(self):
        return self.samples.size


@dataclass(frozen=True)
class FrameMatrix:
    """Fixed-length analysis frames, shape ``(n_frames, frame_length_samples)``."""

    frames: np.ndarray
    frame_length_samples: int
    hop_length_samples: int
    sample_rate_hz: int

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def is_empty(self) -> bool:
        return self.n_frames == 0

    def frame_times(self) -> np.ndarray:
        """Centre time of each frame in seconds."""
        starts = np.arange(self.n_frames) * self.hop_length_samples
        return (starts + self.frame_length_samples / 2.0) / self.sample_rate_hz


def samples_for_ms(ms: float, sample_rate_hz: int) -> int:
    return int(round(ms * 1e-3 * sample_rate_hz))


def frame_count(n_samples: int, frame_length: int, hop_length: int) -> int:
    if n_samples < frame_length:
        return 0
    return 1 + (n_samples - frame_length) // hop_length


def preemphasize(w: Waveform, coefficient: float = 0.97) -> Waveform:
    """First-order pre-emphasis ``y[n] = x[n] - k*x[n-1]``; ``y[0] = x[0]``."""
    if not 0.0 <= coefficient < 1.0:
        raise ConfigurationError(f"pre-emphasis coefficient must be in [0, 1), got {coefficient}")
    x = w.samples
    y = np.empty_like(x)
    y[0] = x[0]
    y[1:] = x[1:] - coefficient * x[:-1]
    return Waveform(y, w.sample_rate_hz)


def frame(w: Waveform, frame_ms: float = 25.0, hop_ms: float = 10.0) -> FrameMatrix:
    """Cut ``w`` into overlapping frames from the start, dropping any partial tail.

    A signal shorter than one frame gives a FrameMatrix with zero frames.
    """
    if not frame_ms >= hop_ms > 0:
        raise ConfigurationError(f"need frame_ms >= hop_ms > 0, got {frame_ms}/{hop_ms}")
    sr = w.sample_rate_hz
    length = samples_for_ms(frame_ms, sr)
    hop = samples_for_ms(hop_ms, sr)
    if hop < 1:
        raise ConfigurationError(f"hop of {hop_ms} ms is shorter than one sample at {sr} Hz")
    n = frame_count(w.samples.size, length, hop)
    if n == 0:
        frames = np.zeros((0, length))
    else:
        idx = np.arange(length)[None, :] + hop * np.arange(n)[:, None]
        frames = w.samples[idx]
    return FrameMatrix(frames, length, hop, sr)


def hamming(n: int) -> np.ndarray:
    """Symmetric Hamming window ``0.54 - 0.46 cos(2 pi n / (N-1))``."""
    if n == 1:
        return np.ones(1)
    k = np.arange(n)
    return 0.54 - 0.46 * np.cos(2.0 * np.pi * k / (n - 1))


def apply_hamming(fm: FrameMatrix) -> FrameMatrix:
    if fm.is_empty:
        raise ContractError("cannot window an empty FrameMatrix")
    win = hamming(fm.frame_length_samples)
    return FrameMatrix(fm.frames * win, fm.frame_length_samples, fm.hop_length_samples, fm.sample_rate_hz)


def check_fft_size(fft_size: int, frame_length: int) -> None:
    if fft_size < 1 or fft_size & (fft_size - 1):
        raise ConfigurationError(f"fft_size must be a power of two, got {fft_size}")
    if fft_size < frame_length:
        raise ConfigurationError(f"fft_size {fft_size} is shorter than the frame length {frame_length}")


def power_spectrum(fm: FrameMatrix, fft_size: int = 512) -> np.ndarray:
    """Unscaled one-sided power spectrum ``|X[k]|**2``, k = 0..fft_size/2.

    Frames are zero-padded to ``fft_size``. Returns an array of shape
    ``(n_frames, fft_size // 2 + 1)``; no 1/N scaling is applied.
    """
    check_fft_size(fft_size, fm.frame_length_samples)
    spec = np.fft.rfft(fm.frames, n=fft_size, axis=-1)
    return spec.real**2 + spec.imag**2


def bin_frequencies(fft_size: int, sample_rate_hz: int) -> np.ndarray:
    """Centre frequency in Hz of each one-sided FFT bin."""
    return np.arange(fft_size // 2 + 1) * (sample_rate_hz / fft_size)
