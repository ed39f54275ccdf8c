"""Window functions, radix-2 FFT, and magnitude spectrograms.

Everything in this module is pure and double precision. The FFT is an
iterative radix-2 decimation-in-time transform with a precomputed
bit-reversal permutation, so FFT lengths are restricted to powers of two.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "WindowKind",
    "StftConfig",
    "RealSignal",
    "Spectrogram",
    "SignalTooShortError",
    "window_coefficients",
    "fft",
    "num_windows",
    "frequency_axis",
    "time_axis",
    "compute_spectrogram",
]


class SignalTooShortError(ValueError):
    """Raised when a signal is shorter than one analysis window."""


class WindowKind(enum.Enum):
    RECTANGULAR = "rectangular"
    HANN = "hann"
    HAMMING = "hamming"


@dataclass(frozen=True)
class StftConfig:
    """Analysis parameters for :func:`compute_spectrogram`.

    ``window_len`` (L) and ``hop`` (H) are in samples; ``nfft`` must be a
    power of two and at least ``window_len`` (shorter windows are
    zero-padded up to ``nfft`` before the transform).
    """

    window_len: int = 256
    hop: int = 64
    nfft: int = 256
    window: WindowKind = WindowKind.HANN

    def __post_init__(self) -> None:
        if self.window_len < 1:
            raise ValueError(f"window_len must be >= 1, got {self.window_len}")
        if self.hop < 1:
            raise ValueError(f"hop must be >= 1, got {self.hop}")
        if not _is_power_of_two(self.nfft):
            raise ValueError(f"nfft must be a power of two, got {self.nfft}")
        if self.window_len > self.nfft:
            raise ValueError(
                f"window_len ({self.window_len}) must not exceed nfft ({self.nfft})"
            )
        if not isinstance(self.window, WindowKind):
            raise ValueError(f"window must be a WindowKind, got {self.window!r}")


@dataclass
class RealSignal:
    """A sampled 1-D signal together with its sampling rate in Hz."""

    samples: np.ndarray
    sample_rate_hz: float

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size < 1:
            raise ValueError("samples must be a non-empty 1-D array")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("samples must all be finite")
        if not self.sample_rate_hz > 0:
            raise ValueError(f"sample_rate_hz must be > 0, got {self.sample_rate_hz}")

    def __len__(self) -> int:
        return self.samples.size


@dataclass
class Spectrogram:
    """Magnitude spectrogram: ``values[m, k]`` with frequency and time axes.

    Rows index analysis frames (time), columns index FFT bins from DC up
    to the Nyquist frequency.
    """

    values: np.ndarray
    freqs_hz: np.ndarray = field(repr=False)
    times_s: np.ndarray = field(repr=False)

    @property
    def num_frames(self) -> int:
        return self.values.shape[0]

    @property
    def num_bins(self) -> int:
        return self.values.shape[1]


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def window_coefficients(kind: WindowKind, length: int) -> np.ndarray:
    """Return the ``length`` coefficients of the given analysis window.

    Windows are symmetric (denominator ``length - 1``); a length-1 window
    is ``[1.0]`` for every kind to avoid the 0/0 corner case.
    """
    if length < 1:
        raise ValueError(f"window length must be >= 1, got {length}")
    if length == 1:
        return np.ones(1)
    if kind is WindowKind.RECTANGULAR:
        return np.ones(length)
    n = np.arange(length, dtype=np.float64)
    phase = np.cos(2.0 * np.pi * n / (length - 1))
    if kind is WindowKind.HANN:
        return 0.5 * (1.0 - phase)
    if kind is WindowKind.HAMMING:
        return 0.54 - 0.46 * phase
    raise ValueError(f"unknown window kind: {kind!r}")


@lru_cache(maxsize=32)
def _bit_reversal_permutation(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n)
    perm = np.zeros(n, dtype=np.intp)
    for b in range(bits):
        perm |= ((idx >> b) & 1) << (bits - 1 - b)
    perm.setflags(write=False)
    return perm


@lru_cache(maxsize=32)
def _stage_twiddles(n: int) -> tuple[np.ndarray, ...]:
    # Twiddle factors e^{-2pi i j / size} for each butterfly stage.
    stages = []
    size = 2
    while size <= n:
        j = np.arange(size // 2)
        tw = np.exp(-2j * np.pi * j / size)
        tw.setflags(write=False)
        stages.append(tw)
        size *= 2
    return tuple(stages)


def fft(values: np.ndarray) -> np.ndarray:
    """Forward, unnormalized DFT along the last axis.

    ``output[k] = sum_n input[n] * exp(-2i pi k n / len)``. The transform
    length (last-axis size) must be a power of two.
    """
    x = np.asarray(values)
    n = x.shape[-1]
    if not _is_power_of_two(n):
        raise ValueError(f"FFT length must be a power of two, got {n}")
    out = np.array(x[..., _bit_reversal_permutation(n)], dtype=np.complex128)
    for tw in _stage_twiddles(n):
        half = tw.size
        size = 2 * half
        v = out.reshape(out.shape[:-1] + (n // size, size))
        a = v[..., :half]
        b = v[..., half:] * tw
        upper = a - b
        v[..., :half] = a + b
        v[..., half:] = upper
    return out


def num_windows(signal_len: int, window_len: int, hop: int) -> int:
    """Number of analysis frames M = floor((N - L) / H) + 1."""
    if window_len < 1 or hop < 1:
        raise ValueError("window_len and hop must be >= 1")
    if signal_len < window_len:
        raise SignalTooShortError(
            f"signal of length {signal_len} is shorter than one window "
            f"of {window_len} samples"
        )
    return (signal_len - window_len) // hop + 1


def frequency_axis(nfft: int, sample_rate_hz: float) -> np.ndarray:
    """Bin center frequencies F[k] = k * fs / nfft for k = 0 .. nfft/2."""
    if nfft < 2 or nfft % 2 != 0:
        raise ValueError(f"nfft must be even and >= 2, got {nfft}")
    return np.arange(nfft // 2 + 1) * sample_rate_hz / nfft


def time_axis(num_frames: int, hop: int, sample_rate_hz: float) -> np.ndarray:
    """Frame start times T[m] = m * hop / fs for m = 0 .. num_frames - 1."""
    if num_frames < 1 or hop < 1 or not sample_rate_hz > 0:
        raise ValueError("num_frames, hop and sample_rate_hz must be positive")
    return np.arange(num_frames) * hop / sample_rate_hz


def compute_spectrogram(signal: RealSignal, config: StftConfig = StftConfig()) -> Spectrogram:
    """Magnitude spectrogram of ``signal`` under ``config``.

    Frame m covers samples ``m*hop .. m*hop + window_len - 1``; each frame
    is multiplied elementwise by the window, zero-padded to ``nfft``,
    transformed, and its magnitude stored for bins 0 .. nfft/2.
    """
    samples = signal.samples
    m_frames = num_windows(samples.size, config.window_len, config.hop)
    window = window_coefficients(config.window, config.window_len)

    starts = np.arange(m_frames) * config.hop
    frames = samples[starts[:, None] + np.arange(config.window_len)]
    padded = np.zeros((m_frames, config.nfft))
    padded[:, : config.window_len] = frames * window

    spectrum = fft(padded)[:, : config.nfft // 2 + 1]
    return Spectrogram(
        values=np.abs(spectrum),
        freqs_hz=frequency_axis(config.nfft, signal.sample_rate_hz),
        times_s=time_axis(m_frames, config.hop, signal.sample_rate_hz),
    )
