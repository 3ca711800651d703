"""Streaming signal primitives: causal band-pass filtering, power envelopes,
analytic phase, phase-locking value, and the Laplacian spatial filter.

Filters are Butterworth band-passes realized as cascaded second-order sections
with one independent state per channel, so processing a signal in blocks of
any partition is bit-identical to processing it in one call.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import signal

from .errors import ConfigError


@dataclass(frozen=True)
class BandpassSpec:
    """Band edges in Hz, cascade order (number of biquad sections), sampling rate."""

    low_hz: float
    high_hz: float
    order: int = 4
    fs: float = 256.0

    def __post_init__(self):
        if not (0.0 < self.low_hz < self.high_hz < self.fs / 2.0):
            raise ConfigError(
                f"band edges must satisfy 0 < low < high < fs/2, got "
                f"({self.low_hz}, {self.high_hz}) at fs={self.fs}"
            )
        if self.order < 2 or self.order % 2 != 0:
            raise ConfigError(f"filter order must be even and >= 2, got {self.order}")


def design_bandpass(spec: BandpassSpec) -> np.ndarray:
    """Second-order sections for a causal Butterworth band-pass."""
    return signal.butter(spec.order, [spec.low_hz, spec.high_hz],
                         btype="bandpass", fs=spec.fs, output="sos")


def bandpass_gain(spec: BandpassSpec, freqs_hz) -> np.ndarray:
    """Magnitude of the designed transfer function at the given frequencies."""
    sos = design_bandpass(spec)
    _, h = signal.sosfreqz(sos, worN=np.atleast_1d(np.asarray(freqs_hz, dtype=float)),
                           fs=spec.fs)
    return np.abs(h)


class StreamingBandpass:
    """Causal band-pass with persistent per-channel recursion state.

    Single-writer: feed blocks from one task only.
    """

    def __init__(self, spec: BandpassSpec, n_channels: int):
        self.spec = spec
        self.n_channels = int(n_channels)
        self.sos = design_bandpass(spec)
        # state shape (n_sections, n_channels, 2); filtering runs along axis -1
        self._zi = np.zeros((self.sos.shape[0], self.n_channels, 2))

    def process(self, x: np.ndarray) -> np.ndarray:
        """Filter a (n_channels, n_samples) block, advancing the state."""
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[0] != self.n_channels:
            raise ValueError(
                f"expected block of shape ({self.n_channels}, n), got {x.shape}"
            )
        y, self._zi = signal.sosfilt(self.sos, x, axis=-1, zi=self._zi)
        return y

    def reset(self) -> None:
        self._zi[:] = 0.0


def power_envelope(x: np.ndarray, window_sec: float, fs: float) -> np.ndarray:
    """Causal sliding-window mean of squared samples along the last axis.

    The window ends at the output sample; during the first window_sec the mean
    runs over however many samples have arrived.
    """
    w = int(round(window_sec * fs))
    if w < 1:
        raise ConfigError(f"window of {window_sec} s holds no samples at fs={fs}")
    x = np.asarray(x, dtype=float)
    sq = x * x
    n = sq.shape[-1]
    c = np.cumsum(sq, axis=-1)
    out = np.empty_like(sq)
    k = min(w, n)
    out[..., :k] = c[..., :k] / np.arange(1, k + 1)
    if n > w:
        out[..., w:] = (c[..., w:] - c[..., :-w]) / w
    return out


class RunningPower:
    """Streaming counterpart of :func:`power_envelope` (ring buffer per channel)."""

    def __init__(self, window_sec: float, fs: float, n_channels: int):
        self.window = int(round(window_sec * fs))
        if self.window < 1:
            raise ConfigError(f"window of {window_sec} s holds no samples at fs={fs}")
        self.n_channels = int(n_channels)
        self._buf = np.zeros((self.n_channels, self.window))
        self._sum = np.zeros(self.n_channels)
        self._pos = 0
        self._filled = 0

    def push(self, x: np.ndarray) -> None:
        """Consume a (n_channels, n_samples) block of already-filtered samples."""
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[0] != self.n_channels:
            raise ValueError(f"expected ({self.n_channels}, n) block, got {x.shape}")
        sq = x * x
        for i in range(sq.shape[1]):
            col = sq[:, i]
            self._sum += col - self._buf[:, self._pos]
            self._buf[:, self._pos] = col
            self._pos = (self._pos + 1) % self.window
            self._filled = min(self._filled + 1, self.window)

    @property
    def value(self) -> np.ndarray:
        """Current per-channel power (mean square over the window so far)."""
        n = max(self._filled, 1)
        # running sums drift; non-negativity is a hard output contract
        return np.maximum(self._sum, 0.0) / n


class PhaseWindow:
    """Sliding sample window sized for the transform-based analytic signal."""

    def __init__(self, length_samples: int, n_channels: int = 1):
        if length_samples < 64 or (length_samples & (length_samples - 1)) != 0:
            raise ConfigError(
                f"phase window must be a power of two >= 64, got {length_samples}"
            )
        self.length = int(length_samples)
        self.n_channels = int(n_channels)
        self._buf = np.zeros((self.n_channels, self.length))
        self._count = 0

    @property
    def full(self) -> bool:
        return self._count >= self.length

    def push(self, x: np.ndarray) -> None:
        x = np.asarray(x, dtype=float)
        if x.ndim != 2 or x.shape[0] != self.n_channels:
            raise ValueError(f"expected ({self.n_channels}, n) block, got {x.shape}")
        n = x.shape[1]
        if n >= self.length:
            self._buf[:] = x[:, -self.length:]
        else:
            self._buf[:, :-n] = self._buf[:, n:]
            self._buf[:, -n:] = x
        self._count = min(self._count + n, self.length)

    def samples(self) -> np.ndarray:
        return self._buf.copy()


def analytic_phase(window: np.ndarray) -> np.ndarray:
    """Instantaneous phase (radians, in (-pi, pi]) of the analytic signal.

    Returns None if the caller hands a not-yet-full PhaseWindow.
    """
    if isinstance(window, PhaseWindow):
        if not window.full:
            return None
        window = window.samples()
    x = np.asarray(window, dtype=float)
    return np.angle(signal.hilbert(x, axis=-1))


def plv(phase_a: np.ndarray, phase_b: np.ndarray) -> float:
    """Phase-locking value |mean(exp(i(a-b)))| in [0, 1]."""
    a = np.asarray(phase_a, dtype=float).ravel()
    b = np.asarray(phase_b, dtype=float).ravel()
    if a.size == 0 or b.size == 0:
        raise ValueError("plv needs at least one phase sample")
    if a.size != b.size:
        raise ValueError(f"phase series lengths differ: {a.size} vs {b.size}")
    return float(min(abs(np.mean(np.exp(1j * (a - b)))), 1.0))


def laplacian(values, center: str, montage) -> float:
    """Center value minus the mean of its surround, per the montage neighbor map."""
    try:
        neighbors = montage.laplacian_neighbors[center]
    except KeyError:
        raise KeyError(f"no Laplacian neighborhood defined for {center!r}") from None
    values = np.asarray(values, dtype=float)
    nbr = [values[montage.index(n)] for n in sorted(neighbors)]
    return float(values[montage.index(center)] - np.mean(nbr))
