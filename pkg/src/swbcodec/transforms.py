"""Spectral transforms: STFT magnitude, MDCT/IMDCT, ERB filterbank.

The MDCT uses a sine window with 50% overlap (time-domain alias
cancellation holds exactly for interior frames). Frames are laid on a hop
grid of N samples: frame k covers input samples [k*N, (k+2)*N), so a
signal of m*N samples yields m-1 frames and the overlap-added
reconstruction is exact on samples [N, (m-1)*N); the first and last N
output samples are transition regions.
"""

from dataclasses import dataclass

import numpy as np
from scipy.fft import dct

__all__ = [
    "StftConfig",
    "ErbMatrix",
    "stft_config",
    "stft_magnitude",
    "frame_count",
    "sine_window",
    "mdct",
    "imdct",
    "mdct_interior",
    "erb_rate",
    "erb_rate_inverse",
    "erb_matrix",
    "erb_spectra",
]


@dataclass(frozen=True)
class StftConfig:
    fft_size: int
    hop_size: int
    window: np.ndarray

    def __post_init__(self):
        if self.hop_size > self.fft_size or self.hop_size < 1:
            raise ValueError("hop_size must be in [1, fft_size]")
        if len(self.window) != self.fft_size:
            raise ValueError("window length must equal fft_size")

    @property
    def bins(self) -> int:
        return self.fft_size // 2 + 1


def stft_config(fft_size: int, hop_size: int | None = None) -> StftConfig:
    """Periodic-Hann config with the usual quarter-window hop."""
    if hop_size is None:
        hop_size = fft_size // 4
    n = np.arange(fft_size)
    window = 0.5 - 0.5 * np.cos(2.0 * np.pi * n / fft_size)
    return StftConfig(fft_size=fft_size, hop_size=hop_size, window=window)


def frame_count(num_samples: int, cfg: StftConfig) -> int:
    return (num_samples - cfg.fft_size) // cfg.hop_size + 1


def stft_magnitude(x: np.ndarray, cfg: StftConfig) -> np.ndarray:
    """Magnitude spectrogram, shape (frames, fft_size // 2 + 1).

    No padding: frames = floor((len - fft_size) / hop) + 1. Raises if the
    input is shorter than one FFT frame.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or len(x) == 0:
        raise ValueError("input must be a non-empty 1-D signal")
    if len(x) < cfg.fft_size:
        raise ValueError(f"input length {len(x)} < fft_size {cfg.fft_size}")
    frames = frame_count(len(x), cfg)
    idx = np.arange(cfg.fft_size)[None, :] + cfg.hop_size * np.arange(frames)[:, None]
    return np.abs(np.fft.rfft(x[idx] * cfg.window, axis=1))


def sine_window(half_window: int) -> np.ndarray:
    """Length-2N sine window; satisfies the alias-cancellation condition."""
    n = np.arange(2 * half_window)
    return np.sin(np.pi / (2 * half_window) * (n + 0.5))


def mdct(x: np.ndarray, half_window: int) -> np.ndarray:
    """Sine-windowed MDCT, 50% overlap; returns (frames, N) coefficients.

    Input length must be a multiple of N = ``half_window``; an input of
    m*N samples gives m-1 frames.
    """
    x = np.asarray(x, dtype=np.float64)
    n = half_window
    if n < 2 or n % 2 != 0:
        raise ValueError("half_window must be even and >= 2")
    if x.ndim != 1 or len(x) % n != 0:
        raise ValueError(f"input length {len(x)} not a multiple of {n}")
    if len(x) < 2 * n:
        raise ValueError("need at least one full 2N window")
    frames = len(x) // n - 1
    idx = np.arange(2 * n)[None, :] + n * np.arange(frames)[:, None]
    windowed = x[idx] * sine_window(n)
    # fold 2N windowed samples to N, then DCT-IV
    a = windowed[:, : n // 2]
    b = windowed[:, n // 2 : n]
    c = windowed[:, n : 3 * n // 2]
    d = windowed[:, 3 * n // 2 :]
    folded = np.concatenate([-c[:, ::-1] - d, a - b[:, ::-1]], axis=1)
    return dct(folded, type=4, axis=1) / 2.0


def imdct(coeffs: np.ndarray, half_window: int) -> np.ndarray:
    """Overlap-added inverse MDCT; exact inverse of :func:`mdct` on the
    interior (see :func:`mdct_interior`).

    F frames reconstruct (F+1)*N samples; the first and last N are
    transition regions.
    """
    coeffs = np.asarray(coeffs, dtype=np.float64)
    n = half_window
    if coeffs.ndim != 2 or coeffs.shape[1] != n:
        raise ValueError(f"expected (frames, {n}) coefficients, got {coeffs.shape}")
    if coeffs.shape[0] < 1:
        raise ValueError("need at least one frame")
    u = dct(coeffs, type=4, axis=1) / n
    first = u[:, : n // 2]
    second = u[:, n // 2 :]
    chunks = np.empty((coeffs.shape[0], 2 * n))
    chunks[:, : n // 2] = second
    chunks[:, n // 2 : n] = -second[:, ::-1]
    chunks[:, n : 3 * n // 2] = -first[:, ::-1]
    chunks[:, 3 * n // 2 :] = -first
    chunks *= sine_window(n)
    out = np.zeros((coeffs.shape[0] + 1) * n)
    for k in range(coeffs.shape[0]):
        out[k * n : (k + 2) * n] += chunks[k]
    return out


def mdct_interior(num_frames: int, half_window: int) -> slice:
    """Slice of the :func:`imdct` output where reconstruction is exact."""
    return slice(half_window, num_frames * half_window)


def erb_rate(freq_hz: np.ndarray | float) -> np.ndarray | float:
    """Frequency (Hz) to ERB-rate scale."""
    return 21.4 * np.log10(1.0 + 0.00437 * np.asarray(freq_hz, dtype=np.float64))


def erb_rate_inverse(rate: np.ndarray | float) -> np.ndarray | float:
    return (10.0 ** (np.asarray(rate, dtype=np.float64) / 21.4) - 1.0) / 0.00437


@dataclass(frozen=True)
class ErbMatrix:
    """Row-normalized triangular pooling matrix on the ERB-rate scale."""

    weights: np.ndarray       # (bands, bins)
    centers_hz: np.ndarray    # (bands,)
    band_edges_hz: np.ndarray  # (bands + 2,) lower edge, centers' neighbours, upper edge


def erb_matrix(fft_size: int, sample_rate: int, num_bands: int = 64) -> ErbMatrix:
    """Triangular filters with ERB-rate-spaced centers, rows summing to 1.

    Centers span 30 Hz to 0.95 * Nyquist; each triangle runs from the
    previous center to the next (contiguous support).
    """
    bins = fft_size // 2 + 1
    if num_bands < 8:
        raise ValueError("num_bands must be >= 8")
    if num_bands > bins:
        raise ValueError(f"num_bands {num_bands} exceeds {bins} FFT bins")
    nyquist = sample_rate / 2.0
    lo, hi = erb_rate(30.0), erb_rate(0.95 * nyquist)
    centers_rate = np.linspace(lo, hi, num_bands)
    centers_hz = np.asarray(erb_rate_inverse(centers_rate))
    edges_rate = np.concatenate([[erb_rate(0.0)], centers_rate, [erb_rate(nyquist)]])

    bin_rate = erb_rate(np.arange(bins) * sample_rate / fft_size)
    weights = np.zeros((num_bands, bins))
    for b in range(num_bands):
        left, center, right = edges_rate[b], edges_rate[b + 1], edges_rate[b + 2]
        rising = (bin_rate - left) / max(center - left, 1e-12)
        falling = (right - bin_rate) / max(right - center, 1e-12)
        weights[b] = np.clip(np.minimum(rising, falling), 0.0, None)
        if weights[b].sum() <= 0.0:
            # triangle narrower than the bin grid: snap to the nearest bin
            weights[b, np.argmin(np.abs(bin_rate - center))] = 1.0
    weights /= weights.sum(axis=1, keepdims=True)
    return ErbMatrix(weights=weights, centers_hz=centers_hz,
                     band_edges_hz=np.asarray(erb_rate_inverse(edges_rate)))


def erb_spectra(mag: np.ndarray, erb: ErbMatrix) -> np.ndarray:
    """Per-band RMS pooling of a magnitude spectrogram: sqrt(mag^2 @ W.T)."""
    mag = np.asarray(mag, dtype=np.float64)
    if mag.ndim != 2 or mag.shape[1] != erb.weights.shape[1]:
        raise ValueError(
            f"magnitude bins {mag.shape} do not match ERB matrix {erb.weights.shape}")
    return np.sqrt((mag ** 2) @ erb.weights.T)
