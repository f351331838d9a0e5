"""Deterministic speech-like test signals.

Used by the benchmark command, the demos, and the test suite. Segments
alternate between voiced (pulse train through formant resonators, rich in
harmonics up to Nyquist), unvoiced (shaped noise), and silence.
"""

import numpy as np
from scipy.signal import lfilter

__all__ = ["speech_like", "pulse_train"]


def pulse_train(num_samples: int, period: int, amplitude: float = 1.0) -> np.ndarray:
    out = np.zeros(num_samples)
    out[::period] = amplitude
    return out


def _resonator(freq_hz: float, sample_rate: int, radius: float = 0.97):
    w = 2.0 * np.pi * freq_hz / sample_rate
    return [1.0], [1.0, -2.0 * radius * np.cos(w), radius ** 2]


def speech_like(duration_s: float, sample_rate: int = 16000, seed: int = 0) -> np.ndarray:
    """Speech-like signal: voiced/unvoiced/silence segments, peak 0.8."""
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * sample_rate))
    out = np.zeros(n)
    pos = 0
    while pos < n:
        seg_len = min(int(rng.uniform(0.15, 0.35) * sample_rate), n - pos)
        kind = rng.choice(3, p=[0.6, 0.25, 0.15])
        if kind == 0:  # voiced
            f0 = rng.uniform(80.0, 250.0)
            seg = pulse_train(seg_len, max(2, int(sample_rate / f0)))
            for formant in rng.uniform(300.0, sample_rate * 0.22, size=2):
                b, a = _resonator(formant, sample_rate)
                seg = lfilter(b, a, seg)
            seg = seg / (np.max(np.abs(seg)) + 1e-12)
            seg += 0.02 * rng.standard_normal(seg_len)
            seg *= rng.uniform(0.3, 0.9)
        elif kind == 1:  # unvoiced
            seg = rng.standard_normal(seg_len)
            b, a = _resonator(rng.uniform(0.55, 0.9) * sample_rate / 2, sample_rate, 0.8)
            seg = lfilter(b, a, seg)
            seg = seg / (np.max(np.abs(seg)) + 1e-12) * rng.uniform(0.05, 0.25)
        else:
            seg = np.zeros(seg_len)
        fade = min(64, seg_len // 4)
        if fade > 0:
            ramp = np.linspace(0.0, 1.0, fade)
            seg[:fade] *= ramp
            seg[-fade:] *= ramp[::-1]
        out[pos:pos + seg_len] = seg
        pos += seg_len
    peak = np.max(np.abs(out))
    if peak > 0:
        out *= 0.8 / peak
    return out
