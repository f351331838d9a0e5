#!/usr/bin/env python3
"""MDCT alias cancellation and ERB-scale spectral pooling.

The high-band coder quantizes spectral envelopes in the MDCT domain; the
perceptual loss pools STFT magnitudes into ERB bands. Both transforms are
exercised here.
"""

import numpy as np

from swbcodec.transforms import (erb_matrix, erb_spectra, imdct, mdct,
                                 mdct_interior, stft_config, stft_magnitude)

# --- MDCT: perfect reconstruction under 50% overlap -----------------------
n = 320  # one 20 ms frame of coefficients at 16 kHz
rng = np.random.default_rng(1)
x = rng.standard_normal(12 * n)
coeffs = mdct(x, n)
rec = imdct(coeffs, n)
region = mdct_interior(coeffs.shape[0], n)
err = np.max(np.abs(rec[region] - x[region]))
print(f"MDCT N={n}: {coeffs.shape[0]} frames from {len(x)} samples, "
      f"interior error {err:.2e}")

# a 6 kHz tone at 16 kHz concentrates in coefficient ~ f/fs * 2N
tone = np.sin(2 * np.pi * 6000.0 / 16000.0 * np.arange(8 * n))
c = mdct(tone, n)
print(f"6 kHz tone: strongest MDCT coefficient at index {np.argmax(np.abs(c[3]))} "
      f"(expect ~{int(6000.0 / 16000.0 * 2 * n)})")

# --- ERB filterbank --------------------------------------------------------
erb = erb_matrix(fft_size=1024, sample_rate=16000, num_bands=64)
print(f"\nERB bank: 64 bands, centers {erb.centers_hz[0]:.0f} Hz .. "
      f"{erb.centers_hz[-1]:.0f} Hz")
print("band widths grow with frequency:",
      np.round(np.diff(erb.centers_hz)[[0, 20, 40, 62]], 1), "Hz")

cfg = stft_config(1024)
t = np.arange(16000)
speechish = (np.sin(2 * np.pi * 220.0 / 16000.0 * t)
             + 0.5 * np.sin(2 * np.pi * 2200.0 / 16000.0 * t)
             + 0.05 * rng.standard_normal(16000))
energies = erb_spectra(stft_magnitude(speechish, cfg), erb)
top = np.argsort(energies.mean(axis=0))[-3:][::-1]
print("strongest ERB bands for a 220 Hz + 2.2 kHz mixture:",
      [f"{erb.centers_hz[b]:.0f} Hz" for b in top])
