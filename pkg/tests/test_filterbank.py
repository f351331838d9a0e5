import numpy as np
import pytest
from scipy.signal import lfilter

from swbcodec.filterbank import (design_pqmf_prototype, power_symmetry_deviation,
                                 pqmf_analyze, pqmf_synthesize, qmf_analyze,
                                 qmf_delay, qmf_synthesize, unflip_high_band)

from conftest import snr_db


def roundtrip(x, spec):
    lo, hi = qmf_analyze(x, spec)
    return qmf_synthesize(lo, hi, spec)


def delay_by_xcorr(x, y, max_delay=256):
    # oracle: filterbank delay located by the cross-correlation peak
    n = min(len(x), len(y)) - max_delay
    corr = [np.dot(y[d:d + n], x[:n]) for d in range(max_delay)]
    return int(np.argmax(np.abs(corr)))


class TestQmfDesign:
    def test_power_symmetry(self, qmf):
        assert power_symmetry_deviation(qmf.prototype_taps) <= 0.01

    def test_even_length(self, qmf):
        assert qmf.num_taps == 64


class TestQmfAnalyze:
    def test_zeros(self, qmf):
        lo, hi = qmf_analyze(np.zeros(640), qmf)
        assert lo.shape == hi.shape == (320,)
        assert not lo.any() and not hi.any()

    def test_1khz_sine_stays_in_low_band(self, qmf):
        t = np.arange(640)
        x = np.sin(2 * np.pi * 1000.0 / 32000.0 * t)
        lo, hi = qmf_analyze(x, qmf)
        steady = slice(qmf.num_taps // 2, None)  # skip the filter transient
        ratio_db = 20 * np.log10(np.sqrt(np.mean(hi[steady] ** 2))
                                 / np.sqrt(np.mean(lo[steady] ** 2)))
        assert ratio_db <= -40.0
        # oracle: FFT of the low band peaks at 1 kHz (bin = f/fs_band * n)
        spectrum = np.abs(np.fft.rfft(lo[steady] * np.hanning(len(lo[steady]))))
        peak_hz = np.argmax(spectrum) * 16000.0 / len(lo[steady])
        assert abs(peak_hz - 1000.0) < 100.0

    def test_band_energy_parseval(self, qmf):
        rng = np.random.default_rng(11)
        x = rng.standard_normal(32000)
        lo, hi = qmf_analyze(x, qmf)
        total_db = 10 * np.log10((np.sum(lo ** 2) + np.sum(hi ** 2)) / np.sum(x ** 2))
        assert abs(total_db) <= 0.5

    def test_matches_direct_filter_reference(self, qmf):
        # independent oracle: lfilter path instead of convolution
        rng = np.random.default_rng(12)
        x = rng.standard_normal(2000)
        lo, hi = qmf_analyze(x, qmf)
        h0 = qmf.prototype_taps
        h1 = h0 * (-1.0) ** np.arange(len(h0))
        np.testing.assert_allclose(lo, lfilter(h0, [1.0], x)[0::2], atol=1e-12)
        np.testing.assert_allclose(hi, lfilter(h1, [1.0], x)[0::2], atol=1e-12)

    def test_odd_length_rejected(self, qmf):
        with pytest.raises(ValueError):
            qmf_analyze(np.zeros(641), qmf)


class TestQmfSynthesize:
    def test_zero_bands(self, qmf):
        out = qmf_synthesize(np.zeros(100), np.zeros(100), qmf)
        assert out.shape == (200,)
        assert not out.any()

    def test_roundtrip_white_noise(self, qmf):
        rng = np.random.default_rng(0)
        x = rng.standard_normal(320000)  # 10 s at 32 kHz
        y = roundtrip(x, qmf)
        d = delay_by_xcorr(x, y)
        assert d == qmf_delay(qmf)
        assert snr_db(x[: len(x) - d], y[d:] - x[: len(x) - d]) >= 50.0

    def test_roundtrip_ar2_noise(self, qmf):
        rng = np.random.default_rng(1)
        x = lfilter([1.0], [1.0, -1.2, 0.4], rng.standard_normal(64000))
        y = roundtrip(x, qmf)
        d = delay_by_xcorr(x, y)
        assert snr_db(x[: len(x) - d], y[d:] - x[: len(x) - d]) >= 50.0

    def test_mismatched_bands_rejected(self, qmf):
        with pytest.raises(ValueError):
            qmf_synthesize(np.zeros(100), np.zeros(99), qmf)


class TestQmfProperties:
    def test_roundtrip_snr_over_seeds(self, qmf):
        for seed in range(8):
            rng = np.random.default_rng(seed)
            x = rng.standard_normal(10 * qmf.num_taps)
            y = roundtrip(x, qmf)
            d = qmf_delay(qmf)
            assert snr_db(x[: len(x) - d], y[d:] - x[: len(x) - d]) >= 50.0

    def test_linearity(self, qmf):
        rng = np.random.default_rng(5)
        x, y = rng.standard_normal((2, 2000))
        a, b = 0.7, -1.3
        lo_mix, hi_mix = qmf_analyze(a * x + b * y, qmf)
        lo_x, hi_x = qmf_analyze(x, qmf)
        lo_y, hi_y = qmf_analyze(y, qmf)
        assert np.sqrt(np.mean((lo_mix - a * lo_x - b * lo_y) ** 2)) < 1e-9
        assert np.sqrt(np.mean((hi_mix - a * hi_x - b * hi_y) ** 2)) < 1e-9

    def test_shift_covariance(self, qmf):
        rng = np.random.default_rng(6)
        x = rng.standard_normal(2000)
        lo, hi = qmf_analyze(x, qmf)
        lo2, hi2 = qmf_analyze(np.concatenate([[0.0, 0.0], x[:-2]]), qmf)
        np.testing.assert_allclose(lo2[1:900], lo[:899], atol=1e-12)
        np.testing.assert_allclose(hi2[1:900], hi[:899], atol=1e-12)

    def test_unflip_is_involutive_and_moves_content(self, qmf):
        t = np.arange(64000)
        x = np.sin(2 * np.pi * 9000.0 / 32000.0 * t)  # 9 kHz -> flipped to 7 kHz
        _, hi = qmf_analyze(x, qmf)
        hi_u = unflip_high_band(hi)
        np.testing.assert_array_equal(unflip_high_band(hi_u), hi)
        spectrum = np.abs(np.fft.rfft(hi_u[1000:9192]))
        peak_hz = np.argmax(spectrum) * 16000.0 / 8192
        assert abs(peak_hz - 1000.0) < 50.0  # 9 kHz - 8 kHz offset


class TestPqmf:
    def test_zeros(self, pqmf):
        bands = pqmf_analyze(np.zeros(4096), pqmf)
        assert bands.shape == (4, 1024)
        assert not bands.any()

    def test_tone_lands_in_band0(self, pqmf):
        t = np.arange(32000)
        x = np.sin(2 * np.pi * 1000.0 / 16000.0 * t)
        bands = pqmf_analyze(x, pqmf)
        energies = np.sum(bands ** 2, axis=1)  # oracle: per-band energy
        assert energies[0] / energies.sum() >= 0.95

    def test_white_noise_band_energies_flat(self, pqmf):
        rng = np.random.default_rng(2)
        bands = pqmf_analyze(rng.standard_normal(64000), pqmf)
        db = 10 * np.log10(np.mean(bands ** 2, axis=1))
        assert db.max() - db.min() <= 1.0

    def test_band_centered_tone_leakage(self, pqmf):
        t = np.arange(32000)
        for band, freq in enumerate([1000.0, 3000.0, 5000.0, 7000.0]):
            bands = pqmf_analyze(np.sin(2 * np.pi * freq / 16000.0 * t), pqmf)
            energies = np.sum(bands ** 2, axis=1)
            leak = 1.0 - energies[band] / energies.sum()
            assert 10 * np.log10(leak) <= -30.0

    def test_reconstruction_snr(self, pqmf):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(32000)
        y = pqmf_synthesize(pqmf_analyze(x, pqmf), pqmf)
        assert snr_db(x, y - x) >= 40.0

    def test_indivisible_length_rejected(self, pqmf):
        with pytest.raises(ValueError):
            pqmf_analyze(np.zeros(4097), pqmf)
