import numpy as np
import pytest

from swbcodec import net
from swbcodec.wideband import (FRAME_SAMPLES, CorruptFrameError, QuantizedFrame,
                               SqConfig, sq_dequantize, sq_levels, sq_quantize,
                               wbnc_decode, wbnc_encode)

# oracle: the eight 3-bit mid-rise levels, enumerated by hand from
# -1 + (i + 0.5) * 2/8
LEVELS_3BIT = [-0.875, -0.625, -0.375, -0.125, 0.125, 0.375, 0.625, 0.875]


class TestSqLevels:
    def test_enumeration(self):
        np.testing.assert_allclose(sq_levels(3), LEVELS_3BIT, atol=1e-12)

    def test_symmetric_and_increasing(self):
        levels = sq_levels(3)
        np.testing.assert_allclose(levels, -levels[::-1], atol=1e-12)
        assert np.all(np.diff(levels) > 0)

    def test_bitrate_identity(self):
        cfg = SqConfig()
        assert 50 * cfg.dims * cfg.bits_per_dim == 6000


class TestSqQuantize:
    def _frame(self, value):
        return np.full(40, value)

    def test_minus_one_maps_to_index0(self):
        q = sq_quantize(self._frame(-1.0))
        assert np.all(q.indices == 0)
        np.testing.assert_allclose(sq_dequantize(q), self._frame(-0.875))

    def test_09_maps_to_index7(self):
        q = sq_quantize(self._frame(0.9))
        assert np.all(q.indices == 7)
        np.testing.assert_allclose(sq_dequantize(q), self._frame(0.875))

    def test_half_step_bound(self):
        rng = np.random.default_rng(0)
        v = rng.uniform(-1, 1, size=40)
        err = sq_dequantize(sq_quantize(v)) - v
        assert np.max(np.abs(err)) <= 0.125 + 1e-12

    def test_monotone(self):
        grid = np.linspace(-1, 1, 2001)
        idx = [int(sq_quantize(np.full(40, v)).indices[0]) for v in grid]
        assert all(a <= b for a, b in zip(idx, idx[1:]))

    def test_tie_breaks_to_lower_index(self):
        q = sq_quantize(self._frame(-0.75))  # exact cell midpoint
        assert np.all(q.indices == 0)

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            sq_quantize(self._frame(1.5))


class TestSqDequantize:
    def test_index0(self):
        q = QuantizedFrame(indices=np.zeros(40, dtype=np.uint8))
        np.testing.assert_allclose(sq_dequantize(q), np.full(40, -0.875))

    def test_idempotent_on_indices(self):
        rng = np.random.default_rng(1)
        idx = rng.integers(0, 8, size=40).astype(np.uint8)
        q = QuantizedFrame(indices=idx)
        again = sq_quantize(sq_dequantize(q))
        np.testing.assert_array_equal(again.indices, idx)

    def test_middle_indices(self):
        lo = sq_dequantize(QuantizedFrame(indices=np.full(40, 3, dtype=np.uint8)))
        hi = sq_dequantize(QuantizedFrame(indices=np.full(40, 4, dtype=np.uint8)))
        np.testing.assert_allclose(lo, -0.125)
        np.testing.assert_allclose(hi, 0.125)

    def test_bad_index_rejected(self):
        q = QuantizedFrame(indices=np.full(40, 9, dtype=np.uint8))
        with pytest.raises(CorruptFrameError):
            sq_dequantize(q)


class TestWbncPath:
    def test_3200_samples_gives_10_frames(self, codec_weights):
        x = np.random.default_rng(2).standard_normal(3200) * 0.3
        frames = wbnc_encode(x, codec_weights.encoder, codec_weights.encoder_arch)
        assert len(frames) == 10

    def test_zero_signal_deterministic(self, codec_weights):
        a = wbnc_encode(np.zeros(1600), codec_weights.encoder, codec_weights.encoder_arch)
        b = wbnc_encode(np.zeros(1600), codec_weights.encoder, codec_weights.encoder_arch)
        for fa, fb in zip(a, b):
            np.testing.assert_array_equal(fa.indices, fb.indices)

    def test_prefix_property(self, codec_weights):
        rng = np.random.default_rng(3)
        x = rng.standard_normal(320 * 10) * 0.4
        full = wbnc_encode(x, codec_weights.encoder, codec_weights.encoder_arch)
        prefix = wbnc_encode(x[: 320 * 5], codec_weights.encoder,
                             codec_weights.encoder_arch)
        assert len(prefix) == 5
        for fa, fb in zip(prefix, full[:5]):
            np.testing.assert_array_equal(fa.indices, fb.indices)

    def test_bad_length_rejected(self, codec_weights):
        with pytest.raises(ValueError):
            wbnc_encode(np.zeros(100), codec_weights.encoder,
                        codec_weights.encoder_arch)

    def test_decode_shape_and_range(self, codec_weights):
        rng = np.random.default_rng(4)
        frames = [QuantizedFrame(indices=rng.integers(0, 8, 40).astype(np.uint8))
                  for _ in range(7)]
        out = wbnc_decode(frames, codec_weights.decoder, codec_weights.decoder_arch)
        assert out.shape == (7 * FRAME_SAMPLES,)
        assert np.all(np.abs(out) <= 1.0)

    def test_decode_deterministic(self, codec_weights):
        rng = np.random.default_rng(5)
        frames = [QuantizedFrame(indices=rng.integers(0, 8, 40).astype(np.uint8))
                  for _ in range(3)]
        a = wbnc_decode(frames, codec_weights.decoder, codec_weights.decoder_arch)
        b = wbnc_decode(frames, codec_weights.decoder, codec_weights.decoder_arch)
        np.testing.assert_array_equal(a, b)

    def test_decode_empty_rejected(self, codec_weights):
        with pytest.raises(ValueError):
            wbnc_decode([], codec_weights.decoder, codec_weights.decoder_arch)

    def test_one_frame_latency(self, codec_weights):
        # perturbing input sample t only affects decoded output from the
        # start of t's frame onward (one-frame algorithmic latency)
        rng = np.random.default_rng(6)
        x = rng.standard_normal(320 * 6) * 0.3
        base = wbnc_decode(wbnc_encode(x, codec_weights.encoder,
                                       codec_weights.encoder_arch),
                           codec_weights.decoder, codec_weights.decoder_arch)
        t = 320 * 3 + 100
        x2 = x.copy()
        x2[t] += 0.5
        out = wbnc_decode(wbnc_encode(x2, codec_weights.encoder,
                                      codec_weights.encoder_arch),
                          codec_weights.decoder, codec_weights.decoder_arch)
        frame_start = (t // 320) * 320
        np.testing.assert_array_equal(out[:frame_start], base[:frame_start])
