"""Acceptance gates for the primary component.

Each test implements one release criterion at its stated tolerance and
prints a PASS line (run with `pytest -s tests/test_acceptance.py` to see
them). Everything here runs with seeded random weights; no trained model
is required.
"""

import io
import time

import numpy as np
import pytest

from swbcodec import bitstream as bs
from swbcodec import net
from swbcodec.bwe import bwe_decode, bwe_encode
from swbcodec.filterbank import (design_qmf_prototype, qmf_analyze, qmf_delay,
                                 qmf_synthesize, unflip_high_band)
from swbcodec.losses import (LossComponents, adversarial_losses, kd_loss,
                             mrstft_loss, total_generator_loss)
from swbcodec.pipeline import decode_stream, encode_signal
from swbcodec.postfilter import (PitchEstimate, PostfilterConfig, apply_postfilter,
                                 comb_frequency_response, estimate_pitch)
from swbcodec.synth import speech_like
from swbcodec.transforms import imdct, mdct, mdct_interior
from swbcodec.wideband import wbnc_decode, wbnc_encode


def passed(line: str) -> None:
    print(f"[PASS] {line}")


def test_qmf_roundtrip_snr_and_runtime(qmf):
    rng = np.random.default_rng(0)
    x = rng.standard_normal(320000)  # 10 s at 32 kHz
    t0 = time.perf_counter()
    low, high = qmf_analyze(x, qmf)
    y = qmf_synthesize(low, high, qmf)
    elapsed = time.perf_counter() - t0
    d = qmf_delay(qmf)
    err = y[d:] - x[: len(x) - d]
    snr = 10 * np.log10(np.mean(x[: len(x) - d] ** 2) / np.mean(err ** 2))
    assert snr >= 50.0
    assert elapsed < 1.0
    passed(f"QMF round trip: SNR {snr:.1f} dB >= 50 dB, runtime {elapsed*1e3:.0f} ms < 1 s")


def test_mdct_tdac_100_seeds():
    n = 320
    worst = 0.0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        x = rng.standard_normal(12 * n)
        coeffs = mdct(x, n)
        rec = imdct(coeffs, n)
        region = mdct_interior(coeffs.shape[0], n)
        rel = np.sqrt(np.mean((rec[region] - x[region]) ** 2)
                      / np.mean(x[region] ** 2))
        worst = max(worst, rel)
        assert rel <= 1e-6
    passed(f"MDCT TDAC: worst interior error {worst:.2e} <= 1e-6 over 100 seeds")


def test_rate_exactness(codec_weights):
    for seconds in (0.5, 1.0, 2.2):
        x32 = speech_like(seconds, 32000, seed=5)
        header, payloads = encode_signal(x32, codec_weights, bs.MODE_SWB, 32000)
        buf = io.BytesIO()
        bs.write_stream(header, payloads, buf)
        assert buf.tell() == 16 + 20 * len(payloads)
        x16 = speech_like(seconds, 16000, seed=6)
        header, payloads = encode_signal(x16, codec_weights, bs.MODE_WB, 16000)
        buf = io.BytesIO()
        bs.write_stream(header, payloads, buf)
        assert buf.tell() == 16 + 15 * len(payloads)
    assert bs.FRAME_BYTES[bs.MODE_SWB] * 8 * 50 == 8000
    assert bs.FRAME_BYTES[bs.MODE_WB] * 8 * 50 == 6000
    passed("rate exactness: SWB 16+20f bytes (8000 bps), WB 16+15f bytes (6000 bps)")


def test_bitstream_bijectivity_and_fuzz():
    rng = np.random.default_rng(1)
    n = 1_000_000
    idx = rng.integers(0, 8, (n, 40)).astype(np.uint8)
    gains = rng.integers(0, 256, n).astype(np.uint8)
    envs = rng.integers(0, 16, (n, 8)).astype(np.uint8)
    packed = bs.pack_frames(idx, gains, envs, bs.MODE_SWB)
    idx2, gains2, envs2 = bs.unpack_frames(packed, bs.MODE_SWB)
    assert np.array_equal(idx, idx2)
    assert np.array_equal(gains, gains2)
    assert np.array_equal(envs, envs2)
    # the batch path must agree with the reference single-frame ops
    from swbcodec.bwe import BweParams
    from swbcodec.wideband import QuantizedFrame
    for i in rng.integers(0, n, 2000):
        single = bs.pack_frame(QuantizedFrame(indices=idx[i]),
                               BweParams(int(gains[i]), envs[i]), bs.MODE_SWB)
        assert packed[i].tobytes() == single
        q, bwe = bs.unpack_frame(single, bs.MODE_SWB)
        assert np.array_equal(q.indices, idx[i])

    fuzz = rng.integers(0, 256, (100_000, 20)).astype(np.uint8)
    fi, fg, fe = bs.unpack_frames(fuzz, bs.MODE_SWB)
    assert np.all(fi < 8) and np.all(fe < 16)
    repacked = bs.pack_frames(fi, fg, fe, bs.MODE_SWB)
    assert np.array_equal(repacked, fuzz)
    for row in fuzz[:2000]:
        bs.unpack_frame(row.tobytes(), bs.MODE_SWB)  # never raises
    passed("bitstream: 1e6 frames pack/unpack bijective, 1e5 fuzz frames total")


def test_shape_and_causality_suite(codec_weights):
    enc_w, enc_a = codec_weights.encoder, codec_weights.encoder_arch
    dec_w, dec_a = codec_weights.decoder, codec_weights.decoder_arch
    rng = np.random.default_rng(2)

    x = rng.standard_normal(320 * 9) * 0.4
    frames = wbnc_encode(x, enc_w, enc_a)
    assert len(frames) == 9  # 320 samples per embedding
    out = wbnc_decode(frames, dec_w, dec_a)
    assert out.shape == (320 * 9,)

    prefix = wbnc_encode(x[: 320 * 4], enc_w, enc_a)
    for a, b in zip(prefix, frames[:4]):
        assert np.array_equal(a.indices, b.indices)

    again = wbnc_encode(x, enc_w, enc_a)
    for a, b in zip(again, frames):
        assert np.array_equal(a.indices, b.indices)

    emb_a, _ = net.forward(enc_a, enc_w, x[None, :].astype(np.float32))
    perturbed = x.copy()
    perturbed[320 * 6 + 11] += 0.3
    emb_b, _ = net.forward(enc_a, enc_w, perturbed[None, :].astype(np.float32))
    assert np.array_equal(emb_a[:, :6], emb_b[:, :6])
    passed("coder suite: 320-sample frame mapping, prefix property, determinism, causality")


def test_loss_analytic_values():
    rng = np.random.default_rng(3)
    x = rng.standard_normal(4096) * 0.3
    got = mrstft_loss(x, 2 * x)
    expect = 3 * (np.log(2.0) + 0.5)
    assert got == pytest.approx(expect, abs=1e-6)

    assert total_generator_loss(LossComponents(1, 1, 1, 1, 1)) == 25.0

    half = [np.full((1, 3, 5), 0.5) for _ in range(6)]
    ones = [np.ones((1, 3, 5)) for _ in range(6)]
    adv, _ = adversarial_losses(ones, half)
    assert adv == pytest.approx(0.25)

    taps = [rng.standard_normal((4, 7)) for _ in range(5)]
    disc = [rng.standard_normal((2, 3, 3)) for _ in range(7)]
    assert kd_loss(taps, list(taps), disc, list(disc)) == 0.0
    passed(f"loss analytics: mrstft(x,2x)={got:.6f} (3(ln2+.5)), Eq6(1,..)=25, "
           "L_adv(0.5)=0.25, KD(identical)=0")


def test_postfilter_gates():
    cfg = PostfilterConfig()
    omega = np.linspace(0, np.pi, 8192)
    for lag in range(cfg.lag_min, cfg.lag_max + 1, 7):
        assert np.all(comb_frequency_response(lag, cfg.comb_gain, omega) <= 1.0 + 1e-12)

    period = 160
    t = np.arange(2 * cfg.lag_max + 960)
    base = np.sin(2 * np.pi * t / period) + 0.3 * np.sin(6 * np.pi * t / period + 1.0)
    x = base[cfg.lag_max:]
    pitch = PitchEstimate(lag=period, voicing=0.99)
    y = apply_postfilter(x, pitch, cfg, history=base[: cfg.lag_max])
    assert np.max(np.abs(y - x)) <= 1e-6
    passed("postfilter: |H(w)| <= 1 across lag range; transparent on matched periodic input")


def test_bwe_energy_tracking_30s(qmf):
    x = speech_like(30.0, 32000, seed=42)
    x = np.concatenate([x, np.zeros((-len(x)) % 640)])
    low, high = qmf_analyze(x, qmf)
    high_u = unflip_high_band(high)
    params = bwe_encode(high_u)
    decoded_u = unflip_high_band(bwe_decode(params, low))

    n = 320
    voiced = tracked = 0
    for f in range(1, len(high_u) // n - 1):
        window = low[(f - 1) * n: (f + 1) * n]
        src_db = 10 * np.log10(np.mean(high_u[f * n:(f + 1) * n] ** 2) + 1e-12)
        pitch = estimate_pitch(window)
        if not (pitch.voiced and pitch.voicing >= 0.4) or src_db < -50:
            continue
        voiced += 1
        dec_db = 10 * np.log10(np.mean(decoded_u[f * n:(f + 1) * n] ** 2) + 1e-12)
        tracked += abs(dec_db - src_db) <= 3.0
    assert voiced >= 100
    ratio = tracked / voiced
    assert ratio >= 0.90
    passed(f"BWE energy tracking: {ratio:.1%} of {voiced} voiced frames within +-3 dB")


def test_rtf_gate(codec_weights):
    try:
        from threadpoolctl import threadpool_limits
        limits = threadpool_limits(limits=1)
    except ImportError:
        import contextlib
        limits = contextlib.nullcontext()
    x = speech_like(10.0, 32000, seed=7)
    with limits:
        t0 = time.perf_counter()
        header, payloads = encode_signal(x, codec_weights, bs.MODE_SWB, 32000)
        enc_rtf = (time.perf_counter() - t0) / 10.0
        t0 = time.perf_counter()
        decode_stream(header, payloads, codec_weights)
        dec_rtf = (time.perf_counter() - t0) / 10.0
    assert enc_rtf < 1.0
    assert dec_rtf < 1.0
    passed(f"RTF single-threaded: encoder {enc_rtf:.3f}, decoder {dec_rtf:.3f} (both < 1.0)")
