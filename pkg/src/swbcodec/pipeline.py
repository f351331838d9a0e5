"""Full encode/decode pipelines tying the subsystems together.

Super-wideband path (32 kHz in/out):

    encode: QMF split -> neural encode (low) + envelope encode (high,
            flip undone) -> 20-byte frames
    decode: neural decode -> pitch postfilter -> envelope decode (high
            regenerated from the decoded wideband) -> QMF merge

Wideband path (16 kHz): neural codec + postfilter only, 15-byte frames.

Inputs are zero-padded to whole 20 ms frames; the pad count is recorded
in the stream header so decoding returns exactly the original duration
(the QMF round-trip delay is absorbed into the padding in SWB mode).
"""

import os
from dataclasses import dataclass

import numpy as np

from . import bitstream, net
from .bwe import BweConfig, bwe_decode, bwe_encode
from .filterbank import (design_qmf_prototype, qmf_analyze, qmf_delay,
                         qmf_synthesize, unflip_high_band)
from .postfilter import Postfilter, PostfilterConfig
from .wideband import FRAME_SAMPLES, SqConfig, wbnc_decode, wbnc_encode

__all__ = [
    "CodecWeights",
    "load_codec_weights",
    "generate_codec_weights",
    "save_codec_weights",
    "encode_signal",
    "decode_stream",
    "align_signals",
]

ENCODER_FILE = "encoder.pgwt"
DECODER_FILE = "decoder.pgwt"

_QMF = design_qmf_prototype()
_SQ = SqConfig()


@dataclass
class CodecWeights:
    encoder: net.ModelWeights
    decoder: net.ModelWeights

    def __post_init__(self):
        self.encoder_arch = net.encoder_architecture(_SQ.dims)
        self.decoder_arch = net.decoder_architecture(_SQ.dims)
        net.validate_weights(self.encoder_arch, self.encoder)
        net.validate_weights(self.decoder_arch, self.decoder)


def load_codec_weights(directory) -> CodecWeights:
    """Load encoder.pgwt / decoder.pgwt from a directory."""
    enc_arch = net.encoder_architecture(_SQ.dims)
    dec_arch = net.decoder_architecture(_SQ.dims)
    paths = {
        "encoder": (os.path.join(directory, ENCODER_FILE), enc_arch),
        "decoder": (os.path.join(directory, DECODER_FILE), dec_arch),
    }
    loaded = {}
    for role, (path, arch) in paths.items():
        if not os.path.exists(path):
            raise net.WeightsError(
                f"missing {path} (expected fingerprint {arch.fingerprint:#018x})")
        loaded[role] = net.load_weights(path)
    return CodecWeights(encoder=loaded["encoder"], decoder=loaded["decoder"])


def generate_codec_weights(seed: int = 0) -> CodecWeights:
    """Seeded random weights (untrained; for tests, demos and benchmarks)."""
    return CodecWeights(
        encoder=net.init_random_weights(net.encoder_architecture(_SQ.dims), seed),
        decoder=net.init_random_weights(net.decoder_architecture(_SQ.dims), seed + 1))


def save_codec_weights(weights: CodecWeights, directory) -> None:
    os.makedirs(directory, exist_ok=True)
    net.save_weights(weights.encoder, os.path.join(directory, ENCODER_FILE))
    net.save_weights(weights.decoder, os.path.join(directory, DECODER_FILE))


def _pad_for_mode(num_samples: int, mode: int) -> int:
    block = 2 * FRAME_SAMPLES if mode == bitstream.MODE_SWB else FRAME_SAMPLES
    return (-num_samples) % block


def encode_signal(x: np.ndarray, weights: CodecWeights, mode: int,
                  input_rate: int) -> tuple[bitstream.StreamHeader, list[bytes]]:
    """Encode audio to stream payload frames.

    SWB mode takes 32 kHz input; WB mode takes 16 kHz input or, for
    32 kHz input, encodes the QMF low band.
    """
    x = np.asarray(x, dtype=np.float64)
    if mode == bitstream.MODE_WB and input_rate == 32000:
        if len(x) % 2:
            x = np.concatenate([x, [0.0]])
        x, _ = qmf_analyze(x, _QMF)
        input_rate = 16000
    if mode == bitstream.MODE_SWB and input_rate != 32000:
        raise ValueError("SWB mode requires 32 kHz input")
    if mode == bitstream.MODE_WB and input_rate != 16000:
        raise ValueError("WB mode requires 16 kHz input")

    pad = _pad_for_mode(len(x), mode)
    x = np.concatenate([x, np.zeros(pad)])
    header = bitstream.StreamHeader(mode=mode, sample_rate=input_rate, padding=pad)
    if len(x) == 0:
        return header, []

    if mode == bitstream.MODE_SWB:
        low, high = qmf_analyze(x, _QMF)
        q_frames = wbnc_encode(low, weights.encoder, weights.encoder_arch, _SQ)
        params = bwe_encode(unflip_high_band(high))
        payloads = [bitstream.pack_frame(q, p, mode)
                    for q, p in zip(q_frames, params)]
    else:
        q_frames = wbnc_encode(x, weights.encoder, weights.encoder_arch, _SQ)
        payloads = [bitstream.pack_frame(q, None, mode) for q in q_frames]
    return header, payloads


def decode_stream(header: bitstream.StreamHeader, payloads: list[bytes],
                  weights: CodecWeights, postfilter: bool = True,
                  ) -> tuple[np.ndarray, int]:
    """Decode payload frames to audio; returns (samples, sample_rate)."""
    frames, params = [], []
    for payload in payloads:
        q, p = bitstream.unpack_frame(payload, header.mode)
        frames.append(q)
        params.append(p)
    if not frames:
        return np.zeros(0), header.sample_rate

    wb = wbnc_decode(frames, weights.decoder, weights.decoder_arch, _SQ)
    if postfilter:
        wb = Postfilter(PostfilterConfig()).process(wb)
    if header.mode == bitstream.MODE_WB:
        out = wb[: len(wb) - header.padding] if header.padding else wb
        return out, header.sample_rate

    high = bwe_decode(params, wb)
    merged = qmf_synthesize(wb, high, _QMF)
    # compensate the filterbank delay; the tail samples that would need
    # band content beyond the stream are a zero-filled fade-out
    delay = qmf_delay(_QMF)
    merged = np.concatenate([merged, np.zeros(delay)])
    out_len = len(merged) - delay - header.padding
    return merged[delay: delay + out_len], header.sample_rate


def align_signals(ref: np.ndarray, deg: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Trim two signals to their best cross-correlation alignment."""
    ref = np.asarray(ref, dtype=np.float64)
    deg = np.asarray(deg, dtype=np.float64)
    from scipy.signal import correlate
    corr = correlate(deg, ref, mode="full")
    shift = int(np.argmax(np.abs(corr))) - (len(ref) - 1)
    if shift >= 0:
        deg = deg[shift:]
    else:
        ref = ref[-shift:]
    n = min(len(ref), len(deg))
    return ref[:n], deg[:n]
