"""Deterministic forward-pass graphs and the binary weight format.

Minimal inference-only layer set: causal 1-D convolution, grouped dilated
residual units, average-pool downsampling, repeat upsampling, tanh, ELU,
and strided 2-D convolution for the spectrogram discriminators. Everything
runs in float32 and is a pure function of (weights, input).

Weight file format ("PGWT", little-endian):

    magic       4 bytes  b"PGWT"
    version     u16      currently 1
    fingerprint u64      architecture fingerprint (see `fingerprint`)
    layer_count u32
    per layer:
        index       u32
        byte_length u64
        blob        float32[byte_length / 4]

Per-layer blob layouts (C-order flattening):
    conv1d:   weight (out, in // groups, kernel) then bias (out,)
    conv2d:   weight (out, in, kernel, kernel) then bias (out,)
    residual: depthwise-grouped conv weight (ch, ch // groups, kernel),
              its bias (ch,), then pointwise weight (ch, ch, 1), bias (ch,)
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "WeightsError",
    "BadMagicError",
    "UnsupportedVersionError",
    "TruncatedWeightsError",
    "FingerprintMismatchError",
    "LayerSpec",
    "ModelArchitecture",
    "ModelWeights",
    "conv1d_causal",
    "conv2d",
    "grouped_residual_unit",
    "avgpool_down",
    "repeat_upsample",
    "elu",
    "fingerprint",
    "param_count",
    "forward",
    "encoder_architecture",
    "decoder_architecture",
    "teacher_encoder_architecture",
    "teacher_decoder_architecture",
    "init_random_weights",
    "save_weights",
    "load_weights",
]

WEIGHTS_MAGIC = b"PGWT"
WEIGHTS_VERSION = 1

RESIDUAL_GROUPS = 4
RESIDUAL_DILATIONS = (1, 3, 9)
DOWNSAMPLE_RATES = (2, 4, 4, 5)
FIRST_CHANNELS = 16
FRAME_SAMPLES = 320  # 2 * 2 * 4 * 4 * 5


class WeightsError(Exception):
    """Base class for weight-file problems."""


class BadMagicError(WeightsError):
    pass


class UnsupportedVersionError(WeightsError):
    pass


class TruncatedWeightsError(WeightsError):
    pass


class FingerprintMismatchError(WeightsError):
    pass


@dataclass(frozen=True)
class LayerSpec:
    kind: str                 # conv1d | conv2d | residual | avgpool | repeat | tanh | elu
    in_channels: int = 0
    out_channels: int = 0
    kernel: int = 0
    rate: int = 1             # stride (conv2d, avgpool) or repeat factor
    dilation: int = 1
    groups: int = 1

    def __post_init__(self):
        if self.kind in ("conv1d", "conv2d", "residual") and self.groups > 0:
            if self.in_channels % self.groups or self.out_channels % self.groups:
                raise ValueError(
                    f"{self.kind}: channels ({self.in_channels}->{self.out_channels}) "
                    f"not divisible by groups={self.groups}")
        if self.kind == "residual":
            if self.in_channels != self.out_channels:
                raise ValueError("residual unit requires in_channels == out_channels")
            if self.dilation not in RESIDUAL_DILATIONS:
                raise ValueError(f"residual dilation must be one of {RESIDUAL_DILATIONS}")


def param_count(spec: LayerSpec) -> int:
    """Number of float32 parameters in the layer's blob (0 if none)."""
    if spec.kind == "conv1d":
        return spec.out_channels * (spec.in_channels // spec.groups) * spec.kernel + spec.out_channels
    if spec.kind == "conv2d":
        return spec.out_channels * spec.in_channels * spec.kernel ** 2 + spec.out_channels
    if spec.kind == "residual":
        ch = spec.in_channels
        return (ch * (ch // spec.groups) * spec.kernel + ch) + (ch * ch + ch)
    return 0


@dataclass(frozen=True)
class ModelArchitecture:
    name: str
    layers: tuple[LayerSpec, ...]
    tap_points: tuple[int, ...] = ()

    def __post_init__(self):
        prev = None
        for i, spec in enumerate(self.layers):
            if spec.kind in ("conv1d", "conv2d", "residual"):
                if prev is not None and spec.in_channels != prev:
                    raise ValueError(
                        f"{self.name} layer {i}: in_channels {spec.in_channels} "
                        f"does not chain from previous {prev}")
                prev = spec.out_channels

    @property
    def fingerprint(self) -> int:
        return fingerprint(self.layers)


def fingerprint(layers: tuple[LayerSpec, ...]) -> int:
    """64-bit architecture fingerprint: sha256 of the canonical layer list.

    Canonical form, one layer per line:
    ``kind,in_channels,out_channels,kernel,rate,dilation,groups``; the hash
    is the first 8 bytes of the digest as a little-endian unsigned int.
    """
    canonical = "\n".join(
        f"{s.kind},{s.in_channels},{s.out_channels},{s.kernel},{s.rate},{s.dilation},{s.groups}"
        for s in layers)
    digest = hashlib.sha256(canonical.encode("ascii")).digest()
    return int.from_bytes(digest[:8], "little")


@dataclass
class ModelWeights:
    fingerprint: int
    blobs: dict[int, np.ndarray] = field(default_factory=dict)
    format_version: int = WEIGHTS_VERSION


# ---------------------------------------------------------------- layer ops

def conv1d_causal(x: np.ndarray, weight: np.ndarray, bias: np.ndarray,
                  dilation: int = 1, groups: int = 1) -> np.ndarray:
    """Causal 1-D convolution; output length equals input length.

    x: (in_channels, T); weight: (out_channels, in_channels // groups, k).
    Left-pads by (k - 1) * dilation so output[t] sees only input[<= t].
    """
    c_in, t = x.shape
    c_out, c_in_g, k = weight.shape
    if c_in != c_in_g * groups:
        raise ValueError(f"channel mismatch: input {c_in}, weight expects {c_in_g * groups}")
    pad = (k - 1) * dilation
    xp = np.zeros((c_in, t + pad), dtype=np.float32)
    xp[:, pad:] = x
    out = np.empty((c_out, t), dtype=np.float32)
    g_in, g_out = c_in // groups, c_out // groups
    for g in range(groups):
        xg = xp[g * g_in:(g + 1) * g_in]
        cols = np.empty((g_in * k, t), dtype=np.float32)
        for j in range(k):
            cols[j::k] = xg[:, j * dilation: j * dilation + t]
        wg = weight[g * g_out:(g + 1) * g_out].reshape(g_out, g_in * k)
        out[g * g_out:(g + 1) * g_out] = wg @ cols
    out += bias[:, None]
    return out


def conv2d(x: np.ndarray, weight: np.ndarray, bias: np.ndarray,
           stride: int = 1) -> np.ndarray:
    """3x3-padded strided 2-D convolution over (channels, freq, time).

    Output spatial dims are ceil(dim / stride).
    """
    c_in, f, t = x.shape
    c_out, c_in_w, kh, kw = weight.shape
    if c_in != c_in_w:
        raise ValueError(f"channel mismatch: input {c_in}, weight expects {c_in_w}")
    ph, pw = kh // 2, kw // 2
    xp = np.pad(x, ((0, 0), (ph, ph), (pw, pw))).astype(np.float32, copy=False)
    win = np.lib.stride_tricks.sliding_window_view(xp, (kh, kw), axis=(1, 2))
    win = win[:, ::stride, ::stride]
    fo, to = win.shape[1], win.shape[2]
    cols = np.ascontiguousarray(win.transpose(0, 3, 4, 1, 2)).reshape(
        c_in * kh * kw, fo * to)
    out = (weight.reshape(c_out, c_in * kh * kw) @ cols).reshape(c_out, fo, to)
    return out + bias[:, None, None]


def elu(x: np.ndarray) -> np.ndarray:
    out = x.astype(np.float32, copy=True)
    neg = out < 0
    out[neg] = np.expm1(out[neg])
    return out


def grouped_residual_unit(x: np.ndarray, dw_weight: np.ndarray, dw_bias: np.ndarray,
                          pw_weight: np.ndarray, pw_bias: np.ndarray,
                          dilation: int, groups: int = RESIDUAL_GROUPS) -> np.ndarray:
    """x + pointwise(elu(grouped_dilated(elu(x)))); time length preserved."""
    h = conv1d_causal(elu(x), dw_weight, dw_bias, dilation=dilation, groups=groups)
    h = conv1d_causal(elu(h), pw_weight, pw_bias)
    return x + h


def avgpool_down(x: np.ndarray, rate: int) -> np.ndarray:
    """Mean over non-overlapping windows of `rate` steps, per channel.

    Accumulates in float64 so that pooling exactly inverts
    :func:`repeat_upsample` (constant windows average to the constant).
    """
    c, t = x.shape
    if rate < 1:
        raise ValueError("rate must be >= 1")
    if t % rate != 0:
        raise ValueError(f"time length {t} not divisible by rate {rate}")
    return x.reshape(c, t // rate, rate).mean(axis=2, dtype=np.float64).astype(np.float32)


def repeat_upsample(x: np.ndarray, rate: int) -> np.ndarray:
    """Duplicate every time step `rate` times."""
    if rate < 1:
        raise ValueError("rate must be >= 1")
    return np.repeat(x, rate, axis=1)


# ---------------------------------------------------------------- forward

def _split_residual_blob(spec: LayerSpec, blob: np.ndarray):
    ch, g, k = spec.in_channels, spec.groups, spec.kernel
    n_dw = ch * (ch // g) * k
    dw_w = blob[:n_dw].reshape(ch, ch // g, k)
    dw_b = blob[n_dw:n_dw + ch]
    n_pw = ch * ch
    pw_w = blob[n_dw + ch:n_dw + ch + n_pw].reshape(ch, ch, 1)
    pw_b = blob[n_dw + ch + n_pw:]
    return dw_w, dw_b, pw_w, pw_b


def forward(model: ModelArchitecture, weights: ModelWeights,
            x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    """Run the graph; returns (output, tap outputs in tap_points order).

    Deterministic: identical (weights, input) give bit-identical outputs.
    """
    if weights.fingerprint != model.fingerprint:
        raise FingerprintMismatchError(
            f"weights fingerprint {weights.fingerprint:#018x} does not match "
            f"architecture '{model.name}' ({model.fingerprint:#018x})")
    x = np.asarray(x, dtype=np.float32)
    taps: dict[int, np.ndarray] = {}
    for i, spec in enumerate(model.layers):
        if spec.kind == "conv1d":
            blob = weights.blobs[i]
            n_w = spec.out_channels * (spec.in_channels // spec.groups) * spec.kernel
            w = blob[:n_w].reshape(spec.out_channels, spec.in_channels // spec.groups,
                                   spec.kernel)
            x = conv1d_causal(x, w, blob[n_w:], dilation=spec.dilation,
                              groups=spec.groups)
        elif spec.kind == "conv2d":
            blob = weights.blobs[i]
            n_w = spec.out_channels * spec.in_channels * spec.kernel ** 2
            w = blob[:n_w].reshape(spec.out_channels, spec.in_channels,
                                   spec.kernel, spec.kernel)
            x = conv2d(x, w, blob[n_w:], stride=spec.rate)
        elif spec.kind == "residual":
            x = grouped_residual_unit(x, *_split_residual_blob(spec, weights.blobs[i]),
                                      dilation=spec.dilation, groups=spec.groups)
        elif spec.kind == "avgpool":
            x = avgpool_down(x, spec.rate)
        elif spec.kind == "repeat":
            x = repeat_upsample(x, spec.rate)
        elif spec.kind == "tanh":
            x = np.tanh(x)
        elif spec.kind == "elu":
            x = elu(x)
        else:
            raise ValueError(f"unknown layer kind '{spec.kind}'")
        if i in model.tap_points:
            taps[i] = x
    return x, [taps[i] for i in model.tap_points]


# ---------------------------------------------------------------- graphs

def _conv(cin, cout, kernel=3, dilation=1, groups=1):
    return LayerSpec("conv1d", cin, cout, kernel, 1, dilation, groups)


def _residuals(ch, count=3):
    dil = RESIDUAL_DILATIONS * ((count + 2) // 3)
    return [LayerSpec("residual", ch, ch, 3, 1, dil[i], RESIDUAL_GROUPS)
            for i in range(count)]


def encoder_architecture(embed_dim: int = 40, units_per_block: int = 3,
                         name: str = "encoder") -> ModelArchitecture:
    """Waveform (1, 320F) -> embeddings (embed_dim, F) in (-1, 1).

    First conv -> pre-processing block (conv + pool 2) -> four downsampling
    blocks (channel-doubling conv, grouped residual units at dilations
    1/3/9, average pool at rates 2/4/4/5) -> projection conv -> tanh.
    Total downsampling factor 320.
    """
    layers: list[LayerSpec] = [_conv(1, FIRST_CHANNELS)]
    taps: list[int] = []
    layers.append(_conv(FIRST_CHANNELS, FIRST_CHANNELS))
    layers.append(LayerSpec("avgpool", rate=2))
    taps.append(len(layers) - 1)
    ch = FIRST_CHANNELS
    for rate in DOWNSAMPLE_RATES:
        layers.append(_conv(ch, ch * 2))
        ch *= 2
        layers.extend(_residuals(ch, units_per_block))
        layers.append(LayerSpec("avgpool", rate=rate))
        taps.append(len(layers) - 1)
    layers.append(_conv(ch, embed_dim))
    layers.append(LayerSpec("tanh"))
    taps.append(len(layers) - 1)
    return ModelArchitecture(name=name, layers=tuple(layers), tap_points=tuple(taps))


def decoder_architecture(embed_dim: int = 40, units_per_block: int = 3,
                         name: str = "decoder") -> ModelArchitecture:
    """Embeddings (embed_dim, F) -> waveform (1, 320F); mirror of the encoder
    with repeat upsampling at rates 5/4/4/2/2."""
    ch = FIRST_CHANNELS * 2 ** len(DOWNSAMPLE_RATES)
    layers: list[LayerSpec] = [_conv(embed_dim, ch)]
    taps: list[int] = []
    for rate in reversed(DOWNSAMPLE_RATES):
        layers.append(LayerSpec("repeat", rate=rate))
        layers.extend(_residuals(ch, units_per_block))
        layers.append(_conv(ch, ch // 2))
        ch //= 2
        taps.append(len(layers) - 1)
    layers.append(LayerSpec("repeat", rate=2))
    layers.append(_conv(ch, ch))
    taps.append(len(layers) - 1)
    layers.append(_conv(ch, 1))
    taps.append(len(layers) - 1)
    return ModelArchitecture(name=name, layers=tuple(layers), tap_points=tuple(taps))


def teacher_encoder_architecture(embed_dim: int = 40) -> ModelArchitecture:
    """Deeper-not-wider encoder: 6 residual units per block, same block
    boundary shapes as the student (distillation tap congruence)."""
    return encoder_architecture(embed_dim, units_per_block=6, name="teacher_encoder")


def teacher_decoder_architecture(embed_dim: int = 40) -> ModelArchitecture:
    return decoder_architecture(embed_dim, units_per_block=6, name="teacher_decoder")


# ---------------------------------------------------------------- weights io

def init_random_weights(model: ModelArchitecture, seed: int = 0) -> ModelWeights:
    """Seeded 1/sqrt(fan_in)-scaled normal weights, zero biases."""
    rng = np.random.default_rng(seed)
    blobs: dict[int, np.ndarray] = {}
    for i, spec in enumerate(model.layers):
        n = param_count(spec)
        if n == 0:
            continue
        if spec.kind == "conv1d":
            fan_in = (spec.in_channels // spec.groups) * spec.kernel
            n_w = spec.out_channels * fan_in
            blob = np.zeros(n, dtype=np.float32)
            blob[:n_w] = rng.standard_normal(n_w) / np.sqrt(fan_in)
        elif spec.kind == "conv2d":
            fan_in = spec.in_channels * spec.kernel ** 2
            n_w = spec.out_channels * fan_in
            blob = np.zeros(n, dtype=np.float32)
            blob[:n_w] = rng.standard_normal(n_w) / np.sqrt(fan_in)
        else:  # residual
            ch, g, k = spec.in_channels, spec.groups, spec.kernel
            n_dw = ch * (ch // g) * k
            n_pw = ch * ch
            blob = np.zeros(n, dtype=np.float32)
            blob[:n_dw] = rng.standard_normal(n_dw) / np.sqrt((ch // g) * k)
            blob[n_dw + ch:n_dw + ch + n_pw] = rng.standard_normal(n_pw) / np.sqrt(ch)
        blobs[i] = blob.astype(np.float32)
    return ModelWeights(fingerprint=model.fingerprint, blobs=blobs)


def validate_weights(model: ModelArchitecture, weights: ModelWeights) -> None:
    """Check fingerprint and per-layer blob sizes against the architecture."""
    if weights.fingerprint != model.fingerprint:
        raise FingerprintMismatchError(
            f"fingerprint {weights.fingerprint:#018x} does not match "
            f"'{model.name}' ({model.fingerprint:#018x})")
    for i, spec in enumerate(model.layers):
        expect = param_count(spec)
        got = len(weights.blobs.get(i, ())) if expect else 0
        if expect and got != expect:
            raise FingerprintMismatchError(
                f"layer {i} ({spec.kind}): blob has {got} params, expected {expect}")


def save_weights(weights: ModelWeights, path) -> None:
    with open(path, "wb") as f:
        f.write(WEIGHTS_MAGIC)
        f.write(struct.pack("<HQI", weights.format_version, weights.fingerprint,
                            len(weights.blobs)))
        for index in sorted(weights.blobs):
            blob = np.ascontiguousarray(weights.blobs[index], dtype="<f4")
            f.write(struct.pack("<IQ", index, blob.nbytes))
            f.write(blob.tobytes())


def load_weights(path) -> ModelWeights:
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < 4 or data[:4] != WEIGHTS_MAGIC:
        raise BadMagicError(f"{path}: not a PGWT weights file")
    if len(data) < 18:
        raise TruncatedWeightsError(f"{path}: truncated header")
    version, fp, count = struct.unpack_from("<HQI", data, 4)
    if version != WEIGHTS_VERSION:
        raise UnsupportedVersionError(f"{path}: unsupported version {version}")
    blobs: dict[int, np.ndarray] = {}
    offset = 18
    for _ in range(count):
        if offset + 12 > len(data):
            raise TruncatedWeightsError(f"{path}: truncated layer header")
        index, nbytes = struct.unpack_from("<IQ", data, offset)
        offset += 12
        if nbytes % 4 or offset + nbytes > len(data):
            raise TruncatedWeightsError(f"{path}: truncated blob for layer {index}")
        blobs[index] = np.frombuffer(data[offset:offset + nbytes], dtype="<f4").copy()
        offset += nbytes
    return ModelWeights(fingerprint=fp, blobs=blobs, format_version=version)
