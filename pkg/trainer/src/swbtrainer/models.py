"""Torch modules built from the canonical layer listings.

`GraphModule` instantiates one torch layer per LayerDef, so layer indices
line up one-to-one with the exported weight blobs. A codec generator is
encoder -> straight-through scalar quantizer -> decoder; the discriminator
is a bank of six spectrogram patch networks sharing one layer recipe.
"""

import torch
import torch.nn.functional as F
from torch import nn

from .graphspec import (DISC_SCALES, LayerDef, decoder_layers,
                        discriminator_layers, encoder_layers, fingerprint)


class CausalConv1d(nn.Module):
    def __init__(self, spec: LayerDef):
        super().__init__()
        self.pad = (spec.kernel - 1) * spec.dilation
        self.conv = nn.Conv1d(spec.in_channels, spec.out_channels, spec.kernel,
                              dilation=spec.dilation, groups=spec.groups)

    def forward(self, x):
        return self.conv(F.pad(x, (self.pad, 0)))


class ResidualUnit(nn.Module):
    def __init__(self, spec: LayerDef):
        super().__init__()
        ch = spec.in_channels
        self.dw = CausalConv1d(LayerDef("conv1d", ch, ch, spec.kernel,
                                        dilation=spec.dilation, groups=spec.groups))
        self.pw = nn.Conv1d(ch, ch, 1)

    def forward(self, x):
        return x + self.pw(F.elu(self.dw(F.elu(x))))


def _build_layer(spec: LayerDef) -> nn.Module:
    if spec.kind == "conv1d":
        return CausalConv1d(spec)
    if spec.kind == "conv2d":
        return nn.Conv2d(spec.in_channels, spec.out_channels, spec.kernel,
                         stride=spec.rate, padding=spec.kernel // 2)
    if spec.kind == "residual":
        return ResidualUnit(spec)
    if spec.kind == "avgpool":
        return nn.AvgPool1d(spec.rate)
    if spec.kind == "repeat":
        return _Repeat(spec.rate)
    if spec.kind == "tanh":
        return nn.Tanh()
    if spec.kind == "elu":
        return nn.ELU()
    raise ValueError(f"unknown layer kind {spec.kind}")


class _Repeat(nn.Module):
    def __init__(self, rate: int):
        super().__init__()
        self.rate = rate

    def forward(self, x):
        return torch.repeat_interleave(x, self.rate, dim=-1)


class GraphModule(nn.Module):
    """Sequential graph with tap collection at declared layer indices."""

    def __init__(self, layers: list[LayerDef], tap_points: list[int]):
        super().__init__()
        self.layer_defs = layers
        self.tap_points = tuple(tap_points)
        self.stages = nn.ModuleList(_build_layer(s) for s in layers)

    @property
    def fingerprint(self) -> int:
        return fingerprint(self.layer_defs)

    def forward(self, x, collect_taps: bool = True):
        taps = []
        for i, stage in enumerate(self.stages):
            x = stage(x)
            if collect_taps and i in self.tap_points:
                taps.append(x)
        return x, taps


class ScalarQuantizer(nn.Module):
    """Uniform mid-rise quantizer on (-1, 1) with a straight-through
    gradient (identity through the rounding)."""

    def __init__(self, bits: int = 3):
        super().__init__()
        self.bits = bits
        n = 1 << bits
        self.step = 2.0 / n
        levels = -1.0 + (torch.arange(n, dtype=torch.float64) + 0.5) * self.step
        self.register_buffer("levels", levels)

    def indices(self, x):
        n = 1 << self.bits
        return torch.clamp(((x + 1.0) / self.step).floor(), 0, n - 1).long()

    def forward(self, x):
        q = self.levels.to(x.dtype)[self.indices(x)]
        return x + (q - x).detach()


class CodecGenerator(nn.Module):
    """Encoder -> STE quantizer -> decoder; returns waveform and the
    distillation taps (encoder taps then decoder taps)."""

    def __init__(self, embed_dim: int = 40, units_per_block: int = 3,
                 bits: int = 3):
        super().__init__()
        enc_layers, enc_taps = encoder_layers(embed_dim, units_per_block)
        dec_layers, dec_taps = decoder_layers(embed_dim, units_per_block)
        self.encoder = GraphModule(enc_layers, enc_taps)
        self.decoder = GraphModule(dec_layers, dec_taps)
        self.quantizer = ScalarQuantizer(bits)

    def forward(self, x):
        embedding, enc_taps = self.encoder(x)
        quantized = self.quantizer(embedding)
        out, dec_taps = self.decoder(quantized)
        return out, enc_taps + dec_taps


class Discriminator(nn.Module):
    """Six-scale STFT patch discriminator.

    Per scale: magnitude spectrum at `fft` points (hop fft/4, periodic
    Hann, no centering), channels (magnitude, log magnitude floored at
    1e-7), then the shared 7-layer conv stack.
    """

    def __init__(self, scales: tuple[int, ...] = DISC_SCALES):
        super().__init__()
        self.scales = scales
        layers, taps = discriminator_layers()
        self.banks = nn.ModuleList(GraphModule(layers, taps) for _ in scales)

    def features(self, x):
        """x: (batch, samples) -> per-scale 2-channel spectrogram stacks."""
        feats = []
        for fft in self.scales:
            window = torch.hann_window(fft, periodic=True, dtype=x.dtype,
                                       device=x.device)
            spec = torch.stft(x, n_fft=fft, hop_length=fft // 4, win_length=fft,
                              window=window, center=False, onesided=True,
                              return_complex=True).abs()
            feats.append(torch.stack([spec, torch.log(spec.clamp_min(1e-7))], dim=1))
        return feats

    def forward(self, x):
        patches, taps = [], []
        for bank, feat in zip(self.banks, self.features(x)):
            out, bank_taps = bank(feat)
            patches.append(out)
            taps.append(bank_taps)
        return patches, taps
