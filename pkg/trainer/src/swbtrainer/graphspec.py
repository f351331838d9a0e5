"""Canonical layer listings and the architecture fingerprint.

The weight-file contract identifies a graph by the sha256 of its
canonical layer listing (one `kind,in,out,kernel,rate,dilation,groups`
line per layer). These builders reproduce the codec graphs:

- encoder: conv(1->16,k3) -> pre-block (conv 16, pool 2) -> four blocks of
  (channel-doubling conv, grouped residual units at dilations 1/3/9,
  average pool at rates 2/4/4/5) -> conv(->embed) -> tanh
- decoder: the mirror with repeat upsampling at rates 5/4/4/2/2
- discriminator (per STFT scale): 7 3x3 conv2d layers, strides
  1/2/1/2/1/2/1, channels 2-16-32-64-64-64-32-1, ELU between

The teacher uses 6 residual units per block instead of 3; block-boundary
tensor shapes match the student's, which is what makes the distillation
taps congruent.
"""

import hashlib
from typing import NamedTuple

RESIDUAL_GROUPS = 4
RESIDUAL_DILATIONS = (1, 3, 9)
DOWNSAMPLE_RATES = (2, 4, 4, 5)
FIRST_CHANNELS = 16
FRAME_SAMPLES = 320

DISC_SCALES = (60, 120, 240, 480, 960, 1920)
DISC_CHANNELS = (2, 16, 32, 64, 64, 64, 32, 1)
DISC_STRIDES = (1, 2, 1, 2, 1, 2, 1)


class LayerDef(NamedTuple):
    kind: str
    in_channels: int = 0
    out_channels: int = 0
    kernel: int = 0
    rate: int = 1
    dilation: int = 1
    groups: int = 1


def fingerprint(layers: list[LayerDef]) -> int:
    canonical = "\n".join(
        f"{s.kind},{s.in_channels},{s.out_channels},{s.kernel},{s.rate},{s.dilation},{s.groups}"
        for s in layers)
    digest = hashlib.sha256(canonical.encode("ascii")).digest()
    return int.from_bytes(digest[:8], "little")


def _conv(cin, cout):
    return LayerDef("conv1d", cin, cout, 3)


def _residuals(ch, count):
    dil = RESIDUAL_DILATIONS * ((count + 2) // 3)
    return [LayerDef("residual", ch, ch, 3, 1, dil[i], RESIDUAL_GROUPS)
            for i in range(count)]


def encoder_layers(embed_dim: int = 40, units_per_block: int = 3
                   ) -> tuple[list[LayerDef], list[int]]:
    layers = [_conv(1, FIRST_CHANNELS), _conv(FIRST_CHANNELS, FIRST_CHANNELS),
              LayerDef("avgpool", rate=2)]
    taps = [len(layers) - 1]
    ch = FIRST_CHANNELS
    for rate in DOWNSAMPLE_RATES:
        layers.append(_conv(ch, ch * 2))
        ch *= 2
        layers.extend(_residuals(ch, units_per_block))
        layers.append(LayerDef("avgpool", rate=rate))
        taps.append(len(layers) - 1)
    layers.append(_conv(ch, embed_dim))
    layers.append(LayerDef("tanh"))
    taps.append(len(layers) - 1)
    return layers, taps


def decoder_layers(embed_dim: int = 40, units_per_block: int = 3
                   ) -> tuple[list[LayerDef], list[int]]:
    ch = FIRST_CHANNELS * 2 ** len(DOWNSAMPLE_RATES)
    layers = [_conv(embed_dim, ch)]
    taps = []
    for rate in reversed(DOWNSAMPLE_RATES):
        layers.append(LayerDef("repeat", rate=rate))
        layers.extend(_residuals(ch, units_per_block))
        layers.append(_conv(ch, ch // 2))
        ch //= 2
        taps.append(len(layers) - 1)
    layers.append(LayerDef("repeat", rate=2))
    layers.append(_conv(ch, ch))
    taps.append(len(layers) - 1)
    layers.append(_conv(ch, 1))
    taps.append(len(layers) - 1)
    return layers, taps


def discriminator_layers() -> tuple[list[LayerDef], list[int]]:
    layers: list[LayerDef] = []
    taps = []
    for i, stride in enumerate(DISC_STRIDES):
        layers.append(LayerDef("conv2d", DISC_CHANNELS[i], DISC_CHANNELS[i + 1],
                               3, stride))
        if i < len(DISC_STRIDES) - 1:
            layers.append(LayerDef("elu"))
        taps.append(len(layers) - 1)
    return layers, taps
