"""Training objectives as deterministic, testable functions.

Conventions pinned here (and mirrored by the training harness):

- Spectral loss per resolution: mean |log X - log Xhat| over (frame, bin)
  plus ||X - Xhat||_F / ||Xhat||_F, magnitudes floored at 1e-7 before the
  log. Natural logarithm. The Frobenius denominator uses the *estimate*.
- Full-band resolutions 512/1024/2048; subband loss splits into 4 PQMF
  bands and uses 128/256/512 per band. Hann window, hop = fft / 4.
- Valley loss: sum over the full-band resolutions of the mean over
  (frame, bin) of M * S^p * |S - Shat|, with S the reference magnitude
  floored at 1e-5 before the p-power and M the VAD mask aligned to each
  resolution's frame grid.
- Adversarial and feature-match values are averaged per scale first, then
  across the 6 discriminator scales.
- Distillation distance sums per-tap means over taps (not averaged).
"""

import hashlib
from dataclasses import dataclass

import numpy as np

from . import net
from .filterbank import design_pqmf_prototype, pqmf_analyze
from .transforms import erb_matrix, erb_spectra, stft_config, stft_magnitude

__all__ = [
    "LossWeights",
    "LossComponents",
    "PoisonedLossError",
    "DiscriminatorSpec",
    "FULL_BAND_FFTS",
    "SUBBAND_FFTS",
    "mrstft_loss",
    "subband_mrstft_loss",
    "vad_mask",
    "align_mask",
    "pm_loss",
    "pm_loss_terms",
    "discriminator_architecture",
    "discriminator_forward",
    "adversarial_losses",
    "feature_match_loss",
    "total_generator_loss",
    "kd_loss",
    "pair_hash",
    "parity_pairs",
    "parse_goldens",
]

FULL_BAND_FFTS = (512, 1024, 2048)
SUBBAND_FFTS = (128, 256, 512)
LOG_FLOOR = 1e-7
VALLEY_FLOOR = 1e-5

VAD_FFT = 512
VAD_FLOOR_WINDOW_S = 0.5
VAD_MARGIN_DB = 10.0
VAD_CEILING_DB = -35.0
_VAD_POWER_FLOOR = 1e-10


class PoisonedLossError(ValueError):
    """A loss component is NaN or infinite; the message names it."""


@dataclass(frozen=True)
class LossWeights:
    perceptual: float = 2.0      # lambda_pe
    adversarial: float = 1.0     # lambda_adv
    feature_match: float = 20.0  # lambda_f
    kd_generator: float = 30.0   # lambda_G
    kd_discriminator: float = 10.0  # lambda_D
    valley_p: float = -0.5

    def __post_init__(self):
        if self.valley_p >= 0:
            raise ValueError("valley compression exponent must be negative")


@dataclass(frozen=True)
class LossComponents:
    full_band: float
    subband: float
    perceptual: float
    adversarial: float
    feature_match: float


def _eq1_terms(ref_mag: np.ndarray, est_mag: np.ndarray) -> float:
    log_term = np.mean(np.abs(np.log(np.maximum(ref_mag, LOG_FLOOR))
                              - np.log(np.maximum(est_mag, LOG_FLOOR))))
    denom = np.linalg.norm(est_mag)
    sc_term = 0.0 if denom < 1e-300 else np.linalg.norm(ref_mag - est_mag) / denom
    return float(log_term + sc_term)


def mrstft_loss(ref: np.ndarray, est: np.ndarray,
                fft_sizes: tuple[int, ...] = FULL_BAND_FFTS) -> float:
    """Multi-resolution log-magnitude L1 + spectral convergence."""
    ref = np.asarray(ref, dtype=np.float64)
    est = np.asarray(est, dtype=np.float64)
    if ref.shape != est.shape:
        raise ValueError(f"length mismatch: {ref.shape} vs {est.shape}")
    total = 0.0
    for fft in fft_sizes:
        cfg = stft_config(fft)
        total += _eq1_terms(stft_magnitude(ref, cfg), stft_magnitude(est, cfg))
    return total


_PQMF = design_pqmf_prototype(num_bands=4)


def subband_mrstft_loss(ref: np.ndarray, est: np.ndarray) -> float:
    """Sum of the spectral loss over 4 PQMF subbands (quarter-rate FFTs)."""
    ref = np.asarray(ref, dtype=np.float64)
    est = np.asarray(est, dtype=np.float64)
    if ref.shape != est.shape:
        raise ValueError(f"length mismatch: {ref.shape} vs {est.shape}")
    trim = len(ref) - len(ref) % _PQMF.num_bands
    ref_bands = pqmf_analyze(ref[:trim], _PQMF)
    est_bands = pqmf_analyze(est[:trim], _PQMF)
    total = 0.0
    for k in range(_PQMF.num_bands):
        total += mrstft_loss(ref_bands[k], est_bands[k], SUBBAND_FFTS)
    return total


def vad_mask(ref: np.ndarray, sample_rate: int = 16000) -> np.ndarray:
    """Binary voice-activity mask on the FFT-512 frame grid.

    A frame is active when its power exceeds the noise floor by 10 dB;
    the floor is the running minimum of frame power over the trailing
    0.5 s, capped at -35 dBFS so sustained loud content stays active.
    """
    ref = np.asarray(ref, dtype=np.float64)
    cfg = stft_config(VAD_FFT)
    if len(ref) < cfg.fft_size:
        return np.zeros(0, dtype=np.int8)
    frames = (len(ref) - cfg.fft_size) // cfg.hop_size + 1
    idx = np.arange(cfg.fft_size)[None, :] + cfg.hop_size * np.arange(frames)[:, None]
    power_db = 10.0 * np.log10(np.maximum((ref[idx] ** 2).mean(axis=1),
                                          _VAD_POWER_FLOOR))
    window = max(1, round(VAD_FLOOR_WINDOW_S * sample_rate / cfg.hop_size))
    mask = np.zeros(frames, dtype=np.int8)
    for t in range(frames):
        floor = min(VAD_CEILING_DB, power_db[max(0, t - window + 1): t + 1].min())
        mask[t] = 1 if power_db[t] > floor + VAD_MARGIN_DB else 0
    return mask


def align_mask(mask: np.ndarray, target_cfg, num_frames: int) -> np.ndarray:
    """Map the FFT-512-grid mask to another resolution's frame grid by
    nearest frame center."""
    if len(mask) == 0:
        return np.zeros(num_frames, dtype=np.int8)
    src = stft_config(VAD_FFT)
    centers = target_cfg.hop_size * np.arange(num_frames) + target_cfg.fft_size / 2
    src_idx = np.round((centers - src.fft_size / 2) / src.hop_size).astype(int)
    return mask[np.clip(src_idx, 0, len(mask) - 1)]


_ERB = erb_matrix(fft_size=1024, sample_rate=16000, num_bands=64)


def pm_loss_terms(ref: np.ndarray, est: np.ndarray,
                  weights: LossWeights = LossWeights()) -> tuple[float, float]:
    """(ERB spectral term, valley term) of the perceptual magnitude loss."""
    ref = np.asarray(ref, dtype=np.float64)
    est = np.asarray(est, dtype=np.float64)
    if ref.shape != est.shape:
        raise ValueError(f"length mismatch: {ref.shape} vs {est.shape}")
    cfg_erb = stft_config(1024)
    erb_ref = erb_spectra(stft_magnitude(ref, cfg_erb), _ERB)
    erb_est = erb_spectra(stft_magnitude(est, cfg_erb), _ERB)
    spec_term = _eq1_terms(erb_ref, erb_est)

    mask = vad_mask(ref)
    valley = 0.0
    for fft in FULL_BAND_FFTS:
        cfg = stft_config(fft)
        s_ref = stft_magnitude(ref, cfg)
        s_est = stft_magnitude(est, cfg)
        m = align_mask(mask, cfg, s_ref.shape[0]).astype(np.float64)
        weight = np.maximum(s_ref, VALLEY_FLOOR) ** weights.valley_p
        valley += float(np.mean(m[:, None] * weight * np.abs(s_ref - s_est)))
    return spec_term, valley


def pm_loss(ref: np.ndarray, est: np.ndarray,
            weights: LossWeights = LossWeights()) -> float:
    """Perceptual magnitude loss: critical-band energy term + valley term."""
    spec_term, valley = pm_loss_terms(ref, est, weights)
    return spec_term + valley


# ------------------------------------------------------------ discriminator

@dataclass(frozen=True)
class DiscriminatorSpec:
    """Six-scale spectrogram patch discriminator.

    Per scale: magnitude STFT at `fft` points (hop fft/4), input channels
    (magnitude, log magnitude floored at 1e-7), then 7 3x3 conv layers
    with strides 1/2/1/2/1/2/1 and channels 2-16-32-64-64-64-32-1, ELU
    between layers. Feature taps are the 7 conv outputs (post-activation
    for the first six, raw patch map for the last).
    """

    scales: tuple[int, ...] = (60, 120, 240, 480, 960, 1920)
    channels: tuple[int, ...] = (2, 16, 32, 64, 64, 64, 32, 1)
    strides: tuple[int, ...] = (1, 2, 1, 2, 1, 2, 1)
    kernel: int = 3

    @property
    def num_layers(self) -> int:
        return len(self.strides)


def discriminator_architecture(scale: int,
                               spec: DiscriminatorSpec = DiscriminatorSpec()) -> net.ModelArchitecture:
    layers: list[net.LayerSpec] = []
    taps: list[int] = []
    for i, stride in enumerate(spec.strides):
        layers.append(net.LayerSpec("conv2d", spec.channels[i], spec.channels[i + 1],
                                    spec.kernel, stride))
        last = i == spec.num_layers - 1
        if not last:
            layers.append(net.LayerSpec("elu"))
        taps.append(len(layers) - 1)
    return net.ModelArchitecture(name=f"discriminator_{scale}", layers=tuple(layers),
                                 tap_points=tuple(taps))


def discriminator_features(x: np.ndarray, weights: dict[int, net.ModelWeights],
                           spec: DiscriminatorSpec = DiscriminatorSpec(),
                           ) -> tuple[list[np.ndarray], list[list[np.ndarray]]]:
    """Forward all scales; returns (patch outputs, per-scale layer taps)."""
    x = np.asarray(x, dtype=np.float64)
    if len(x) < max(spec.scales):
        raise ValueError(f"input of {len(x)} samples shorter than the largest "
                         f"scale ({max(spec.scales)})")
    patches, taps = [], []
    for scale in spec.scales:
        mag = stft_magnitude(x, stft_config(scale)).T  # (bins, frames)
        features = np.stack([mag, np.log(np.maximum(mag, LOG_FLOOR))]).astype(np.float32)
        arch = discriminator_architecture(scale, spec)
        out, layer_taps = net.forward(arch, weights[scale], features)
        patches.append(out)
        taps.append(layer_taps)
    return patches, taps


def init_discriminator_weights(seed: int = 0,
                               spec: DiscriminatorSpec = DiscriminatorSpec()
                               ) -> dict[int, net.ModelWeights]:
    return {scale: net.init_random_weights(discriminator_architecture(scale, spec),
                                           seed=seed + i)
            for i, scale in enumerate(spec.scales)}


def adversarial_losses(patch_real: list[np.ndarray],
                       patch_fake: list[np.ndarray]) -> tuple[float, float]:
    """Least-squares GAN objectives (generator term, discriminator term)."""
    if len(patch_real) != len(patch_fake):
        raise ValueError("scale count mismatch")
    adv, disc = 0.0, 0.0
    for real, fake in zip(patch_real, patch_fake):
        if real.shape != fake.shape:
            raise ValueError(f"patch shape mismatch: {real.shape} vs {fake.shape}")
        adv += float(np.mean((1.0 - fake) ** 2))
        disc += float(np.mean((real - 1.0) ** 2) + np.mean(fake ** 2))
    return adv / len(patch_real), disc / len(patch_real)


def feature_match_loss(taps_real: list[list[np.ndarray]],
                       taps_fake: list[list[np.ndarray]]) -> float:
    """Mean over scales of the layer-averaged L1 feature distance."""
    if len(taps_real) != len(taps_fake):
        raise ValueError("scale count mismatch")
    total = 0.0
    for scale_real, scale_fake in zip(taps_real, taps_fake):
        if len(scale_real) != len(scale_fake):
            raise ValueError("layer count mismatch")
        layer_sum = 0.0
        for a, b in zip(scale_real, scale_fake):
            if a.shape != b.shape:
                raise ValueError(f"feature shape mismatch: {a.shape} vs {b.shape}")
            layer_sum += float(np.mean(np.abs(a.astype(np.float64) - b)))
        total += layer_sum / len(scale_real)
    return total / len(taps_real)


def total_generator_loss(components: LossComponents,
                         weights: LossWeights = LossWeights()) -> float:
    """Weighted sum of the generator objectives."""
    for name in ("full_band", "subband", "perceptual", "adversarial", "feature_match"):
        value = getattr(components, name)
        if not np.isfinite(value):
            raise PoisonedLossError(f"loss component '{name}' is {value}")
    return (components.full_band + components.subband
            + weights.perceptual * components.perceptual
            + weights.adversarial * components.adversarial
            + weights.feature_match * components.feature_match)


def kd_loss(teacher_gen: list[np.ndarray], student_gen: list[np.ndarray],
            teacher_disc: list[np.ndarray], student_disc: list[np.ndarray],
            weights: LossWeights = LossWeights()) -> float:
    """Distillation distance: summed per-tap mean L1, generator and
    discriminator branches weighted separately."""
    def branch(teacher, student, label):
        if len(teacher) != len(student):
            raise ValueError(f"{label}: {len(teacher)} vs {len(student)} taps")
        total = 0.0
        for i, (a, b) in enumerate(zip(teacher, student)):
            if a.shape != b.shape:
                raise ValueError(f"{label} tap {i}: shape {a.shape} vs {b.shape}")
            total += float(np.mean(np.abs(a.astype(np.float64) - b)))
        return total

    return (weights.kd_generator * branch(teacher_gen, student_gen, "generator")
            + weights.kd_discriminator * branch(teacher_disc, student_disc,
                                                "discriminator"))


# ------------------------------------------------------------ golden files

def pair_hash(ref: np.ndarray, est: np.ndarray) -> str:
    """Stable identifier of an audio pair: sha256 of both float32 buffers."""
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(ref, dtype="<f4").tobytes())
    h.update(np.ascontiguousarray(est, dtype="<f4").tobytes())
    return h.hexdigest()


def parity_pairs(count: int = 20, samples: int = 16000) -> list[tuple[np.ndarray, np.ndarray]]:
    """The canonical audio pairs for cross-implementation parity checks.

    Pair k: rng = default_rng(1000 + k); ref = 0.3 * normal(samples);
    est = ref + 0.1 * normal(samples); both clipped to [-1, 1], float32.
    """
    pairs = []
    for k in range(count):
        rng = np.random.default_rng(1000 + k)
        ref = np.clip(0.3 * rng.standard_normal(samples), -1, 1).astype(np.float32)
        est = np.clip(ref + 0.1 * rng.standard_normal(samples), -1, 1).astype(np.float32)
        pairs.append((ref, est))
    return pairs


def parse_goldens(text: str) -> list[tuple[str, str, float]]:
    """Parse golden lines of the form ``<pair-hash> <loss-name> <value>``."""
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        digest, name, value = line.split()
        rows.append((digest, name, float(value)))
    return rows
