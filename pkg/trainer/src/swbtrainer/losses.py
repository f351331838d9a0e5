"""Torch implementations of the training objectives.

Conventions match the inference library exactly (verified by golden
files): mean |log X - log Xhat| + ||X - Xhat||_F / ||Xhat||_F per
resolution with a 1e-7 log floor, full-band FFTs 512/1024/2048 and
subband FFTs 128/256/512 over 4 PQMF bands, ERB term on 64 bands at FFT
1024, valley term masked by the VAD and weighted by the reference
spectrum to the p power (floor 1e-5), per-scale means averaged over the
six discriminator scales, distillation as summed per-tap means.
"""

import numpy as np
import torch
import torch.nn.functional as F
from scipy.signal.windows import kaiser

FULL_BAND_FFTS = (512, 1024, 2048)
SUBBAND_FFTS = (128, 256, 512)
LOG_FLOOR = 1e-7
VALLEY_FLOOR = 1e-5
VALLEY_P = -0.5

LAMBDA_PE = 2.0
LAMBDA_ADV = 1.0
LAMBDA_FEAT = 20.0
LAMBDA_KD_GEN = 30.0
LAMBDA_KD_DISC = 10.0


def stft_mag(x: torch.Tensor, fft: int) -> torch.Tensor:
    """(batch, samples) -> (batch, frames, bins); periodic Hann, hop fft/4,
    no centering."""
    window = torch.hann_window(fft, periodic=True, dtype=x.dtype, device=x.device)
    spec = torch.stft(x, n_fft=fft, hop_length=fft // 4, win_length=fft,
                      window=window, center=False, onesided=True,
                      return_complex=True)
    return spec.abs().transpose(1, 2)


def _eq1_terms(ref_mag: torch.Tensor, est_mag: torch.Tensor) -> torch.Tensor:
    log_term = (ref_mag.clamp_min(LOG_FLOOR).log()
                - est_mag.clamp_min(LOG_FLOOR).log()).abs().mean()
    sc = torch.linalg.norm(ref_mag - est_mag) / torch.linalg.norm(est_mag).clamp_min(1e-30)
    return log_term + sc


def mrstft_loss(ref: torch.Tensor, est: torch.Tensor,
                fft_sizes=FULL_BAND_FFTS) -> torch.Tensor:
    total = ref.new_zeros(())
    for fft in fft_sizes:
        total = total + _eq1_terms(stft_mag(ref, fft), stft_mag(est, fft))
    return total


def design_pqmf_filters(subbands: int = 4, taps: int = 62, cutoff: float = 0.142,
                        beta: float = 9.0) -> np.ndarray:
    n = np.arange(taps + 1)
    with np.errstate(invalid="ignore"):
        proto = np.sin(np.pi * cutoff * (n - 0.5 * taps)) / (np.pi * (n - 0.5 * taps))
    proto[taps // 2] = cutoff
    proto = proto * kaiser(taps + 1, beta)
    analysis = np.zeros((subbands, taps + 1))
    for k in range(subbands):
        arg = (2 * k + 1) * (np.pi / (2 * subbands)) * (n - taps / 2)
        analysis[k] = 2 * proto * np.cos(arg + (-1) ** k * np.pi / 4)
    return analysis


_PQMF_BANDS = 4
_PQMF_FILTERS = torch.from_numpy(design_pqmf_filters(_PQMF_BANDS))


def pqmf_analyze(x: torch.Tensor) -> torch.Tensor:
    """(batch, samples) -> (batch, 4, samples // 4)."""
    filters = _PQMF_FILTERS.to(x.dtype).to(x.device).unsqueeze(1)
    pad = (filters.shape[-1] - 1) // 2
    return F.conv1d(F.pad(x.unsqueeze(1), (pad, pad)), filters, stride=_PQMF_BANDS)


def subband_mrstft_loss(ref: torch.Tensor, est: torch.Tensor) -> torch.Tensor:
    trim = ref.shape[-1] - ref.shape[-1] % _PQMF_BANDS
    ref_bands = pqmf_analyze(ref[..., :trim])
    est_bands = pqmf_analyze(est[..., :trim])
    total = ref.new_zeros(())
    for k in range(_PQMF_BANDS):
        total = total + mrstft_loss(ref_bands[:, k], est_bands[:, k], SUBBAND_FFTS)
    return total


def erb_rate(freq_hz):
    return 21.4 * np.log10(1.0 + 0.00437 * np.asarray(freq_hz, dtype=np.float64))


def erb_rate_inverse(rate):
    return (10.0 ** (np.asarray(rate, dtype=np.float64) / 21.4) - 1.0) / 0.00437


def erb_weight_matrix(fft_size: int = 1024, sample_rate: int = 16000,
                      num_bands: int = 64) -> np.ndarray:
    bins = fft_size // 2 + 1
    nyquist = sample_rate / 2.0
    centers_rate = np.linspace(erb_rate(30.0), erb_rate(0.95 * nyquist), num_bands)
    edges_rate = np.concatenate([[erb_rate(0.0)], centers_rate, [erb_rate(nyquist)]])
    bin_rate = erb_rate(np.arange(bins) * sample_rate / fft_size)
    weights = np.zeros((num_bands, bins))
    for b in range(num_bands):
        left, center, right = edges_rate[b], edges_rate[b + 1], edges_rate[b + 2]
        rising = (bin_rate - left) / max(center - left, 1e-12)
        falling = (right - bin_rate) / max(right - center, 1e-12)
        weights[b] = np.clip(np.minimum(rising, falling), 0.0, None)
        if weights[b].sum() <= 0.0:
            weights[b, np.argmin(np.abs(bin_rate - center))] = 1.0
    return weights / weights.sum(axis=1, keepdims=True)


_ERB = torch.from_numpy(erb_weight_matrix())


def vad_mask(ref: torch.Tensor, sample_rate: int = 16000) -> torch.Tensor:
    """Binary mask on the FFT-512 grid; running-minimum floor over 0.5 s
    capped at -35 dBFS, 10 dB margin. Not differentiated."""
    fft, hop = 512, 128
    x = ref.detach()
    frames = (x.shape[-1] - fft) // hop + 1
    idx = torch.arange(fft, device=x.device)[None, :] \
        + hop * torch.arange(frames, device=x.device)[:, None]
    power = (x[..., idx] ** 2).mean(dim=-1)
    power_db = 10.0 * torch.log10(power.clamp_min(1e-10))
    window = max(1, round(0.5 * sample_rate / hop))
    mask = torch.zeros_like(power_db)
    for t in range(frames):
        lo = max(0, t - window + 1)
        floor = torch.clamp(power_db[..., lo: t + 1].min(dim=-1).values, max=-35.0)
        mask[..., t] = (power_db[..., t] > floor + 10.0).to(mask.dtype)
    return mask


def _align_mask(mask: torch.Tensor, fft: int, num_frames: int) -> torch.Tensor:
    centers = (fft // 4) * torch.arange(num_frames, device=mask.device) + fft / 2
    src = torch.round((centers - 256) / 128).long().clamp(0, mask.shape[-1] - 1)
    return mask[..., src]


def pm_loss_terms(ref: torch.Tensor, est: torch.Tensor
                  ) -> tuple[torch.Tensor, torch.Tensor]:
    erb = _ERB.to(ref.dtype).to(ref.device)
    ref_e = ((stft_mag(ref, 1024) ** 2) @ erb.T).sqrt()
    est_e = ((stft_mag(est, 1024) ** 2) @ erb.T).sqrt()
    spec_term = _eq1_terms(ref_e, est_e)

    mask = vad_mask(ref)
    valley = ref.new_zeros(())
    for fft in FULL_BAND_FFTS:
        s_ref = stft_mag(ref, fft)
        s_est = stft_mag(est, fft)
        m = _align_mask(mask, fft, s_ref.shape[1])
        weight = s_ref.detach().clamp_min(VALLEY_FLOOR) ** VALLEY_P
        valley = valley + (m[..., None] * weight * (s_ref - s_est).abs()).mean()
    return spec_term, valley


def pm_loss(ref: torch.Tensor, est: torch.Tensor) -> torch.Tensor:
    spec_term, valley = pm_loss_terms(ref, est)
    return spec_term + valley


def adversarial_losses(patch_real, patch_fake):
    adv = patch_fake[0].new_zeros(())
    disc = patch_fake[0].new_zeros(())
    for real, fake in zip(patch_real, patch_fake):
        adv = adv + ((1.0 - fake) ** 2).mean()
        disc = disc + ((real - 1.0) ** 2).mean() + (fake ** 2).mean()
    return adv / len(patch_fake), disc / len(patch_fake)


def feature_match_loss(taps_real, taps_fake) -> torch.Tensor:
    total = taps_fake[0][0].new_zeros(())
    for scale_real, scale_fake in zip(taps_real, taps_fake):
        layer_sum = taps_fake[0][0].new_zeros(())
        for a, b in zip(scale_real, scale_fake):
            layer_sum = layer_sum + (a - b).abs().mean()
        total = total + layer_sum / len(scale_real)
    return total / len(taps_real)


def kd_distance(teacher_taps, student_taps) -> torch.Tensor:
    total = student_taps[0].new_zeros(())
    for a, b in zip(teacher_taps, student_taps):
        if a.shape != b.shape:
            raise ValueError(f"tap shape mismatch: {tuple(a.shape)} vs {tuple(b.shape)}")
    for a, b in zip(teacher_taps, student_taps):
        total = total + (a - b).abs().mean()
    return total


def kd_loss(teacher_gen, student_gen, teacher_disc, student_disc) -> torch.Tensor:
    gen = kd_distance(teacher_gen, student_gen) if teacher_gen else \
        student_gen[0].new_zeros(()) if student_gen else torch.zeros(())
    disc = kd_distance(teacher_disc, student_disc) if teacher_disc else \
        torch.zeros((), dtype=gen.dtype)
    return LAMBDA_KD_GEN * gen + LAMBDA_KD_DISC * disc
