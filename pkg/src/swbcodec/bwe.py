"""MDCT-domain high-band envelope codec (2 kbps bandwidth extension).

Per 20 ms frame the encoder transmits 40 bits: an 8-bit global log-gain
plus eight 4-bit per-subband log-RMS offsets. The decoder regenerates the
high band by replicating the 4-8 kHz MDCT coefficients of the *decoded*
wideband signal and rescaling each subband to the transmitted envelope, so
encoder and decoder agree without extra side information.

Inputs to :func:`bwe_encode` are the QMF high band with the spectral flip
already undone (see :func:`swbcodec.filterbank.unflip_high_band`);
:func:`bwe_decode` re-applies the flip before returning, so its output
feeds :func:`swbcodec.filterbank.qmf_synthesize` directly.
"""

from dataclasses import dataclass

import numpy as np

from .filterbank import unflip_high_band
from .transforms import imdct, mdct

__all__ = [
    "BweConfig",
    "BweParams",
    "quantize_gain",
    "dequantize_gain",
    "quantize_envelope",
    "dequantize_envelope",
    "bwe_encode",
    "bwe_decode",
]

_RMS_FLOOR_DB = -240.0


@dataclass(frozen=True)
class BweConfig:
    num_subbands: int = 8
    mdct_half_window: int = 320
    gain_min_db: float = -60.0
    gain_max_db: float = 20.0
    gain_steps: int = 256
    envelope_min_db: float = -45.0
    envelope_step_db: float = 3.0
    envelope_steps: int = 16

    @property
    def gain_step_db(self) -> float:
        return (self.gain_max_db - self.gain_min_db) / (self.gain_steps - 1)

    @property
    def subband_width(self) -> int:
        if self.mdct_half_window % self.num_subbands != 0:
            raise ValueError("subbands must evenly partition the MDCT coefficients")
        return self.mdct_half_window // self.num_subbands

    @property
    def payload_bits(self) -> int:
        return 8 + 4 * self.num_subbands


@dataclass(frozen=True)
class BweParams:
    global_gain_index: int
    envelope_indices: np.ndarray  # (num_subbands,) uint8, 4-bit values

    def __post_init__(self):
        object.__setattr__(self, "envelope_indices",
                           np.asarray(self.envelope_indices, dtype=np.uint8))


def quantize_gain(rms: float, cfg: BweConfig = BweConfig()) -> int:
    db = 20.0 * np.log10(max(float(rms), 10.0 ** (_RMS_FLOOR_DB / 20.0)))
    idx = round((db - cfg.gain_min_db) / cfg.gain_step_db)
    return int(np.clip(idx, 0, cfg.gain_steps - 1))


def dequantize_gain(index: int, cfg: BweConfig = BweConfig()) -> float:
    if not 0 <= index < cfg.gain_steps:
        raise ValueError(f"gain index {index} out of range")
    return 10.0 ** ((cfg.gain_min_db + index * cfg.gain_step_db) / 20.0)


def quantize_envelope(relative_db: float, cfg: BweConfig = BweConfig()) -> int:
    idx = round((relative_db - cfg.envelope_min_db) / cfg.envelope_step_db)
    return int(np.clip(idx, 0, cfg.envelope_steps - 1))


def dequantize_envelope(index: int, cfg: BweConfig = BweConfig()) -> float:
    """Relative subband gain (linear) for a 4-bit envelope index."""
    if not 0 <= index < cfg.envelope_steps:
        raise ValueError(f"envelope index {index} out of range")
    return 10.0 ** ((cfg.envelope_min_db + index * cfg.envelope_step_db) / 20.0)


def _frame_coeffs(x: np.ndarray, cfg: BweConfig) -> np.ndarray:
    """One MDCT frame per 20 ms: analyze with one trailing zero frame so m*N
    samples give exactly m coefficient frames."""
    n = cfg.mdct_half_window
    return mdct(np.concatenate([x, np.zeros(n)]), n)


def bwe_encode(high_band: np.ndarray, cfg: BweConfig = BweConfig()) -> list[BweParams]:
    """Measure and quantize the high band's spectral envelope per frame."""
    high_band = np.asarray(high_band, dtype=np.float64)
    n = cfg.mdct_half_window
    if high_band.ndim != 1 or len(high_band) % n != 0:
        raise ValueError(f"input length {len(high_band)} not a multiple of {n}")
    coeffs = _frame_coeffs(high_band, cfg)
    width = cfg.subband_width
    params = []
    for frame in coeffs:
        global_rms = np.sqrt(np.mean(frame ** 2))
        gain_idx = quantize_gain(global_rms, cfg)
        # envelope relative to the true frame RMS (clamped at the grid
        # floor), so scaling the input moves only the gain index
        global_db = max(20.0 * np.log10(max(global_rms, 1e-12)), cfg.gain_min_db)
        sub_rms = np.sqrt(np.mean(frame.reshape(cfg.num_subbands, width) ** 2, axis=1))
        rel_db = 20.0 * np.log10(np.maximum(sub_rms, 1e-12)) - global_db
        env = np.array([quantize_envelope(d, cfg) for d in rel_db], dtype=np.uint8)
        params.append(BweParams(global_gain_index=gain_idx, envelope_indices=env))
    return params


def bwe_decode(params: list[BweParams], decoded_wb: np.ndarray,
               cfg: BweConfig = BweConfig()) -> np.ndarray:
    """Regenerate the high band from the decoded wideband and the envelope.

    The 4-8 kHz half of each wideband MDCT frame is tiled across the
    high-band coefficients and rescaled per subband; frames whose
    replication source is silent get envelope-shaped noise instead.
    """
    decoded_wb = np.asarray(decoded_wb, dtype=np.float64)
    n = cfg.mdct_half_window
    if len(decoded_wb) != n * len(params):
        raise ValueError(
            f"wideband length {len(decoded_wb)} != {n} * {len(params)} frames")
    if not params:
        return np.zeros(0)
    wb_coeffs = _frame_coeffs(decoded_wb, cfg)
    width = cfg.subband_width
    high = np.zeros_like(wb_coeffs)
    for f, p in enumerate(params):
        gain = dequantize_gain(p.global_gain_index, cfg)
        source = np.tile(wb_coeffs[f, n // 2:], 2).reshape(cfg.num_subbands, width)
        for j in range(cfg.num_subbands):
            target = gain * dequantize_envelope(int(p.envelope_indices[j]), cfg)
            src_rms = np.sqrt(np.mean(source[j] ** 2))
            if src_rms < 1e-10:
                noise = np.random.default_rng(f * cfg.num_subbands + j).standard_normal(width)
                source_j = noise / np.sqrt(np.mean(noise ** 2))
            else:
                source_j = source[j] / src_rms
            high[f, j * width:(j + 1) * width] = source_j * target
    out = imdct(high, n)[: n * len(params)]
    return unflip_high_band(out)
