"""Long-term (pitch) postfilter for the decoded wideband signal.

A first-order comb y[n] = (x[n] + g * x[n - lag]) / (1 + g) attenuates
energy between pitch harmonics; |H(w)| <= 1 everywhere, so each frame's
output is renormalized to the input frame energy afterwards. Frames whose
voicing falls below the threshold pass through untouched, and lag switches
are cross-faded to avoid clicks.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PostfilterConfig",
    "PitchEstimate",
    "estimate_pitch",
    "apply_postfilter",
    "comb_frequency_response",
    "Postfilter",
]


@dataclass(frozen=True)
class PostfilterConfig:
    lag_min: int = 32
    lag_max: int = 320
    comb_gain: float = 0.25
    voicing_threshold: float = 0.4
    frame_samples: int = 320
    crossfade_samples: int = 32

    def __post_init__(self):
        if not 0.0 <= self.comb_gain < 1.0:
            raise ValueError("comb gain must be in [0, 1)")
        if self.lag_max <= self.lag_min or self.lag_min < 1:
            raise ValueError("bad lag range")

    @property
    def window_samples(self) -> int:
        # analysis window: current frame plus one frame of history
        return 2 * self.frame_samples


@dataclass(frozen=True)
class PitchEstimate:
    lag: int          # 0 is the unvoiced sentinel
    voicing: float    # normalized autocorrelation at the lag

    @property
    def voiced(self) -> bool:
        return self.lag > 0


def estimate_pitch(window: np.ndarray, cfg: PostfilterConfig = PostfilterConfig()) -> PitchEstimate:
    """Pitch of the final ``lag_max`` samples of an analysis window.

    The window must hold at least 2 * lag_max samples so every candidate
    lag has full support. Returns the sentinel (lag 0, voicing 0) for
    silent or sub-threshold-energy windows.
    """
    w = np.asarray(window, dtype=np.float64)
    if w.ndim != 1 or len(w) < 2 * cfg.lag_max:
        raise ValueError(f"window must hold >= {2 * cfg.lag_max} samples, got {len(w)}")
    target = w[len(w) - cfg.lag_max:]
    t_energy = np.dot(target, target)
    if t_energy < 1e-12:
        return PitchEstimate(lag=0, voicing=0.0)
    best_lag, best_r = 0, -np.inf
    for lag in range(cfg.lag_min, cfg.lag_max + 1):
        past = w[len(w) - cfg.lag_max - lag: len(w) - lag]
        p_energy = np.dot(past, past)
        if p_energy < 1e-12:
            continue
        r = np.dot(target, past) / np.sqrt(t_energy * p_energy)
        if r > best_r:
            best_lag, best_r = lag, r
    if not np.isfinite(best_r):
        return PitchEstimate(lag=0, voicing=0.0)
    return PitchEstimate(lag=best_lag, voicing=float(best_r))


def comb_frequency_response(lag: int, comb_gain: float,
                            omega: np.ndarray) -> np.ndarray:
    """|H(e^jw)| of the normalized comb; peaks at 1 on the harmonics."""
    return np.abs(1.0 + comb_gain * np.exp(-1j * np.asarray(omega) * lag)) / (1.0 + comb_gain)


def apply_postfilter(x: np.ndarray, pitch: PitchEstimate,
                     cfg: PostfilterConfig = PostfilterConfig(),
                     history: np.ndarray | None = None) -> np.ndarray:
    """Comb-filter one block with the given pitch; bypass when unvoiced.

    `history` supplies the samples before x[0] for the delayed tap
    (zeros when omitted). Output block energy is renormalized to the
    input's, so the filter only reshapes the spectrum.
    """
    x = np.asarray(x, dtype=np.float64)
    if not pitch.voiced or pitch.voicing < cfg.voicing_threshold:
        return x
    g = cfg.comb_gain
    pad = cfg.lag_max
    if history is None:
        history = np.zeros(pad)
    ext = np.concatenate([history[len(history) - pad:], x])
    delayed = ext[pad - pitch.lag: pad - pitch.lag + len(x)]
    y = (x + g * delayed) / (1.0 + g)
    e_in, e_out = np.dot(x, x), np.dot(y, y)
    if e_out > 1e-20:
        y *= np.sqrt(e_in / e_out)
    return y


class Postfilter:
    """Frame-sequential postfilter with lag-switch cross-fading.

    Holds per-stream state (one frame of history, the previous lag and
    energy gain); one instance per stream. Lag switches cross-fade over
    `crossfade_samples`, and the per-frame energy-renormalization gain is
    ramped across each frame so frame boundaries stay continuous.
    `process` accepts any multiple of the frame size.
    """

    def __init__(self, cfg: PostfilterConfig = PostfilterConfig()):
        self.cfg = cfg
        self._history = np.zeros(cfg.window_samples)
        self._prev_pitch = PitchEstimate(lag=0, voicing=0.0)
        self._prev_gain = 1.0

    def process(self, x: np.ndarray) -> np.ndarray:
        cfg = self.cfg
        x = np.asarray(x, dtype=np.float64)
        if len(x) % cfg.frame_samples != 0:
            raise ValueError(f"input length {len(x)} not a multiple of "
                             f"{cfg.frame_samples}")
        out = np.empty_like(x)
        n = cfg.frame_samples
        for start in range(0, len(x), n):
            frame = x[start:start + n]
            window = np.concatenate([self._history, frame])[-cfg.window_samples:]
            pitch = estimate_pitch(window, cfg)
            hist = self._history
            y = self._comb(frame, pitch, hist)
            if self._effective_lag(pitch) != self._effective_lag(self._prev_pitch):
                y_prev = self._comb(frame, self._prev_pitch, hist)
                k = min(cfg.crossfade_samples, n)
                ramp = np.arange(k) / k  # starts at 0: no step at the boundary
                y[:k] = (1.0 - ramp) * y_prev[:k] + ramp * y[:k]
            e_in, e_out = np.dot(frame, frame), np.dot(y, y)
            gain = np.sqrt(e_in / e_out) if e_out > 1e-20 else 1.0
            y *= np.linspace(self._prev_gain, gain, n + 1)[1:]
            out[start:start + n] = y
            self._history = np.concatenate([self._history, frame])[-cfg.window_samples:]
            self._prev_pitch = pitch
            self._prev_gain = gain
        return out

    def _comb(self, frame: np.ndarray, pitch: PitchEstimate,
              history: np.ndarray) -> np.ndarray:
        cfg = self.cfg
        if not pitch.voiced or pitch.voicing < cfg.voicing_threshold:
            return frame.copy()
        ext = np.concatenate([history[len(history) - cfg.lag_max:], frame])
        delayed = ext[cfg.lag_max - pitch.lag: cfg.lag_max - pitch.lag + len(frame)]
        return (frame + cfg.comb_gain * delayed) / (1.0 + cfg.comb_gain)

    def _effective_lag(self, pitch: PitchEstimate) -> int:
        if pitch.voiced and pitch.voicing >= self.cfg.voicing_threshold:
            return pitch.lag
        return 0
