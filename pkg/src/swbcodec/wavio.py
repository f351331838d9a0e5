"""Strict mono PCM16 WAV reading and writing (stdlib `wave` backend)."""

import wave

import numpy as np

__all__ = ["UnsupportedWavError", "read_wav_mono16", "write_wav_mono16"]


class UnsupportedWavError(ValueError):
    """WAV file is not mono 16-bit PCM at a supported rate."""


def read_wav_mono16(path) -> tuple[np.ndarray, int]:
    """Read a mono PCM16 WAV; returns (float64 samples in [-1, 1], rate)."""
    try:
        with wave.open(str(path), "rb") as w:
            channels = w.getnchannels()
            width = w.getsampwidth()
            rate = w.getframerate()
            frames = w.readframes(w.getnframes())
    except wave.Error as exc:
        raise UnsupportedWavError(f"{path}: {exc}") from exc
    if channels != 1:
        raise UnsupportedWavError(f"{path}: {channels} channels, need mono")
    if width != 2:
        raise UnsupportedWavError(f"{path}: {8 * width}-bit samples, need 16-bit PCM")
    samples = np.frombuffer(frames, dtype="<i2").astype(np.float64) / 32768.0
    return samples, rate


def write_wav_mono16(path, samples: np.ndarray, sample_rate: int) -> None:
    pcm = np.clip(np.asarray(samples, dtype=np.float64), -1.0, 1.0)
    pcm = np.round(pcm * 32767.0).astype("<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(sample_rate)
        w.writeframes(pcm.tobytes())
