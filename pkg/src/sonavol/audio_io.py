"""Mono 16-bit PCM WAV reading and writing."""

from __future__ import annotations

import wave

import numpy as np

__all__ = ["read_wav", "write_wav"]


def write_wav(path, samples, sample_rate: int = 48000) -> None:
    """Write `samples` (clipped to [-1, 1]) as a mono PCM-16 WAV file."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1 or x.size == 0:
        raise ValueError("samples must be a nonempty 1-D array")
    pcm = np.round(np.clip(x, -1.0, 1.0) * 32767.0).astype("<i2")
    with wave.open(str(path), "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(int(sample_rate))
        w.writeframes(pcm.tobytes())


def read_wav(path) -> tuple[np.ndarray, float]:
    """Read a mono PCM-16 WAV file; returns (samples in [-1, 1), sample_rate)."""
    with wave.open(str(path), "rb") as w:
        if w.getnchannels() != 1:
            raise ValueError(f"{path}: expected mono audio, got {w.getnchannels()} channels")
        if w.getsampwidth() != 2:
            raise ValueError(f"{path}: expected 16-bit PCM, got {8 * w.getsampwidth()}-bit")
        rate = float(w.getframerate())
        raw = w.readframes(w.getnframes())
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    return samples, rate
