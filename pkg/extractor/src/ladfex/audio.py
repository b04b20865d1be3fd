"""WAV reading via the standard library (PCM 16-bit, mono)."""

from __future__ import annotations

import wave

import numpy as np


def read_wav(path: str):
    """Return (waveform float32 in [-1, 1], duration seconds)."""
    with wave.open(path, "rb") as f:
        if f.getnchannels() != 1:
            raise ValueError(f"{path}: expected mono audio")
        if f.getsampwidth() != 2:
            raise ValueError(f"{path}: expected 16-bit PCM")
        rate = f.getframerate()
        n = f.getnframes()
        raw = f.readframes(n)
    wav = np.frombuffer(raw, dtype="<i2").astype(np.float32) / 32768.0
    return wav, n / rate
