"""Wav reading and resampling to an encoder's expected rate."""

from __future__ import annotations

import math
import wave
from pathlib import Path

import numpy as np
from scipy.signal import resample_poly


def read_wav(path: str | Path) -> tuple[np.ndarray, int]:
    """16-bit PCM wav as mono float32 in [-1, 1], plus its sample rate."""
    with wave.open(str(path), "rb") as wav:
        if wav.getsampwidth() != 2:
            raise ValueError(f"{path}: only 16-bit PCM is supported")
        rate = wav.getframerate()
        channels = wav.getnchannels()
        raw = wav.readframes(wav.getnframes())
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float32) / 32768.0
    if channels > 1:
        samples = samples.reshape(-1, channels).mean(axis=1)
    return samples, rate


def resample(waveform: np.ndarray, rate: int, target_rate: int) -> np.ndarray:
    if rate == target_rate:
        return waveform.astype(np.float32, copy=False)
    divisor = math.gcd(rate, target_rate)
    out = resample_poly(waveform, target_rate // divisor, rate // divisor)
    return out.astype(np.float32)


def load_audio(path: str | Path, target_rate: int) -> np.ndarray:
    waveform, rate = read_wav(path)
    return resample(waveform, rate, target_rate)
