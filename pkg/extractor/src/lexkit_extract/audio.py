"""WAV reading through the stdlib ``wave`` module.

Returns float64 samples in [-1, 1]; multi-channel audio is averaged down
to mono so the feature front ends only ever see one channel.
"""

from __future__ import annotations

import wave
from pathlib import Path

import numpy as np


class AudioError(ValueError):
    """Unreadable or unsupported audio file."""


def read_wav(path: str | Path) -> tuple[np.ndarray, int]:
    """Read a PCM WAV file; returns (mono samples in [-1, 1], sample rate)."""
    path = Path(path)
    try:
        with wave.open(str(path), "rb") as fh:
            rate = fh.getframerate()
            channels = fh.getnchannels()
            width = fh.getsampwidth()
            raw = fh.readframes(fh.getnframes())
    except (wave.Error, EOFError, OSError) as exc:
        raise AudioError(f"{path}: cannot read WAV: {exc}") from exc
    if width == 2:
        samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    elif width == 1:
        # 8-bit WAV is unsigned with midpoint 128
        samples = (np.frombuffer(raw, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    elif width == 4:
        samples = np.frombuffer(raw, dtype="<i4").astype(np.float64) / 2147483648.0
    else:
        raise AudioError(f"{path}: unsupported sample width {width} bytes")
    if channels > 1:
        samples = samples.reshape(-1, channels).mean(axis=1)
    if samples.size == 0:
        raise AudioError(f"{path}: empty audio")
    return samples, rate
