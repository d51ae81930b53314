"""Shared builders: tiny WAV files and alignment rows for extractor tests."""

from __future__ import annotations

import wave
from pathlib import Path

import numpy as np

RATE = 16000

# five-word vocabulary; each word gets its own tone so features differ by label
VOCAB = ["alpha", "bravo", "carol", "delta", "eagle"]
SPANS = [(0.10, 0.30), (0.40, 0.62), (0.70, 0.94)]


def write_wav(path: Path, samples: np.ndarray, rate: int = RATE) -> None:
    pcm = (np.clip(samples, -1.0, 1.0) * 32767.0).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(rate)
        fh.writeframes(pcm.tobytes())


def tone_track(spans: list[tuple[float, float, float]], duration_s: float,
               rate: int = RATE, seed: int = 0) -> np.ndarray:
    """Low noise floor with one sine tone per (start_s, end_s, freq_hz) span."""
    rng = np.random.default_rng(seed)
    n = int(round(duration_s * rate))
    x = 0.01 * rng.standard_normal(n)
    t = np.arange(n) / rate
    for start, end, freq in spans:
        mask = (t >= start) & (t < end)
        x[mask] += 0.4 * np.sin(2.0 * np.pi * freq * t[mask])
    return x


def write_alignment(path: Path, rows: list[tuple[str, str, float, float, str]]) -> None:
    """rows: (utterance_id, word, start_s, end_s, phones_text)."""
    lines = ["\t".join([u, w, f"{s:g}", f"{e:g}", p]) for u, w, s, e, p in rows]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def build_sample(root: Path, n_utts: int = 10) -> tuple[Path, Path]:
    """Audio directory + alignment file: n_utts utterances, three words each."""
    audio_dir = root / "wavs"
    audio_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for i in range(n_utts):
        utt = f"spk{i % 3}-utt{i:02d}"
        spans = []
        for j, (start, end) in enumerate(SPANS):
            word = VOCAB[(i + j) % len(VOCAB)]
            spans.append((start, end, 220.0 + 110.0 * VOCAB.index(word)))
            rows.append((utt, word, start, end, " ".join(word[:3])))
        write_wav(audio_dir / f"{utt}.wav", tone_track(spans, 1.0, seed=i))
    align_path = root / "words.tsv"
    write_alignment(align_path, rows)
    return audio_dir, align_path
