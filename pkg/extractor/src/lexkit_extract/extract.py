"""Slice aligned words out of utterance-level feature matrices.

``extract`` pairs every ``<utterance_id>.wav`` under the audio directory
with that utterance's alignment rows, computes frame features once per
utterance and cuts one segment per aligned word. Word boundaries land on
the 20 ms frame grid as ``floor(start / 0.02) .. ceil(end / 0.02)`` with a
one-frame minimum, clamped to the frames the audio actually produced.

Nothing is ever lost silently: utterances present on only one side
(audio without alignment rows, or rows without audio) are skipped with a
warning, words shorter than one frame period or lying past the end of
the audio are dropped with a warning, and the returned summary reconciles
``aligned == emitted + dropped + skipped`` so any discrepancy shows up in
the counts.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .alignment import AlignedWord, parse_alignment, word_count
from .audio import read_wav
from .features import FRAME_PERIOD_S, ExtractorError, compute_features, validate_layer
from .outputs import manifest_record, write_feature_matrix, write_manifest_rows

logger = logging.getLogger("lexkit_extract")

# tolerance for boundaries that sit on a frame edge up to float rounding;
# 1e-9 s is far below any alignment's time resolution
_EDGE_EPS = 1e-9


@dataclass(frozen=True)
class ExtractionSpec:
    """What to extract: front end, layer, and the three I/O locations."""

    model: str
    layer: int
    audio_dir: Path
    alignment_path: Path
    out_dir: Path

    def __post_init__(self):
        object.__setattr__(self, "audio_dir", Path(self.audio_dir))
        object.__setattr__(self, "alignment_path", Path(self.alignment_path))
        object.__setattr__(self, "out_dir", Path(self.out_dir))
        validate_layer(self.model, self.layer)


@dataclass(frozen=True)
class ExtractionSummary:
    """Reconciliation counts for one extraction run."""

    aligned_words: int
    emitted_segments: int
    dropped_words: int
    skipped_words: int
    skipped_utterances: tuple[str, ...]

    def reconciles(self) -> bool:
        return self.aligned_words == (
            self.emitted_segments + self.dropped_words + self.skipped_words)


def speaker_of(utterance_id: str) -> str:
    """Speaker prefix under the common ``<speaker>-...`` / ``<speaker>_...`` naming."""
    for sep in ("-", "_"):
        head, _, tail = utterance_id.partition(sep)
        if head and tail:
            return head
    return utterance_id


def frame_span(start_s: float, end_s: float, num_frames: int) -> tuple[int, int] | None:
    """Frame index range for a word, or None when the slice degenerates.

    Words shorter than one frame period have no frame of their own and are
    rejected, as are words whose span lies entirely past the audio's last
    frame. Survivors always get at least one frame.
    """
    if end_s - start_s < FRAME_PERIOD_S - _EDGE_EPS:
        return None
    lo = int(math.floor(start_s / FRAME_PERIOD_S + _EDGE_EPS))
    hi = int(math.ceil(end_s / FRAME_PERIOD_S - _EDGE_EPS))
    hi = max(hi, lo + 1)
    lo = max(lo, 0)
    hi = min(hi, num_frames)
    if hi <= lo:
        return None
    return lo, hi


def _segment_rows(utterance_id: str, words: list[AlignedWord],
                  feats: np.ndarray) -> tuple[list[tuple[dict, np.ndarray]], int]:
    """Cut one (manifest record, frame slice) per word; returns (rows, dropped)."""
    speaker = speaker_of(utterance_id)
    rows: list[tuple[dict, np.ndarray]] = []
    dropped = 0
    for i, w in enumerate(words):
        span = frame_span(w.start_s, w.end_s, feats.shape[0])
        if span is None:
            logger.warning(
                "utterance %s: word %r (%.3f-%.3f s) has no usable frames; dropped",
                utterance_id, w.word, w.start_s, w.end_s)
            dropped += 1
            continue
        lo, hi = span
        segment_id = f"{utterance_id}_w{i:03d}"
        rec = manifest_record(segment_id, utterance_id, speaker,
                              w.start_s, w.end_s, w.word, w.phones)
        rows.append((rec, feats[lo:hi]))
    return rows, dropped


def extract(spec: ExtractionSpec, workers: int = 1) -> ExtractionSummary:
    """Run one extraction; writes ``manifest.jsonl`` + ``features/`` under ``out_dir``."""
    words_by_utt = parse_alignment(spec.alignment_path)
    if not spec.audio_dir.is_dir():
        raise ExtractorError(f"audio directory not found: {spec.audio_dir}")
    audio = {p.stem: p for p in sorted(spec.audio_dir.glob("*.wav"))}

    skipped_utts: list[str] = []
    skipped_words = 0
    for utt in sorted(set(audio) - set(words_by_utt)):
        logger.warning("utterance %s has audio but no alignment rows; skipped", utt)
        skipped_utts.append(utt)
    for utt in sorted(set(words_by_utt) - set(audio)):
        n = len(words_by_utt[utt])
        logger.warning(
            "utterance %s has %d alignment rows but no audio file; skipped", utt, n)
        skipped_utts.append(utt)
        skipped_words += n

    # alignment file order is the canonical manifest order downstream
    shared = [utt for utt in words_by_utt if utt in audio]

    def features_for(utt: str) -> np.ndarray:
        samples, rate = read_wav(audio[utt])
        return compute_features(samples, rate, spec.model, spec.layer)

    manifest_rows: list[dict] = []
    dropped = 0
    features_dir = spec.out_dir / "features"
    # feature computation shards cleanly by utterance; writes stay ordered
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        for utt, feats in zip(shared, pool.map(features_for, shared)):
            rows, n_dropped = _segment_rows(utt, words_by_utt[utt], feats)
            dropped += n_dropped
            for rec, frames in rows:
                write_feature_matrix(features_dir / f"{rec['segment_id']}.lxk", frames)
                manifest_rows.append(rec)
    write_manifest_rows(manifest_rows, spec.out_dir / "manifest.jsonl")

    summary = ExtractionSummary(
        aligned_words=word_count(words_by_utt),
        emitted_segments=len(manifest_rows),
        dropped_words=dropped,
        skipped_words=skipped_words,
        skipped_utterances=tuple(skipped_utts),
    )
    logger.info(
        "aligned words %d = emitted %d + dropped %d + skipped %d",
        summary.aligned_words, summary.emitted_segments,
        summary.dropped_words, summary.skipped_words)
    if not summary.reconciles():
        logger.warning(
            "segment counts do not reconcile: %d aligned vs %d emitted + %d dropped "
            "+ %d skipped", summary.aligned_words, summary.emitted_segments,
            summary.dropped_words, summary.skipped_words)
    return summary
