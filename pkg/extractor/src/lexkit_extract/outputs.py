"""Writers for the toolkit's on-disk interchange formats.

The downstream lexicon-learning toolkit reads a corpus directory shaped as

    manifest.jsonl            one JSON object per word segment
    features/<segment_id>.lxk one binary matrix per segment

An ``.lxk`` matrix is the magic bytes ``LXK1``, a little-endian header
``u32 T, u32 D, u8 dtype`` (0 = float32), then the row-major payload.
Those formats are the whole contract between the two packages, so this
module writes them directly instead of importing the other package.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"LXK1"
DTYPE_F32 = 0

# manifest key order mirrors the downstream writer so diffs stay readable
_FIELD_ORDER = ("segment_id", "utterance_id", "speaker_id", "start_s", "end_s")


def write_feature_matrix(path: str | Path, matrix: np.ndarray) -> None:
    """Write one float32 feature matrix in the LXK1 layout."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = np.ascontiguousarray(matrix, dtype="<f4")
    if payload.ndim != 2 or payload.shape[0] < 1 or payload.shape[1] < 1:
        raise ValueError(f"{path}: features must be a T x D matrix with T, D >= 1")
    if not np.all(np.isfinite(payload)):
        raise ValueError(f"{path}: non-finite feature value")
    t, d = payload.shape
    with path.open("wb") as fh:
        fh.write(MAGIC + struct.pack("<IIB", t, d, DTYPE_F32))
        fh.write(payload.tobytes(order="C"))


def manifest_record(segment_id: str, utterance_id: str, speaker_id: str,
                    start_s: float, end_s: float, word_label: str | None,
                    phones: tuple[str, ...] | None) -> dict:
    rec = {
        "segment_id": segment_id,
        "utterance_id": utterance_id,
        "speaker_id": speaker_id,
        "start_s": start_s,
        "end_s": end_s,
    }
    if word_label is not None:
        rec["word_label"] = word_label
    if phones is not None:
        rec["phones"] = list(phones)
    return rec


def write_manifest_rows(rows: list[dict], path: str | Path) -> None:
    """Write manifest records as JSON Lines, one object per segment."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for rec in rows:
            for key in _FIELD_ORDER:
                if key not in rec:
                    raise ValueError(f"manifest record missing field {key!r}: {rec}")
            fh.write(json.dumps(rec, sort_keys=False) + "\n")
