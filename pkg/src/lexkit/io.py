"""On-disk formats: segment manifests, feature/unit matrices, clusterings, reports.

Formats
-------
Manifest:    JSON Lines, one segment per line with fields
             segment_id, utterance_id, speaker_id, start_s, end_s,
             word_label (optional), phones (optional list of strings).
Features:    `<segment_id>.lxk` binary. Magic ``LXK1``, then little-endian
             u32 T, u32 D, u8 dtype tag (0 = float32, 1 = uint16), then the
             row-major payload. One format serves continuous frames, discrete
             unit sequences (D = 1), embeddings and other matrices.
Clustering:  two-column text, ``segment_id<TAB>cluster_id``.
Report:      a single JSON object with a fixed key order.

Manifest order is the canonical segment order used everywhere downstream.
All readers validate invariants and raise :class:`ParseError` or
:class:`ValidationError`; reads are pure and loaded data is treated as
immutable.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ParseError, ValidationError

MAGIC = b"LXK1"
DTYPE_F32 = 0
DTYPE_U16 = 1

DEFAULT_FRAME_PERIOD_S = 0.02


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SegmentMetadata:
    """One word segment: identity, span and (optionally) evaluation labels."""

    segment_id: str
    utterance_id: str
    speaker_id: str
    start_s: float
    end_s: float
    word_label: str | None = None
    phones: tuple[str, ...] | None = None

    def __post_init__(self):
        if not self.end_s > self.start_s:
            raise ValidationError(
                f"segment {self.segment_id!r}: end_s ({self.end_s}) must be > start_s ({self.start_s})")
        if self.phones is not None and len(self.phones) == 0:
            raise ValidationError(f"segment {self.segment_id!r}: phones present but empty")

    @property
    def duration_s(self) -> float:
        return self.end_s - self.start_s


@dataclass(frozen=True)
class Manifest:
    """Ordered list of segments; the order is canonical for every module."""

    segments: tuple[SegmentMetadata, ...]

    def __post_init__(self):
        seen = set()
        for seg in self.segments:
            if seg.segment_id in seen:
                raise ValidationError(f"duplicate segment_id {seg.segment_id!r} in manifest")
            seen.add(seg.segment_id)

    def __len__(self) -> int:
        return len(self.segments)

    def __iter__(self):
        return iter(self.segments)

    @property
    def total_duration_s(self) -> float:
        return float(sum(seg.duration_s for seg in self.segments))

    @property
    def segment_ids(self) -> list[str]:
        return [seg.segment_id for seg in self.segments]

    def labels(self) -> list[str]:
        """Ground-truth word labels in manifest order; error when any are missing."""
        out = []
        for seg in self.segments:
            if seg.word_label is None:
                raise ValidationError(f"segment {seg.segment_id!r} has no word_label")
            out.append(seg.word_label)
        return out


@dataclass
class FrameFeatureSequence:
    """Per-segment matrix of continuous frame vectors at a fixed frame period."""

    segment_id: str
    frames: np.ndarray  # T x D float32
    frame_period_s: float = DEFAULT_FRAME_PERIOD_S

    def __post_init__(self):
        self.frames = np.ascontiguousarray(self.frames, dtype=np.float32)
        if self.frames.ndim != 2 or self.frames.shape[0] < 1 or self.frames.shape[1] < 1:
            raise ValidationError(
                f"segment {self.segment_id!r}: frames must be a T x D matrix with T, D >= 1")
        if not np.all(np.isfinite(self.frames)):
            raise ValidationError(f"segment {self.segment_id!r}: non-finite feature value")

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def dim(self) -> int:
        return self.frames.shape[1]


@dataclass
class UnitSequence:
    """Per-segment sequence of discrete unit IDs drawn from a codebook."""

    segment_id: str
    units: np.ndarray  # length T, int

    def __post_init__(self):
        self.units = np.ascontiguousarray(self.units, dtype=np.int32)
        if self.units.ndim != 1 or self.units.shape[0] < 1:
            raise ValidationError(f"segment {self.segment_id!r}: units must be a non-empty 1-D sequence")
        if np.any(self.units < 0):
            raise ValidationError(f"segment {self.segment_id!r}: negative unit ID")

    def validate_codebook_size(self, k: int) -> None:
        if np.any(self.units >= k):
            raise ValidationError(
                f"segment {self.segment_id!r}: unit ID >= codebook size {k}")

    def __len__(self) -> int:
        return len(self.units)


@dataclass
class Clustering:
    """Total assignment of segment IDs to integer cluster IDs (the learned lexicon)."""

    assignments: dict[str, int]

    def canonicalize(self, order: list[str] | None = None) -> "Clustering":
        """Relabel cluster IDs by first appearance in `order` (default: insertion order)."""
        ids = order if order is not None else list(self.assignments.keys())
        relabel: dict[int, int] = {}
        out: dict[str, int] = {}
        for sid in ids:
            old = self.assignments[sid]
            if old not in relabel:
                relabel[old] = len(relabel)
            out[sid] = relabel[old]
        return Clustering(out)

    def validate_coverage(self, manifest: Manifest) -> None:
        missing = [s.segment_id for s in manifest if s.segment_id not in self.assignments]
        if missing:
            raise ValidationError(f"clustering misses {len(missing)} segment(s), e.g. {missing[0]!r}")

    def n_clusters(self) -> int:
        return len(set(self.assignments.values()))

    def labels_for(self, manifest: Manifest) -> np.ndarray:
        """Cluster IDs as an int array in manifest order."""
        self.validate_coverage(manifest)
        return np.array([self.assignments[s.segment_id] for s in manifest], dtype=np.int64)


# ---------------------------------------------------------------------------
# Manifest I/O
# ---------------------------------------------------------------------------

_REQUIRED_FIELDS = ("segment_id", "utterance_id", "speaker_id", "start_s", "end_s")


def read_manifest(path: str | Path) -> Manifest:
    """Read a JSON Lines manifest, preserving input order."""
    path = Path(path)
    segments = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: malformed JSON record: {exc}") from exc
            if not isinstance(rec, dict):
                raise ParseError(f"{path}:{lineno}: record is not an object")
            for key in _REQUIRED_FIELDS:
                if key not in rec:
                    raise ParseError(f"{path}:{lineno}: missing field {key!r}")
            phones = rec.get("phones")
            try:
                segments.append(SegmentMetadata(
                    segment_id=str(rec["segment_id"]),
                    utterance_id=str(rec["utterance_id"]),
                    speaker_id=str(rec["speaker_id"]),
                    start_s=float(rec["start_s"]),
                    end_s=float(rec["end_s"]),
                    word_label=None if rec.get("word_label") is None else str(rec["word_label"]),
                    phones=None if phones is None else tuple(str(p) for p in phones),
                ))
            except (TypeError, ValueError) as exc:
                raise ParseError(f"{path}:{lineno}: bad field value: {exc}") from exc
    return Manifest(tuple(segments))


def write_manifest(manifest: Manifest, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        for seg in manifest:
            rec = {
                "segment_id": seg.segment_id,
                "utterance_id": seg.utterance_id,
                "speaker_id": seg.speaker_id,
                "start_s": seg.start_s,
                "end_s": seg.end_s,
            }
            if seg.word_label is not None:
                rec["word_label"] = seg.word_label
            if seg.phones is not None:
                rec["phones"] = list(seg.phones)
            fh.write(json.dumps(rec, sort_keys=False) + "\n")


# ---------------------------------------------------------------------------
# Matrix files (LXK1)
# ---------------------------------------------------------------------------

def write_matrix(path: str | Path, matrix: np.ndarray, dtype_tag: int = DTYPE_F32) -> None:
    """Write a 2-D matrix in the LXK1 layout (byte-deterministic)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    matrix = np.asarray(matrix)
    if matrix.ndim != 2:
        raise ValidationError(f"{path}: only 2-D matrices are stored, got shape {matrix.shape}")
    if dtype_tag == DTYPE_F32:
        payload = np.ascontiguousarray(matrix, dtype="<f4")
    elif dtype_tag == DTYPE_U16:
        if np.any(matrix < 0) or np.any(matrix > np.iinfo(np.uint16).max):
            raise ValidationError(f"{path}: values out of uint16 range")
        payload = np.ascontiguousarray(matrix, dtype="<u2")
    else:
        raise ValidationError(f"unknown dtype tag {dtype_tag}")
    t, d = payload.shape
    header = MAGIC + struct.pack("<IIB", t, d, dtype_tag)
    with path.open("wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes(order="C"))


def read_matrix(path: str | Path) -> tuple[np.ndarray, int]:
    """Read an LXK1 matrix; returns (matrix, dtype_tag)."""
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < 13 or raw[:4] != MAGIC:
        raise ParseError(f"{path}: not an LXK1 file")
    t, d, tag = struct.unpack("<IIB", raw[4:13])
    if tag == DTYPE_F32:
        dt, size = np.dtype("<f4"), 4
    elif tag == DTYPE_U16:
        dt, size = np.dtype("<u2"), 2
    else:
        raise ParseError(f"{path}: unknown dtype tag {tag}")
    expected = 13 + t * d * size
    if len(raw) != expected:
        raise ParseError(f"{path}: payload size mismatch (expected {expected} bytes, got {len(raw)})")
    matrix = np.frombuffer(raw[13:], dtype=dt).reshape(t, d)
    return matrix.copy(), tag


def feature_path(directory: str | Path, segment_id: str) -> Path:
    return Path(directory) / f"{segment_id}.lxk"


def write_features(sequences: list[FrameFeatureSequence], directory: str | Path) -> None:
    for seq in sequences:
        write_matrix(feature_path(directory, seq.segment_id), seq.frames, DTYPE_F32)


def read_features(directory: str | Path, manifest: Manifest,
                  frame_period_s: float = DEFAULT_FRAME_PERIOD_S) -> list[FrameFeatureSequence]:
    """Read one feature file per manifest segment, in manifest order."""
    directory = Path(directory)
    out: list[FrameFeatureSequence] = []
    dim: int | None = None
    for seg in manifest:
        path = feature_path(directory, seg.segment_id)
        if not path.exists():
            raise ValidationError(f"missing feature file for segment {seg.segment_id!r}: {path}")
        matrix, tag = read_matrix(path)
        if tag != DTYPE_F32:
            raise ValidationError(f"segment {seg.segment_id!r}: expected float32 features, got tag {tag}")
        if not np.all(np.isfinite(matrix)):
            raise ValidationError(f"segment {seg.segment_id!r}: non-finite feature value")
        if dim is None:
            dim = matrix.shape[1]
        elif matrix.shape[1] != dim:
            raise ValidationError(
                f"segment {seg.segment_id!r}: feature dimension {matrix.shape[1]} != {dim}")
        out.append(FrameFeatureSequence(seg.segment_id, matrix, frame_period_s))
    return out


def write_units(units: list[UnitSequence], directory: str | Path) -> None:
    for seq in units:
        write_matrix(feature_path(directory, seq.segment_id), seq.units[:, None], DTYPE_U16)


def read_units(directory: str | Path, manifest: Manifest, codebook_size: int | None = None
               ) -> list[UnitSequence]:
    directory = Path(directory)
    out = []
    for seg in manifest:
        path = feature_path(directory, seg.segment_id)
        if not path.exists():
            raise ValidationError(f"missing unit file for segment {seg.segment_id!r}: {path}")
        matrix, tag = read_matrix(path)
        if tag != DTYPE_U16:
            raise ValidationError(f"segment {seg.segment_id!r}: expected uint16 units, got tag {tag}")
        seq = UnitSequence(seg.segment_id, matrix.reshape(-1))
        if codebook_size is not None:
            seq.validate_codebook_size(codebook_size)
        out.append(seq)
    return out


# ---------------------------------------------------------------------------
# Embeddings (one n x d matrix in manifest order)
# ---------------------------------------------------------------------------

def write_embeddings(vectors: np.ndarray, path: str | Path) -> None:
    write_matrix(path, np.asarray(vectors, dtype=np.float32), DTYPE_F32)


def read_embeddings(path: str | Path, manifest: Manifest) -> np.ndarray:
    matrix, tag = read_matrix(path)
    if tag != DTYPE_F32:
        raise ValidationError(f"{path}: embeddings must be float32")
    if matrix.shape[0] != len(manifest):
        raise ValidationError(
            f"{path}: {matrix.shape[0]} embeddings for {len(manifest)} manifest segments")
    return matrix.astype(np.float64)


# ---------------------------------------------------------------------------
# Clustering I/O
# ---------------------------------------------------------------------------

def write_clustering(clustering: Clustering, path: str | Path,
                     manifest: Manifest | None = None) -> None:
    """Write a canonicalized two-column clustering file.

    When a manifest is given, coverage is validated and rows follow manifest
    order; otherwise the clustering's own insertion order is used.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    order = None
    if manifest is not None:
        clustering.validate_coverage(manifest)
        order = manifest.segment_ids
    canon = clustering.canonicalize(order)
    with path.open("w", encoding="utf-8") as fh:
        for sid, cid in canon.assignments.items():
            fh.write(f"{sid}\t{cid}\n")


def read_clustering(path: str | Path, manifest: Manifest | None = None) -> Clustering:
    path = Path(path)
    assignments: dict[str, int] = {}
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(f"{path}:{lineno}: expected 'segment_id<TAB>cluster_id'")
            sid, cid = parts
            if sid in assignments:
                raise ParseError(f"{path}:{lineno}: duplicate segment_id {sid!r}")
            try:
                assignments[sid] = int(cid)
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: cluster_id is not an integer") from exc
    clustering = Clustering(assignments)
    if manifest is not None:
        clustering.validate_coverage(manifest)
    return clustering


# ---------------------------------------------------------------------------
# Report I/O
# ---------------------------------------------------------------------------

REPORT_FIELDS = ("ned", "purity", "homogeneity", "completeness", "v_measure",
                 "bitrate", "n_clusters", "runtime_s")


def write_report(report: dict, path: str | Path) -> None:
    """Write a report dict as JSON with the fixed field order."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    ordered = {key: report.get(key) for key in REPORT_FIELDS}
    for key, value in report.items():
        if key not in ordered:
            ordered[key] = value
    path.write_text(json.dumps(ordered, indent=2) + "\n", encoding="utf-8")


def read_report(path: str | Path) -> dict:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ParseError(f"{path}: report must be a JSON object")
    return data


def check_finite_json(value) -> None:
    """Reject NaN/inf before serialization (json would emit non-standard tokens)."""
    if isinstance(value, float) and not math.isfinite(value):
        raise ValidationError("non-finite value in JSON payload")
    if isinstance(value, dict):
        for v in value.values():
            check_finite_json(v)
    elif isinstance(value, (list, tuple)):
        for v in value:
            check_finite_json(v)
