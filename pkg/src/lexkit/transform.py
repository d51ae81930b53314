"""Representation-side processing.

Two parallel feature paths feed the clustering methods: continuous features
are mean-variance normalized, projected with PCA, and averaged into
unit-sphere embeddings; discrete units come from a codebook trained on the
raw frames (no normalization or PCA) with optional duration-penalized
smoothing of the unit sequences.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .cluster.kmeans import kmeans, sq_dists
from .errors import ArgumentError, DegenerateSegmentError, ValidationError
from .io import FrameFeatureSequence, UnitSequence, read_matrix, write_matrix

log = logging.getLogger("lexkit.transform")

DEFAULT_PCA_DIM = 350
DEFAULT_CODEBOOK_SIZE = 500


# ---------------------------------------------------------------------------
# Normalization
# ---------------------------------------------------------------------------

def pooled_stats(sequences: list[FrameFeatureSequence]) -> tuple[np.ndarray, np.ndarray]:
    """Per-dimension mean and std over all frames of all sequences.

    Accumulates per-sequence sums in input order so the result is independent
    of worker count. Zero-variance dimensions get std 1 (and a warning), so
    they pass through centered.
    """
    if not sequences:
        raise ArgumentError("pooled_stats: no sequences")
    d = sequences[0].frames.shape[1]
    total = 0
    s1 = np.zeros(d, dtype=np.float64)
    s2 = np.zeros(d, dtype=np.float64)
    for seq in sequences:
        f = seq.frames.astype(np.float64)
        if f.shape[1] != d:
            raise ArgumentError(f"pooled_stats: mixed dimensions {f.shape[1]} vs {d}")
        total += f.shape[0]
        s1 += f.sum(axis=0)
        s2 += (f * f).sum(axis=0)
    if total < 2:
        raise ArgumentError(f"pooled_stats: need >= 2 frames, got {total}")
    mean = s1 / total
    var = np.maximum(s2 / total - mean * mean, 0.0)
    std = np.sqrt(var)
    zero = std == 0.0
    if zero.any():
        log.warning("pooled_stats: %d zero-variance dimension(s) pass through centered",
                    int(zero.sum()))
        std = np.where(zero, 1.0, std)
    return mean, std


def apply_stats(sequences: list[FrameFeatureSequence], mean: np.ndarray,
                std: np.ndarray) -> list[FrameFeatureSequence]:
    """Standardize every sequence with the given per-dimension stats."""
    out = []
    for seq in sequences:
        f = (seq.frames.astype(np.float64) - mean) / std
        out.append(FrameFeatureSequence(seq.segment_id, f.astype(np.float32),
                                        seq.frame_period_s))
    return out


def normalize_mean_variance(
        sequences: list[FrameFeatureSequence],
) -> tuple[list[FrameFeatureSequence], tuple[np.ndarray, np.ndarray]]:
    """Standardize pooled frames to mean 0, variance 1 per dimension.

    Returns the normalized sequences and the (mean, std) stats for reuse on
    held-out data.
    """
    mean, std = pooled_stats(sequences)
    return apply_stats(sequences, mean, std), (mean, std)


# ---------------------------------------------------------------------------
# PCA
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PcaProjection:
    """Linear projection onto the top principal directions.

    `components` is D x d with orthonormal columns sorted by descending
    explained variance; projection is (frames - mean) @ components.
    """

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray

    def __post_init__(self) -> None:
        d = self.components.shape[1]
        if d < 1 or d > self.components.shape[0]:
            raise ValidationError(
                f"pca: need 1 <= d <= D, got shape {self.components.shape}")
        gram = self.components.T @ self.components
        if not np.allclose(gram, np.eye(d), atol=1e-4):
            raise ValidationError("pca components are not orthonormal")

    @property
    def dim_in(self) -> int:
        return self.components.shape[0]

    @property
    def dim_out(self) -> int:
        return self.components.shape[1]

    def save(self, path: str | Path) -> None:
        """Pack as a (2 + d) x D matrix: mean row, padded variance row, then
        one row per component."""
        big_d = self.dim_in
        rows = np.zeros((2 + self.dim_out, big_d), dtype=np.float64)
        rows[0] = self.mean
        rows[1, : self.dim_out] = self.explained_variance
        rows[2:] = self.components.T
        write_matrix(path, rows)

    @classmethod
    def load(cls, path: str | Path) -> "PcaProjection":
        rows, _ = read_matrix(path)
        rows = rows.astype(np.float64)
        d = rows.shape[0] - 2
        if d < 1:
            raise ValidationError(f"{path}: not a packed pca projection")
        return cls(mean=rows[0], components=rows[2:].T,
                   explained_variance=rows[1, :d])


def fit_pca(sequences: list[FrameFeatureSequence], d: int = DEFAULT_PCA_DIM) -> PcaProjection:
    """Top-d eigenvectors of the pooled-frame covariance.

    Component signs are fixed by making each column's largest-magnitude entry
    positive, so the fit is fully deterministic.
    """
    if not sequences:
        raise ArgumentError("fit_pca: no sequences")
    frames = np.concatenate([s.frames for s in sequences]).astype(np.float64)
    n, big_d = frames.shape
    if d < 1 or d > big_d:
        raise ArgumentError(f"fit_pca: need 1 <= d <= {big_d}, got d={d}")
    if n <= d:
        raise ArgumentError(f"fit_pca: d={d} needs more than d pooled frames, got {n}")
    mean = frames.mean(axis=0)
    centered = frames - mean
    cov = centered.T @ centered / (n - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1][:d]
    components = eigvecs[:, order]
    explained = np.maximum(eigvals[order], 0.0)
    flip = components[np.argmax(np.abs(components), axis=0), np.arange(d)] < 0
    components = components * np.where(flip, -1.0, 1.0)
    return PcaProjection(mean=mean, components=components, explained_variance=explained)


def apply_pca(seq: FrameFeatureSequence, p: PcaProjection) -> FrameFeatureSequence:
    """Project a sequence: frames' = (frames - mean) @ components."""
    if seq.frames.shape[1] != p.dim_in:
        raise ArgumentError(
            f"apply_pca: sequence dimension {seq.frames.shape[1]} != {p.dim_in}")
    out = (seq.frames.astype(np.float64) - p.mean) @ p.components
    return FrameFeatureSequence(seq.segment_id, out.astype(np.float32),
                                seq.frame_period_s)


# ---------------------------------------------------------------------------
# Averaging to embeddings
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WordEmbedding:
    """A segment's fixed-size representation on the unit sphere."""

    segment_id: str
    vector: np.ndarray

    def __post_init__(self) -> None:
        norm = float(np.linalg.norm(self.vector))
        if abs(norm - 1.0) > 1e-5:
            raise ValidationError(
                f"embedding {self.segment_id!r} norm {norm} is not 1")


def average_embed(seq: FrameFeatureSequence) -> WordEmbedding:
    """Mean over frames, scaled to unit L2 norm."""
    mean = seq.frames.astype(np.float64).mean(axis=0)
    norm = float(np.linalg.norm(mean))
    if norm == 0.0:
        raise DegenerateSegmentError(
            f"segment {seq.segment_id!r}: frame mean is the zero vector")
    return WordEmbedding(segment_id=seq.segment_id, vector=mean / norm)


def embed_all(sequences: list[FrameFeatureSequence]) -> np.ndarray:
    """Stack per-segment average embeddings into an n x d matrix."""
    return np.stack([average_embed(s).vector for s in sequences])


# ---------------------------------------------------------------------------
# Codebook path
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Codebook:
    """K x D centroid table for frame quantization."""

    centroids: np.ndarray

    def __post_init__(self) -> None:
        c = self.centroids
        if c.ndim != 2 or c.shape[0] < 1:
            raise ValidationError("codebook must be a K x D matrix with K >= 1")
        if not np.isfinite(c).all():
            raise ValidationError("codebook has non-finite centroids")
        if len(np.unique(c, axis=0)) != c.shape[0]:
            raise ValidationError("codebook has duplicate centroids; "
                                  "the training data was too degenerate for K")

    @property
    def size(self) -> int:
        return self.centroids.shape[0]

    def save(self, path: str | Path) -> None:
        write_matrix(path, self.centroids)

    @classmethod
    def load(cls, path: str | Path) -> "Codebook":
        matrix, _ = read_matrix(path)
        return cls(matrix.astype(np.float64))


def train_codebook(sequences: list[FrameFeatureSequence],
                   size: int = DEFAULT_CODEBOOK_SIZE, seed: int = 0) -> Codebook:
    """k-means codebook over the raw pooled frames (no normalization, no PCA)."""
    if not sequences:
        raise ArgumentError("train_codebook: no sequences")
    frames = np.concatenate([s.frames for s in sequences]).astype(np.float64)
    if len(frames) < size:
        raise ArgumentError(
            f"train_codebook: {len(frames)} pooled frames < K={size}")
    model, _ = kmeans(frames, size, seed=seed)
    return Codebook(model.centroids)


def quantize(seq: FrameFeatureSequence, cb: Codebook) -> UnitSequence:
    """Nearest-centroid unit per frame; ties break to the lowest index."""
    if seq.frames.shape[1] != cb.centroids.shape[1]:
        raise ArgumentError(
            f"quantize: dimension {seq.frames.shape[1]} != codebook "
            f"{cb.centroids.shape[1]}")
    d2 = sq_dists(seq.frames, cb.centroids)
    units = np.argmin(d2, axis=1).astype(np.int32)
    return UnitSequence(seq.segment_id, units)


def dpdp_smooth(seq: FrameFeatureSequence, cb: Codebook, lam: float) -> UnitSequence:
    """Minimum-cost unit sequence under squared-distance cost plus a constant
    penalty per unit change, by dynamic programming over (frame, unit).

    lam = 0 reduces exactly to `quantize` (the cost rows share the same float
    values and tie rule). The output is not deduplicated.
    """
    if lam < 0:
        raise ArgumentError(f"dpdp_smooth: lambda must be >= 0, got {lam}")
    if seq.frames.shape[1] != cb.centroids.shape[1]:
        raise ArgumentError(
            f"dpdp_smooth: dimension {seq.frames.shape[1]} != codebook "
            f"{cb.centroids.shape[1]}")
    cost = sq_dists(seq.frames, cb.centroids)
    units = kernels.dpdp_backtrack(cost, float(lam))
    return UnitSequence(seq.segment_id, units.astype(np.int32))
