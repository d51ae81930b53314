"""Lexicon-quality metrics and report assembly.

All percentages are on a 0..100 scale. Entropies are base-2 with the
0*log(0) = 0 convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .distance import normalized_edit_distance
from .errors import ArgumentError, ValidationError
from .io import Clustering, Manifest


def _cluster_members(clustering: Clustering, manifest: Manifest) -> dict[int, list[int]]:
    """Cluster id -> manifest row indices, rows in manifest order."""
    clustering.validate_coverage(manifest)
    members: dict[int, list[int]] = {}
    for row, seg in enumerate(manifest.segments):
        members.setdefault(clustering.assignments[seg.segment_id], []).append(row)
    return members


def _entropy(counts: np.ndarray) -> float:
    """Shannon entropy in bits of an empirical count vector."""
    total = counts.sum()
    if total <= 0:
        return 0.0
    p = counts[counts > 0] / total
    return float(-(p * np.log2(p)).sum())


def ned(clustering: Clustering, manifest: Manifest,
        per_pair: bool = False) -> float | None:
    """Phonetic incoherence of the clusters, in percent.

    Default: per cluster, the mean normalized edit distance between the phone
    strings of all segment pairs; the final score is the unweighted mean over
    clusters with at least two segments, times 100. Clusters with fewer than
    two segments contribute no pairs and are excluded; if none qualifies the
    metric is undefined and None is returned. `per_pair` switches to a single
    mean over all within-cluster pairs instead.
    """
    phones: list[tuple[str, ...]] = []
    for seg in manifest.segments:
        if seg.phones is None:
            raise ValidationError(f"segment {seg.segment_id!r} has no phones")
        phones.append(seg.phones)
    cluster_means: list[float] = []
    pair_sum = 0.0
    pair_count = 0
    for _, rows in sorted(_cluster_members(clustering, manifest).items()):
        if len(rows) < 2:
            continue
        total = 0.0
        count = 0
        for a in range(len(rows)):
            for b in range(a + 1, len(rows)):
                total += normalized_edit_distance(phones[rows[a]], phones[rows[b]])
                count += 1
        cluster_means.append(total / count)
        pair_sum += total
        pair_count += count
    if not cluster_means:
        return None
    if per_pair:
        return 100.0 * pair_sum / pair_count
    return 100.0 * float(np.mean(cluster_means))


def purity(clustering: Clustering, manifest: Manifest) -> float:
    """Percent of segments covered by their cluster's most frequent label."""
    labels = manifest.labels()
    covered = 0
    for _, rows in sorted(_cluster_members(clustering, manifest).items()):
        counts: dict[str, int] = {}
        for row in rows:
            counts[labels[row]] = counts.get(labels[row], 0) + 1
        covered += max(counts.values())
    return 100.0 * covered / len(manifest.segments)


def v_measure(clustering: Clustering, manifest: Manifest) -> tuple[float, float, float]:
    """(homogeneity, completeness, v) in percent.

    h = 1 - H(label|cluster)/H(label) and c = 1 - H(cluster|label)/H(cluster),
    with h = 1 when H(label) = 0, c = 1 when H(cluster) = 0, and v = 0 when
    h + c = 0; otherwise v is their harmonic mean.
    """
    labels = manifest.labels()
    label_ids = {lab: i for i, lab in enumerate(dict.fromkeys(labels))}
    members = _cluster_members(clustering, manifest)
    n = len(manifest.segments)
    table = np.zeros((len(members), len(label_ids)), dtype=np.float64)
    for ci, (_, rows) in enumerate(sorted(members.items())):
        for row in rows:
            table[ci, label_ids[labels[row]]] += 1.0

    h_label = _entropy(table.sum(axis=0))
    h_cluster = _entropy(table.sum(axis=1))
    h_label_given_cluster = sum(
        (table[ci].sum() / n) * _entropy(table[ci]) for ci in range(len(members)))
    h_cluster_given_label = sum(
        (table[:, li].sum() / n) * _entropy(table[:, li])
        for li in range(len(label_ids)))

    h = 1.0 if h_label == 0.0 else 1.0 - h_label_given_cluster / h_label
    c = 1.0 if h_cluster == 0.0 else 1.0 - h_cluster_given_label / h_cluster
    v = 0.0 if h + c == 0.0 else 2.0 * h * c / (h + c)
    return 100.0 * h, 100.0 * c, 100.0 * v


def bitrate(clustering: Clustering, manifest: Manifest) -> float:
    """Rate of the cluster-ID encoding in bits per second.

    One symbol per segment in manifest order: B = (M / duration) * H, with H
    the entropy of the empirical cluster-ID distribution.
    """
    duration = manifest.total_duration_s
    if duration <= 0:
        raise ArgumentError(f"bitrate: total duration must be positive, got {duration}")
    clustering.validate_coverage(manifest)
    ids = np.asarray([clustering.assignments[seg.segment_id]
                      for seg in manifest.segments])
    _, inverse = np.unique(ids, return_inverse=True)
    counts = np.bincount(inverse).astype(np.float64)
    return (len(ids) / duration) * _entropy(counts)


@dataclass(frozen=True)
class EvalReport:
    """One row of the metric table; `ned` is None when no cluster has two or
    more segments, `runtime_s` is None when no timing was supplied."""

    ned: float | None
    purity: float
    homogeneity: float
    completeness: float
    v_measure: float
    bitrate: float
    n_clusters: int
    runtime_s: float | None

    def to_dict(self) -> dict:
        return {
            "ned": self.ned,
            "purity": self.purity,
            "homogeneity": self.homogeneity,
            "completeness": self.completeness,
            "v_measure": self.v_measure,
            "bitrate": self.bitrate,
            "n_clusters": self.n_clusters,
            "runtime_s": self.runtime_s,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "EvalReport":
        return cls(**{k: data[k] for k in cls.__dataclass_fields__})


def evaluate_all(clustering: Clustering, manifest: Manifest,
                 runtime_s: float | None = None) -> EvalReport:
    """Assemble every metric into one report."""
    h, c, v = v_measure(clustering, manifest)
    return EvalReport(
        ned=ned(clustering, manifest),
        purity=purity(clustering, manifest),
        homogeneity=h,
        completeness=c,
        v_measure=v,
        bitrate=bitrate(clustering, manifest),
        n_clusters=len(set(clustering.assignments.values())),
        runtime_s=runtime_s,
    )
