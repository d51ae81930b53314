"""Controlled experiments and the six-system comparison harness.

The six runnable systems pair a representation with a clustering method:
averaged embeddings feed k-means, BIRCH, Ward, or a cosine threshold graph;
continuous frame sequences feed a DTW threshold graph; discrete unit
sequences feed an edit-distance threshold graph. Graph systems are
partitioned with Leiden under the constant Potts model.

`perfect_init` and `perfect_representations` isolate where quality is lost:
start the clustering from the true partition, or replace every segment's
representation by an idealized one, then watch which metrics recover.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

import numpy as np

from .cluster import (
    agglomerative_ward,
    birch,
    build_graph,
    kmeans,
    leiden,
    tune_gamma,
)
from .distance import DistanceKind
from .errors import ArgumentError, DegenerateSegmentError
from .evaluate import EvalReport, evaluate_all
from .io import (
    Clustering,
    FrameFeatureSequence,
    Manifest,
    read_features,
    read_manifest,
)
from .seeding import rng_for
from .transform import (
    apply_pca,
    dpdp_smooth,
    embed_all,
    fit_pca,
    normalize_mean_variance,
    quantize,
    train_codebook,
)

REPRESENTATIONS = ("continuous-avg", "continuous-seq", "discrete-seq")
METHODS = ("kmeans", "birch", "agglom", "graph")

_VALID_COMBOS = frozenset([
    ("continuous-avg", "kmeans"),
    ("continuous-avg", "birch"),
    ("continuous-avg", "agglom"),
    ("continuous-avg", "graph"),
    ("continuous-seq", "graph"),
    ("discrete-seq", "graph"),
])

_REPR_KIND = {
    "continuous-avg": DistanceKind.COSINE,
    "continuous-seq": DistanceKind.DTW,
    "discrete-seq": DistanceKind.EDIT,
}

DEFAULT_THRESHOLDS = {
    DistanceKind.COSINE: 0.4,
    DistanceKind.DTW: 0.35,
    DistanceKind.EDIT: 0.65,
}


@dataclass(frozen=True)
class SystemSpec:
    """One representation-method pairing plus its hyperparameters.

    Only the six valid combinations are constructible. `distance` is derived
    from the representation when omitted. Recognized hyperparameters: k,
    gamma, threshold, birch_threshold, branching, pca_dim, codebook_size,
    lam, max_iter, tol.
    """

    representation: str
    method: str
    distance: DistanceKind | None = None
    hyperparameters: Mapping = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.representation not in REPRESENTATIONS:
            raise ArgumentError(
                f"unknown representation {self.representation!r}; "
                f"expected one of {REPRESENTATIONS}")
        if self.method not in METHODS:
            raise ArgumentError(
                f"unknown method {self.method!r}; expected one of {METHODS}")
        if (self.representation, self.method) not in _VALID_COMBOS:
            raise ArgumentError(
                f"invalid combination {self.representation} + {self.method}; "
                f"valid: {sorted(_VALID_COMBOS)}")
        expected = _REPR_KIND[self.representation]
        if self.distance is None:
            object.__setattr__(self, "distance", expected)
        elif self.distance is not expected:
            raise ArgumentError(
                f"{self.representation} uses {expected.value} distance, "
                f"not {self.distance.value}")

    @property
    def name(self) -> str:
        return f"{self.representation}+{self.method}"

    def to_dict(self) -> dict:
        return {"representation": self.representation, "method": self.method,
                "distance": self.distance.value,
                "hyperparameters": dict(self.hyperparameters)}

    @classmethod
    def from_dict(cls, data: Mapping) -> "SystemSpec":
        kind = data.get("distance")
        return cls(representation=data["representation"], method=data["method"],
                   distance=DistanceKind(kind) if kind else None,
                   hyperparameters=dict(data.get("hyperparameters", {})))


@dataclass
class Corpus:
    """A manifest plus its raw (untransformed) frame features."""

    manifest: Manifest
    sequences: list[FrameFeatureSequence]

    def __post_init__(self) -> None:
        if len(self.sequences) != len(self.manifest):
            raise ArgumentError(
                f"{len(self.sequences)} sequences for {len(self.manifest)} segments")
        for seg, seq in zip(self.manifest, self.sequences):
            if seg.segment_id != seq.segment_id:
                raise ArgumentError(
                    f"sequence order mismatch at segment {seg.segment_id!r}")

    @classmethod
    def load(cls, directory: str | Path) -> "Corpus":
        directory = Path(directory)
        manifest = read_manifest(directory / "manifest.jsonl")
        return cls(manifest, read_features(directory / "features", manifest))

    def true_k(self) -> int:
        return len(set(self.manifest.labels()))


def _continuous_embeddings(corpus: Corpus, hyp: Mapping) -> np.ndarray:
    normed, _ = normalize_mean_variance(corpus.sequences)
    total_frames = sum(s.num_frames for s in normed)
    dim = normed[0].dim
    d = int(hyp.get("pca_dim", min(350, dim)))
    d = min(d, dim, total_frames - 1)
    projection = fit_pca(normed, d)
    return embed_all([apply_pca(s, projection) for s in normed])


def _continuous_sequences(corpus: Corpus, hyp: Mapping) -> list[FrameFeatureSequence]:
    normed, _ = normalize_mean_variance(corpus.sequences)
    total_frames = sum(s.num_frames for s in normed)
    dim = normed[0].dim
    d = int(hyp.get("pca_dim", min(350, dim)))
    d = min(d, dim, total_frames - 1)
    projection = fit_pca(normed, d)
    return [apply_pca(s, projection) for s in normed]


def _discrete_sequences(corpus: Corpus, hyp: Mapping, seed: int) -> list:
    size = int(hyp.get("codebook_size", 500))
    cb = train_codebook(corpus.sequences, size=size, seed=seed)
    lam = float(hyp.get("lam", 0.0))
    if lam == 0.0:
        return [quantize(s, cb) for s in corpus.sequences]
    return [dpdp_smooth(s, cb, lam) for s in corpus.sequences]


def _graph_cluster(items, spec: SystemSpec, ids: list[str], k: int,
                   seed: int, workers: int | None,
                   initial: dict[str, int] | None = None) -> Clustering:
    hyp = spec.hyperparameters
    threshold = float(hyp.get("threshold", DEFAULT_THRESHOLDS[spec.distance]))
    graph = build_graph(items, spec.distance, threshold, ids=ids, workers=workers)
    gamma = hyp.get("gamma")
    if gamma is None:
        gamma = tune_gamma(graph, k, seed=seed).gamma
    return leiden(graph, float(gamma), seed=seed, initial=initial)


def run_system(spec: SystemSpec, data: Corpus, seed: int = 0,
               workers: int | None = None) -> tuple[Clustering, EvalReport]:
    """Execute the full pipeline for one system and score it.

    The reported runtime covers representation building plus clustering
    (wall clock); reading shared inputs and the evaluation itself are
    excluded.
    """
    hyp = spec.hyperparameters
    ids = data.manifest.segment_ids
    k = int(hyp.get("k", 0)) or data.true_k()

    start = time.perf_counter()
    if spec.representation == "continuous-avg":
        embeddings = _continuous_embeddings(data, hyp)
        if spec.method == "kmeans":
            _, clustering = kmeans(
                embeddings, k, seed=seed,
                max_iter=int(hyp.get("max_iter", 100)),
                tol=float(hyp.get("tol", 1e-4)), ids=ids, workers=workers)
        elif spec.method == "birch":
            clustering = birch(
                embeddings, k,
                threshold=float(hyp.get("birch_threshold", 0.25)),
                branching=int(hyp.get("branching", 50)), ids=ids)
        elif spec.method == "agglom":
            clustering = agglomerative_ward(embeddings, k, ids=ids)
        else:
            clustering = _graph_cluster(embeddings, spec, ids, k, seed, workers)
    elif spec.representation == "continuous-seq":
        sequences = _continuous_sequences(data, hyp)
        clustering = _graph_cluster(sequences, spec, ids, k, seed, workers)
    else:
        units = _discrete_sequences(data, hyp, seed)
        clustering = _graph_cluster(units, spec, ids, k, seed, workers)
    runtime = time.perf_counter() - start

    report = evaluate_all(clustering, data.manifest, runtime_s=runtime)
    return clustering, report


def label_partition(manifest: Manifest) -> Clustering:
    """The ground-truth grouping: one cluster per word type, numbered by
    first appearance in manifest order."""
    labels = manifest.labels()
    type_ids: dict[str, int] = {}
    assignments = {}
    for seg, lab in zip(manifest, labels):
        assignments[seg.segment_id] = type_ids.setdefault(lab, len(type_ids))
    return Clustering(assignments)


@dataclass(frozen=True)
class PerfectInitResult:
    """Outcome of a run started from the true partition: the score of the
    starting point itself, then the clustering and score after the method ran
    to convergence."""

    initial_report: EvalReport
    clustering: Clustering
    report: EvalReport


def perfect_init(spec: SystemSpec, data: Corpus, seed: int = 0,
                 workers: int | None = None) -> PerfectInitResult:
    """Start the method from the ground-truth partition and let it converge.

    k-means initializes its centroids at the per-type mean embeddings; graph
    clustering hands the label partition to Leiden as the initial partition
    (gamma stays the baseline tuned value).
    """
    if spec.method not in ("kmeans", "graph"):
        raise ArgumentError(
            f"perfect_init supports kmeans and graph, not {spec.method!r}")
    hyp = spec.hyperparameters
    ids = data.manifest.segment_ids
    init_clustering = label_partition(data.manifest)
    initial_report = evaluate_all(init_clustering, data.manifest)
    k = init_clustering.n_clusters()
    init_labels = init_clustering.labels_for(data.manifest)

    start = time.perf_counter()
    if spec.method == "kmeans":
        embeddings = _continuous_embeddings(data, hyp)
        centroids = np.stack([
            embeddings[init_labels == c].mean(axis=0) for c in range(k)])
        _, clustering = kmeans(
            embeddings, k, seed=seed, max_iter=int(hyp.get("max_iter", 100)),
            tol=float(hyp.get("tol", 1e-4)), init_centroids=centroids,
            ids=ids, workers=workers)
    else:
        if spec.representation == "continuous-avg":
            items = _continuous_embeddings(data, hyp)
        elif spec.representation == "continuous-seq":
            items = _continuous_sequences(data, hyp)
        else:
            items = _discrete_sequences(data, hyp, seed)
        clustering = _graph_cluster(items, spec, ids, k, seed, workers,
                                    initial=init_clustering.assignments)
    runtime = time.perf_counter() - start

    report = evaluate_all(clustering, data.manifest, runtime_s=runtime)
    return PerfectInitResult(initial_report, clustering, report)


def perfect_representations(data: Corpus, mode: str, noise_sigma: float = 1e-4,
                            seed: int = 0, pca_dim: int | None = None):
    """Replace every segment's representation by an idealized one.

    embedding mode: each segment's embedding becomes its word type's mean
    embedding plus isotropic Gaussian noise (sigma = noise_sigma),
    renormalized to the unit sphere; returns an n x d embedding matrix in
    manifest order. sequence mode: one seed-sampled representative instance
    per type, its raw frames copied to every instance of that type; returns a
    feature sequence list. Phones and labels are untouched either way.
    """
    labels = data.manifest.labels()
    type_rows: dict[str, list[int]] = {}
    for row, lab in enumerate(labels):
        type_rows.setdefault(lab, []).append(row)

    if mode == "embedding":
        hyp = {} if pca_dim is None else {"pca_dim": pca_dim}
        embeddings = _continuous_embeddings(data, hyp)
        means = np.empty_like(embeddings)
        for lab, rows in type_rows.items():
            mean = embeddings[rows].mean(axis=0)
            if float(np.linalg.norm(mean)) == 0.0:
                raise DegenerateSegmentError(
                    f"word type {lab!r}: mean embedding is the zero vector")
            means[rows] = mean
        rng = rng_for(seed, "perfect-repr")
        noisy = means + noise_sigma * rng.standard_normal(means.shape)
        norms = np.linalg.norm(noisy, axis=1, keepdims=True)
        if (norms == 0.0).any():
            raise DegenerateSegmentError("noise produced a zero embedding")
        return noisy / norms

    if mode == "sequence":
        rng = rng_for(seed, "perfect-repr")
        rep_row: dict[str, int] = {}
        for lab in dict.fromkeys(labels):  # first-appearance order
            rows = type_rows[lab]
            rep_row[lab] = rows[int(rng.integers(0, len(rows)))]
        out = []
        for row, (seg, lab) in enumerate(zip(data.manifest, labels)):
            rep = data.sequences[rep_row[lab]]
            out.append(FrameFeatureSequence(seg.segment_id, rep.frames.copy(),
                                            rep.frame_period_s))
        return out

    raise ArgumentError(f"unknown mode {mode!r}; expected embedding or sequence")


def with_sequences(data: Corpus, sequences: list[FrameFeatureSequence]) -> Corpus:
    """The same manifest over replacement features."""
    return Corpus(data.manifest, sequences)


def run_on_embeddings(spec: SystemSpec, data: Corpus, embeddings: np.ndarray,
                      seed: int = 0,
                      workers: int | None = None) -> tuple[Clustering, EvalReport]:
    """Run an averaged-embedding system on precomputed embeddings (used after
    an embedding-mode representation swap)."""
    if spec.representation != "continuous-avg":
        raise ArgumentError("precomputed embeddings fit continuous-avg systems only")
    hyp = spec.hyperparameters
    ids = data.manifest.segment_ids
    k = int(hyp.get("k", 0)) or data.true_k()
    embeddings = np.asarray(embeddings, dtype=np.float64)

    start = time.perf_counter()
    if spec.method == "kmeans":
        _, clustering = kmeans(embeddings, k, seed=seed,
                               max_iter=int(hyp.get("max_iter", 100)),
                               tol=float(hyp.get("tol", 1e-4)),
                               ids=ids, workers=workers)
    elif spec.method == "birch":
        clustering = birch(embeddings, k,
                           threshold=float(hyp.get("birch_threshold", 0.25)),
                           branching=int(hyp.get("branching", 50)), ids=ids)
    elif spec.method == "agglom":
        clustering = agglomerative_ward(embeddings, k, ids=ids)
    else:
        clustering = _graph_cluster(embeddings, spec, ids, k, seed, workers)
    runtime = time.perf_counter() - start

    return clustering, evaluate_all(clustering, data.manifest, runtime_s=runtime)


def compare_systems(specs: list[SystemSpec], data: Corpus, seed: int = 0,
                    workers: int | None = None) -> list[tuple[SystemSpec, EvalReport]]:
    """One report per spec, in the given order."""
    rows = []
    for spec in specs:
        _, report = run_system(spec, data, seed=seed, workers=workers)
        rows.append((spec, report))
    return rows


_COLUMNS = ("NED", "Purity", "Hom.", "Compl.", "V-meas.", "Bitrate",
            "Clusters", "Runtime")


def render_report_table(rows: list[tuple[str, EvalReport]]) -> str:
    """Fixed-order, aligned text table of evaluation reports."""

    def fmt(value, digits=1):
        if value is None:
            return "-"
        if isinstance(value, int):
            return str(value)
        return f"{value:.{digits}f}"

    table = [("System",) + _COLUMNS]
    for name, r in rows:
        table.append((name, fmt(r.ned), fmt(r.purity), fmt(r.homogeneity),
                      fmt(r.completeness), fmt(r.v_measure), fmt(r.bitrate),
                      str(r.n_clusters), fmt(r.runtime_s)))
    widths = [max(len(row[i]) for row in table) for i in range(len(table[0]))]
    lines = []
    for row in table:
        lines.append("  ".join(cell.rjust(w) if i else cell.ljust(w)
                               for i, (cell, w) in enumerate(zip(row, widths))))
    return "\n".join(lines)


def default_specs() -> list[SystemSpec]:
    """The six standard representation-method pairings."""
    return [SystemSpec(r, m) for r, m in (
        ("continuous-avg", "kmeans"),
        ("continuous-avg", "birch"),
        ("continuous-avg", "agglom"),
        ("continuous-avg", "graph"),
        ("continuous-seq", "graph"),
        ("discrete-seq", "graph"),
    )]


__all__ = [
    "SystemSpec", "Corpus", "PerfectInitResult", "run_system",
    "run_on_embeddings", "perfect_init", "perfect_representations",
    "label_partition", "with_sequences", "compare_systems",
    "render_report_table", "default_specs", "DEFAULT_THRESHOLDS",
]
