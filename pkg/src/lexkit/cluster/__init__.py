"""Clustering methods: k-means (k-means++ init), BIRCH, Ward agglomerative,
and threshold-graph construction partitioned by Leiden under the constant
Potts model."""

from .agglom import agglomerative_ward, cut_merges, ward_merge_tree
from .birch import birch
from .graph import (
    GraphBuilder,
    Partition,
    SimilarityGraph,
    TuneResult,
    build_graph,
    cpm_quality,
    leiden,
    tune_gamma,
)
from .kmeans import KMeansModel, kmeans, kmeans_pp_init

__all__ = [
    "KMeansModel",
    "kmeans",
    "kmeans_pp_init",
    "birch",
    "agglomerative_ward",
    "ward_merge_tree",
    "cut_merges",
    "SimilarityGraph",
    "GraphBuilder",
    "Partition",
    "TuneResult",
    "build_graph",
    "cpm_quality",
    "leiden",
    "tune_gamma",
]
