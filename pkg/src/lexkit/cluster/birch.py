"""BIRCH: one-pass CF-tree condensation followed by a Ward global phase.

Each leaf entry keeps the (count, linear sum, squared sum) statistics of the
points it absorbed; a point joins its nearest leaf entry when the merged
entry's average pairwise distance (its diameter) stays within the threshold.
Leaf entries are then reduced to exactly k clusters by Ward agglomeration of
their centroids, and every point inherits its entry's final cluster.
"""

from __future__ import annotations

import numpy as np

from ..errors import ArgumentError
from ..io import Clustering
from .agglom import cut_merges, ward_merge_tree


class _Entry:
    """A leaf subcluster: CF statistics plus the indices it absorbed."""

    __slots__ = ("n", "ls", "ss", "points")

    def __init__(self, x: np.ndarray, sq: float, idx: int) -> None:
        self.n = 1
        self.ls = x.copy()
        self.ss = sq
        self.points = [idx]

    def centroid(self) -> np.ndarray:
        return self.ls / self.n

    def merged_diameter(self, x: np.ndarray, sq: float) -> float:
        """Diameter (root mean pairwise squared distance) after absorbing x."""
        n = self.n + 1
        ls = self.ls + x
        ss = self.ss + sq
        d2 = 2.0 * (n * ss - float(ls @ ls)) / (n * (n - 1))
        return float(np.sqrt(max(d2, 0.0)))

    def absorb(self, x: np.ndarray, sq: float, idx: int) -> None:
        self.n += 1
        self.ls += x
        self.ss += sq
        self.points.append(idx)


class _Node:
    """CF-tree node; children are entries (leaf) or nodes (internal)."""

    __slots__ = ("is_leaf", "children", "n", "ls")

    def __init__(self, is_leaf: bool, children: list) -> None:
        self.is_leaf = is_leaf
        self.children = children
        self.n = sum(c.n for c in children)
        self.ls = (np.sum([c.ls for c in children], axis=0)
                   if children else None)

    def centroid(self) -> np.ndarray:
        return self.ls / self.n


def _nearest(children: list, x: np.ndarray) -> int:
    cents = np.stack([c.centroid() for c in children])
    d2 = np.einsum("ij,ij->i", cents - x, cents - x)
    return int(np.argmin(d2))


def _split(node: _Node) -> tuple[_Node, _Node]:
    """Split an overfull node around its two farthest children."""
    cents = np.stack([c.centroid() for c in node.children])
    m = len(cents)
    diff = cents[:, None, :] - cents[None, :, :]
    d2 = np.einsum("ijk,ijk->ij", diff, diff)
    a, b = divmod(int(np.argmax(d2)), m)
    if a > b:
        a, b = b, a
    to_b = d2[:, b] < d2[:, a]
    to_b[a] = False
    to_b[b] = True
    left = [c for i, c in enumerate(node.children) if not to_b[i]]
    right = [c for i, c in enumerate(node.children) if to_b[i]]
    return _Node(node.is_leaf, left), _Node(node.is_leaf, right)


def _insert(node: _Node, x: np.ndarray, sq: float, idx: int,
            threshold: float, branching: int) -> tuple[_Node, _Node] | None:
    node.n += 1
    node.ls = x.copy() if node.ls is None else node.ls + x
    if node.is_leaf:
        if node.children:
            j = _nearest(node.children, x)
            entry = node.children[j]
            if entry.merged_diameter(x, sq) <= threshold:
                entry.absorb(x, sq, idx)
                return None
        node.children.append(_Entry(x, sq, idx))
    else:
        j = _nearest(node.children, x)
        halves = _insert(node.children[j], x, sq, idx, threshold, branching)
        if halves is not None:
            node.children[j: j + 1] = halves
    if len(node.children) > branching:
        return _split(node)
    return None


def birch(embeddings: np.ndarray, k: int, threshold: float = 0.25,
          branching: int = 50, ids: list[str] | None = None) -> Clustering:
    """Cluster rows of `embeddings` into exactly k clusters.

    The CF-tree pass is sensitive to input order (documented; one-pass
    algorithms are). Raises when the tree condenses to fewer than k leaf
    entries; lower the threshold in that case.
    """
    points = np.asarray(embeddings, dtype=np.float64)
    n = len(points)
    if threshold <= 0:
        raise ArgumentError(f"birch: threshold must be positive, got {threshold}")
    if branching < 2:
        raise ArgumentError(f"birch: branching must be >= 2, got {branching}")
    if not 1 <= k <= n:
        raise ArgumentError(f"birch: need 1 <= k <= n, got k={k}, n={n}")

    sq = np.einsum("ij,ij->i", points, points)
    root = _Node(True, [])
    for i in range(n):
        halves = _insert(root, points[i], float(sq[i]), i, threshold, branching)
        if halves is not None:
            root = _Node(False, list(halves))

    entries: list[_Entry] = []

    def collect(node: _Node) -> None:
        for child in node.children:
            if node.is_leaf:
                entries.append(child)
            else:
                collect(child)

    collect(root)
    m = len(entries)
    if m < k:
        raise ArgumentError(
            f"birch: tree condensed {n} points into {m} subclusters < k={k}; "
            "lower the threshold to keep more subclusters")

    centroids = np.stack([e.centroid() for e in entries])
    entry_labels = (cut_merges(ward_merge_tree(centroids), m, k)
                    if m > 1 else np.zeros(1, dtype=np.int64))

    labels = np.empty(n, dtype=np.int64)
    for e, lab in zip(entries, entry_labels):
        labels[e.points] = lab
    if ids is None:
        ids = [str(i) for i in range(n)]
    return Clustering({sid: int(lab) for sid, lab in zip(ids, labels)})
