"""Ward agglomerative clustering via the nearest-neighbor chain.

Merge costs follow the Lance-Williams recurrence for Ward linkage, where the
cost of merging two clusters is the increase in total within-cluster sum of
squares. The chain discovers merges out of height order; a stable sort then
yields the greedy merge sequence, which is valid because Ward costs are
reducible (merging two clusters never makes a third closer to the result
than it was to both parts).
"""

from __future__ import annotations

import numpy as np

from ..errors import ArgumentError
from ..io import Clustering


def ward_merge_tree(points: np.ndarray) -> list[tuple[int, int, float]]:
    """Full merge sequence as (rep_a, rep_b, cost) sorted by cost.

    Representatives are point indices; each merged cluster is named by any
    member, resolved later with union-find. Cost is the within-cluster
    sum-of-squares increase of the merge. Ties keep discovery order, and the
    chain extends to the lowest eligible index on equal distances.
    """
    points = np.asarray(points, dtype=np.float64)
    n = len(points)
    if n == 0:
        raise ArgumentError("ward_merge_tree: need at least one point")
    if n == 1:
        return []

    # dist[i, j] = Ward cost of merging active clusters i and j; built from
    # the expansion with a mirrored Gram so the matrix is exactly symmetric
    p2 = np.einsum("ij,ij->i", points, points)
    gram = points @ points.T
    gram = np.triu(gram, 1)
    gram = gram + gram.T
    dist = 0.5 * p2[:, None] + 0.5 * p2[None, :] - gram
    np.maximum(dist, 0.0, out=dist)
    np.fill_diagonal(dist, np.inf)
    size = np.ones(n, dtype=np.float64)
    active = np.ones(n, dtype=bool)

    merges: list[tuple[int, int, float]] = []
    chain: list[int] = []
    for _ in range(n - 1):
        if not chain:
            chain.append(int(np.flatnonzero(active)[0]))
        while True:
            top = chain[-1]
            row = np.where(active, dist[top], np.inf)
            row[top] = np.inf
            nearest = int(np.argmin(row))
            if len(chain) >= 2 and nearest == chain[-2]:
                break
            if len(chain) >= 2 and row[nearest] == dist[top, chain[-2]]:
                nearest = chain[-2]  # prefer the reciprocal pair on ties
                break
            chain.append(nearest)
        b = chain.pop()
        a = chain.pop()
        if b < a:
            a, b = b, a
        height = float(dist[a, b])
        merges.append((a, b, height))

        # Lance-Williams update: cluster a absorbs b
        sa, sb = size[a], size[b]
        others = active.copy()
        others[a] = others[b] = False
        idx = np.flatnonzero(others)
        if len(idx):
            sk = size[idx]
            dist_new = ((sa + sk) * dist[a, idx] + (sb + sk) * dist[b, idx]
                        - sk * height) / (sa + sb + sk)
            dist[a, idx] = dist_new
            dist[idx, a] = dist_new
        size[a] = sa + sb
        active[b] = False
        chain = [c for c in chain if c != a and c != b]

    order = np.argsort([m[2] for m in merges], kind="stable")
    return [merges[i] for i in order]


def cut_merges(merges: list[tuple[int, int, float]], n: int, k: int) -> np.ndarray:
    """Labels after applying the first n - k merges, 0..k-1 by first appearance."""
    if not 1 <= k <= n:
        raise ArgumentError(f"cut_merges: need 1 <= k <= n, got k={k}, n={n}")
    parent = np.arange(n)

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b, _ in merges[: n - k]:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    roots = np.array([find(i) for i in range(n)])
    labels = np.empty(n, dtype=np.int64)
    seen: dict[int, int] = {}
    for i, r in enumerate(roots):
        labels[i] = seen.setdefault(int(r), len(seen))
    return labels


def agglomerative_ward(points: np.ndarray, k: int,
                       ids: list[str] | None = None) -> Clustering:
    """Ward agglomeration cut at k clusters; deterministic in input order."""
    points = np.asarray(points, dtype=np.float64)
    n = len(points)
    if not 1 <= k <= n:
        raise ArgumentError(f"agglomerative_ward: need 1 <= k <= n, got k={k}, n={n}")
    labels = cut_merges(ward_merge_tree(points), n, k) if n > 1 else np.zeros(1, dtype=np.int64)
    if ids is None:
        ids = [str(i) for i in range(n)]
    return Clustering({sid: int(lab) for sid, lab in zip(ids, labels)})
