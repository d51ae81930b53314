"""Lloyd k-means with k-means++ initialization.

Assignment runs over fixed-size point blocks so the floating-point result is
identical for any worker count; the update step is a sequential reduction in
point order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ArgumentError
from ..io import Clustering
from ..parallel import iter_blocks, run_blocks
from ..seeding import rng_for, sample_index

_ASSIGN_BLOCK = 8192


def sq_dists(points: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, n x k, float64.

    Uses the |x|^2 - 2x.c + |c|^2 expansion; entries can round a hair below
    zero, which argmin and clipped sums tolerate. Every caller that must agree
    bitwise (assignment, quantization, smoothing costs) goes through here.
    """
    p = np.asarray(points, dtype=np.float64)
    c = np.asarray(centroids, dtype=np.float64)
    p2 = np.einsum("ij,ij->i", p, p)
    c2 = np.einsum("ij,ij->i", c, c)
    return p2[:, None] - 2.0 * (p @ c.T) + c2[None, :]


def _assign(points: np.ndarray, centroids: np.ndarray,
            workers: int | None) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-centroid labels (ties to lowest index) and min distances."""
    n = len(points)
    labels = np.empty(n, dtype=np.int64)
    mins = np.empty(n, dtype=np.float64)

    def block(lo: int, hi: int) -> None:
        d2 = sq_dists(points[lo:hi], centroids)
        lab = np.argmin(d2, axis=1)
        labels[lo:hi] = lab
        m = d2[np.arange(hi - lo), lab]
        # the expansion leaves ulp residue on exact fits; pin those to zero
        exact = np.all(points[lo:hi] == centroids[lab], axis=1)
        m[exact] = 0.0
        mins[lo:hi] = m

    run_blocks(block, iter_blocks(n, _ASSIGN_BLOCK), workers)
    return labels, mins


def _repair_empty(labels: np.ndarray, mins: np.ndarray, k: int) -> None:
    """Give each empty cluster the point farthest from its own centroid.

    Only points whose cluster keeps >= 2 members are eligible, so repair never
    creates a new empty cluster. Ties go to the lowest point index.
    """
    counts = np.bincount(labels, minlength=k)
    for empty in np.flatnonzero(counts == 0):
        eligible = counts[labels] >= 2
        if not eligible.any():
            break
        cand = np.where(eligible, mins, -np.inf)
        idx = int(np.argmax(cand))
        counts[labels[idx]] -= 1
        labels[idx] = empty
        counts[empty] += 1
        mins[idx] = 0.0


def kmeans_pp_init(points: np.ndarray, k: int, seed: int,
                   rng: np.random.Generator | None = None) -> np.ndarray:
    """Pick k starting centroids: first uniform, then each next point with
    probability proportional to its squared distance from the nearest chosen
    centroid. Returns copies of the chosen points, k x d."""
    points = np.asarray(points, dtype=np.float64)
    n = len(points)
    if k < 1 or n < k:
        raise ArgumentError(f"kmeans_pp_init: need 1 <= k <= n, got k={k}, n={n}")
    if rng is None:
        rng = rng_for(seed, "kmeans++")
    chosen = np.zeros(n, dtype=bool)
    first = sample_index(rng, np.ones(n))
    order = [first]
    chosen[first] = True
    d2 = np.einsum("ij,ij->i", points - points[first], points - points[first])
    d2[first] = 0.0
    while len(order) < k:
        if d2.sum() > 0:
            nxt = sample_index(rng, d2)
        else:
            # duplicates collapsed every distance; take lowest unchosen index
            nxt = int(np.flatnonzero(~chosen)[0])
        chosen[nxt] = True
        order.append(nxt)
        diff = points - points[nxt]
        np.minimum(d2, np.einsum("ij,ij->i", diff, diff), out=d2)
        d2[nxt] = 0.0
    return points[np.array(order)].copy()


def _cluster_means(points: np.ndarray, labels: np.ndarray, k: int,
                   fallback: np.ndarray) -> np.ndarray:
    """Per-cluster means as a sequential reduction in point order.

    A stable sort groups points without reordering within a cluster, so the
    summation order (and hence the float result) is fixed by the input order
    alone. Clusters left empty keep their `fallback` row.
    """
    order = np.argsort(labels, kind="stable")
    sorted_pts = points[order]
    sorted_labels = labels[order]
    starts = np.concatenate(([0], np.flatnonzero(np.diff(sorted_labels)) + 1))
    sums = np.add.reduceat(sorted_pts, starts, axis=0)
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    out = fallback.copy()
    present = sorted_labels[starts]
    out[present] = sums / counts[present, None]
    return out


@dataclass(frozen=True)
class KMeansModel:
    """Fitted centroids plus convergence bookkeeping."""

    centroids: np.ndarray
    inertia: float
    iterations_run: int
    inertia_history: tuple[float, ...] = field(default=(), repr=False)


def kmeans(points: np.ndarray, k: int, seed: int = 0, max_iter: int = 100,
           tol: float = 1e-4, init_centroids: np.ndarray | None = None,
           ids: list[str] | None = None,
           workers: int | None = None) -> tuple[KMeansModel, Clustering]:
    """Lloyd iterations from a k-means++ start (or `init_centroids`).

    Stops when the largest per-centroid shift drops below `tol` or after
    `max_iter` rounds, then assigns once more against the final centroids.
    Empty clusters are repaired each round by seizing the point farthest from
    its own centroid.
    """
    points = np.asarray(points, dtype=np.float64)
    n = len(points)
    if k < 1 or n < k:
        raise ArgumentError(f"kmeans: need 1 <= k <= n, got k={k}, n={n}")
    if init_centroids is not None:
        centroids = np.asarray(init_centroids, dtype=np.float64).copy()
        if centroids.shape != (k, points.shape[1]):
            raise ArgumentError(
                f"kmeans: init_centroids shape {centroids.shape} != ({k}, {points.shape[1]})")
    else:
        centroids = kmeans_pp_init(points, k, seed)

    history: list[float] = []
    iterations = 0
    for _ in range(max_iter):
        labels, mins = _assign(points, centroids, workers)
        _repair_empty(labels, mins, k)
        history.append(float(np.maximum(mins, 0.0).sum()))
        new_centroids = _cluster_means(points, labels, k, centroids)
        shift = float(np.sqrt(((new_centroids - centroids) ** 2).sum(axis=1)).max())
        centroids = new_centroids
        iterations += 1
        if shift < tol:
            break

    labels, mins = _assign(points, centroids, workers)
    _repair_empty(labels, mins, k)
    inertia = float(np.maximum(mins, 0.0).sum())
    history.append(inertia)

    model = KMeansModel(centroids=centroids, inertia=inertia,
                        iterations_run=iterations, inertia_history=tuple(history))
    if ids is None:
        ids = [str(i) for i in range(n)]
    clustering = Clustering({sid: int(lab) for sid, lab in zip(ids, labels)})
    return model, clustering
