"""Threshold similarity graphs and Leiden partitioning under the constant
Potts model.

The quality of a partition is Q = sum_c [w_c - gamma * n_c(n_c-1)/2], where
w_c is the total edge weight inside community c and n_c its size counted in
original nodes. Local moving sweeps nodes in a seeded order and accepts only
strictly improving moves; refinement regroups each community into connected
chunks before aggregation, and a final pass at the original-node level
restores single-move local optimality and splits any disconnected community
(both only ever raise Q).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..distance import DistanceKind, _check_items, _pair_value
from ..errors import ArgumentError, ValidationError
from ..io import Clustering
from ..parallel import iter_blocks, run_blocks
from ..seeding import rng_for

_PAIR_BLOCK = 2048


# ---------------------------------------------------------------------------
# Graph construction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimilarityGraph:
    """Undirected threshold graph over segment ids.

    Edges are (i, j, weight) with i < j, weight = 1 - distance in (0, 1];
    a pair appears iff its distance is within the threshold. Nodes with no
    qualifying pair stay isolated.
    """

    nodes: tuple[str, ...]
    edges: tuple[tuple[int, int, float], ...]
    threshold: float
    kind: DistanceKind

    def __post_init__(self) -> None:
        n = len(self.nodes)
        seen = set()
        for i, j, w in self.edges:
            if i == j:
                raise ValidationError(f"graph: self-loop on node {i}")
            if not 0 <= i < j < n:
                raise ValidationError(f"graph: bad edge indices ({i}, {j})")
            if not 0.0 < w <= 1.0:
                raise ValidationError(f"graph: edge ({i}, {j}) weight {w} outside (0, 1]")
            if (i, j) in seen:
                raise ValidationError(f"graph: duplicate edge ({i}, {j})")
            seen.add((i, j))

    def adjacency(self) -> tuple[list[np.ndarray], list[np.ndarray]]:
        """Per-node neighbor index and weight arrays, neighbors ascending."""
        n = len(self.nodes)
        nbr: list[list[tuple[int, float]]] = [[] for _ in range(n)]
        for i, j, w in self.edges:
            nbr[i].append((j, w))
            nbr[j].append((i, w))
        idx, wts = [], []
        for lst in nbr:
            lst.sort()
            idx.append(np.array([u for u, _ in lst], dtype=np.int64))
            wts.append(np.array([w for _, w in lst], dtype=np.float64))
        return idx, wts


def _prefix_distances(prepared, kind: DistanceKind, i: int,
                      workers: int | None) -> np.ndarray:
    """Distances from item i to items 0..i-1, one fixed code path per kind."""
    if kind is DistanceKind.COSINE:
        dists = 1.0 - prepared[:i] @ prepared[i]
        # dots of duplicate rows land at 1 +- ulp; pin true duplicates to 0
        for j in np.flatnonzero(np.abs(dists) < 1e-9):
            if np.array_equal(prepared[j], prepared[i]):
                dists[j] = 0.0
        return dists
    out = np.empty(i, dtype=np.float64)

    def block(lo: int, hi: int) -> None:
        for j in range(lo, hi):
            out[j] = _pair_value(prepared, kind, j, i)

    run_blocks(block, iter_blocks(i, _PAIR_BLOCK), workers)
    return out


def _filter_edges(i: int, dists: np.ndarray, threshold: float,
                  edges: list[tuple[int, int, float]]) -> None:
    for j in np.flatnonzero(dists <= threshold):
        w = 1.0 - dists[j]
        if w > 1.0:
            w = 1.0  # distance rounded a hair below zero without being a duplicate
        if w > 0.0:
            edges.append((int(j), i, float(w)))


class GraphBuilder:
    """Incremental construction: feed items one at a time, read the graph at
    any point. Produces the identical edge set to `build_graph` because both
    run the same per-node distance routine against the same stored items."""

    def __init__(self, kind: DistanceKind, threshold: float,
                 workers: int | None = None) -> None:
        if threshold <= 0:
            raise ArgumentError(f"graph threshold must be positive, got {threshold}")
        self.kind = kind
        self.threshold = float(threshold)
        self._workers = workers
        self._ids: list[str] = []
        self._prepared: list | np.ndarray | None = None
        self._count = 0
        self._edges: list[tuple[int, int, float]] = []

    def add(self, item, node_id: str | None = None) -> None:
        prep = _check_items([item], self.kind)
        i = self._count
        if self.kind is DistanceKind.COSINE:
            row = prep[0]
            if self._prepared is None:
                self._prepared = np.empty((4, len(row)), dtype=np.float64)
            elif i == len(self._prepared):
                grown = np.empty((2 * i, len(row)), dtype=np.float64)
                grown[:i] = self._prepared[:i]
                self._prepared = grown
            self._prepared[i] = row
        else:
            if self._prepared is None:
                self._prepared = []
            if (self.kind is DistanceKind.DTW and self._prepared
                    and prep[0].shape[1] != self._prepared[0].shape[1]):
                raise ArgumentError(
                    f"graph add: feature dimension {prep[0].shape[1]} != "
                    f"{self._prepared[0].shape[1]}")
            self._prepared.append(prep[0])
        self._ids.append(node_id if node_id is not None else str(i))
        self._count = i + 1
        if i > 0:
            dists = _prefix_distances(self._prepared, self.kind, i, self._workers)
            _filter_edges(i, dists, self.threshold, self._edges)

    def graph(self) -> SimilarityGraph:
        return SimilarityGraph(tuple(self._ids), tuple(self._edges),
                               self.threshold, self.kind)


def build_graph(items, kind: DistanceKind, threshold: float,
                ids: list[str] | None = None,
                workers: int | None = None) -> SimilarityGraph:
    """Graph with an edge wherever distance(i, j) <= threshold.

    Streams one node at a time against the already-seen prefix, so memory
    stays O(n + edges) regardless of n; no dense distance table is built.
    """
    if threshold <= 0:
        raise ArgumentError(f"graph threshold must be positive, got {threshold}")
    prepared = _check_items(items, kind)
    n = len(items)
    edges: list[tuple[int, int, float]] = []
    for i in range(1, n):
        dists = _prefix_distances(prepared, kind, i, workers)
        _filter_edges(i, dists, float(threshold), edges)
    if ids is None:
        ids = [str(i) for i in range(n)]
    elif len(ids) != n:
        raise ArgumentError(f"build_graph: {len(ids)} ids for {n} items")
    return SimilarityGraph(tuple(ids), tuple(edges), float(threshold), kind)


# ---------------------------------------------------------------------------
# Constant Potts model
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Partition:
    """Community membership aligned to a graph's node order."""

    membership: tuple[int, ...]
    gamma: float

    @classmethod
    def from_mapping(cls, graph: SimilarityGraph, mapping: dict[str, int],
                     gamma: float) -> "Partition":
        missing = [nid for nid in graph.nodes if nid not in mapping]
        if missing:
            raise ValidationError(f"partition misses {len(missing)} nodes, "
                                  f"first: {missing[0]}")
        return cls(tuple(int(mapping[nid]) for nid in graph.nodes), gamma)


def cpm_quality(graph: SimilarityGraph, p: Partition) -> float:
    """Q = sum over communities of [internal weight - gamma * pairs]."""
    labels = np.asarray(p.membership)
    if len(labels) != len(graph.nodes):
        raise ArgumentError("partition length does not match graph")
    _, compact = np.unique(labels, return_inverse=True)
    m = int(compact.max()) + 1 if len(compact) else 0
    w_in = np.zeros(m, dtype=np.float64)
    for i, j, w in graph.edges:
        if compact[i] == compact[j]:
            w_in[compact[i]] += w
    counts = np.bincount(compact, minlength=m).astype(np.float64)
    return float(w_in.sum() - p.gamma * (counts * (counts - 1.0) / 2.0).sum())


# ---------------------------------------------------------------------------
# Leiden
# ---------------------------------------------------------------------------

class _Level:
    """One aggregation level: adjacency arrays plus node sizes/self-loops."""

    __slots__ = ("n", "adj_idx", "adj_w", "sizes", "self_w")

    def __init__(self, n, adj_idx, adj_w, sizes, self_w):
        self.n = n
        self.adj_idx = adj_idx
        self.adj_w = adj_w
        self.sizes = sizes
        self.self_w = self_w


def _base_level(graph: SimilarityGraph) -> _Level:
    idx, wts = graph.adjacency()
    n = len(graph.nodes)
    return _Level(n, idx, wts, np.ones(n, dtype=np.float64),
                  np.zeros(n, dtype=np.float64))


def _compact(labels: np.ndarray) -> np.ndarray:
    """Relabel to 0..m-1 by first appearance (stable, deterministic)."""
    seen: dict[int, int] = {}
    out = np.empty(len(labels), dtype=np.int64)
    for i, lab in enumerate(labels):
        out[i] = seen.setdefault(int(lab), len(seen))
    return out


def _local_move(level: _Level, labels: np.ndarray, gamma: float,
                rng: np.random.Generator,
                trace: list[float] | None) -> bool:
    """Sweep nodes in seeded order, moving each to its best community while
    any strictly improving single move exists. Mutates `labels`."""
    n = level.n
    comm_sizes = np.zeros(int(labels.max()) + 1 + n, dtype=np.float64)
    np.add.at(comm_sizes, labels, level.sizes)
    n_slots = len(comm_sizes)
    moved_any = False
    while True:
        moved_pass = False
        for v in rng.permutation(n):
            a = int(labels[v])
            w_to: dict[int, float] = {}
            for u, w in zip(level.adj_idx[v], level.adj_w[v]):
                c = int(labels[u])
                w_to[c] = w_to.get(c, 0.0) + w
            w_a = w_to.get(a, 0.0)
            s = level.sizes[v]
            rest_a = comm_sizes[a] - s
            best_c, best_gain = a, 0.0
            for c in sorted(w_to):
                if c == a:
                    continue
                gain = (w_to[c] - w_a) - gamma * s * (comm_sizes[c] - rest_a)
                if gain > best_gain:
                    best_c, best_gain = c, gain
            if rest_a > 0.0:
                # a fresh empty community; dominates every non-neighbor target
                gain = -w_a - gamma * s * (0.0 - rest_a)
                if gain > best_gain:
                    free = int(np.flatnonzero(comm_sizes == 0.0)[0]) \
                        if (comm_sizes == 0.0).any() else n_slots
                    if free == n_slots:
                        comm_sizes = np.concatenate(
                            [comm_sizes, np.zeros(n, dtype=np.float64)])
                        n_slots = len(comm_sizes)
                    best_c, best_gain = free, gain
            if best_c != a:
                comm_sizes[a] -= s
                comm_sizes[best_c] += s
                labels[v] = best_c
                moved_pass = True
                if trace is not None:
                    trace.append(best_gain)
        if not moved_pass:
            break
        moved_any = True
    return moved_any


def _refine(level: _Level, labels: np.ndarray, gamma: float,
            rng: np.random.Generator) -> np.ndarray:
    """Regroup each community from singletons by strictly improving merges.

    A node merges only along an edge (the gain needs positive weight), so
    every refined group is connected inside its community.
    """
    n = level.n
    refined = np.arange(n, dtype=np.int64)
    group_sizes = level.sizes.astype(np.float64).copy()
    for v in rng.permutation(n):
        r = int(refined[v])
        if group_sizes[r] != level.sizes[v]:
            continue  # v is no longer alone in its refined group
        w_to: dict[int, float] = {}
        for u, w in zip(level.adj_idx[v], level.adj_w[v]):
            if labels[u] == labels[v] and refined[u] != r:
                d = int(refined[u])
                w_to[d] = w_to.get(d, 0.0) + w
        s = level.sizes[v]
        best_d, best_gain = r, 0.0
        for d in sorted(w_to):
            gain = w_to[d] - gamma * s * group_sizes[d]
            if gain > best_gain:
                best_d, best_gain = d, gain
        if best_d != r:
            group_sizes[r] -= s
            group_sizes[best_d] += s
            refined[v] = best_d
    return refined


def _aggregate(level: _Level, refined: np.ndarray,
               labels: np.ndarray) -> tuple[_Level, np.ndarray, np.ndarray]:
    """Collapse refined groups into super-nodes.

    Returns (next level, next labels carrying each group's community, and the
    node -> super-node projection).
    """
    proj = _compact(refined)
    m = int(proj.max()) + 1
    sizes = np.zeros(m, dtype=np.float64)
    np.add.at(sizes, proj, level.sizes)
    self_w = np.zeros(m, dtype=np.float64)
    np.add.at(self_w, proj, level.self_w)
    acc: dict[tuple[int, int], float] = {}
    for v in range(level.n):
        pv = int(proj[v])
        for u, w in zip(level.adj_idx[v], level.adj_w[v]):
            if u <= v:
                continue
            pu = int(proj[u])
            if pu == pv:
                self_w[pv] += w
            else:
                key = (pv, pu) if pv < pu else (pu, pv)
                acc[key] = acc.get(key, 0.0) + w
    adj: list[list[tuple[int, float]]] = [[] for _ in range(m)]
    for (a, b), w in sorted(acc.items()):
        adj[a].append((b, w))
        adj[b].append((a, w))
    adj_idx, adj_w = [], []
    for lst in adj:
        lst.sort()
        adj_idx.append(np.array([u for u, _ in lst], dtype=np.int64))
        adj_w.append(np.array([w for _, w in lst], dtype=np.float64))
    next_labels = np.empty(m, dtype=np.int64)
    next_labels[proj] = labels  # every member carries the same community
    return _Level(m, adj_idx, adj_w, sizes, self_w), next_labels, proj


def _split_disconnected(level: _Level, labels: np.ndarray) -> bool:
    """Give each connected component of a community its own label. Splitting
    removes no internal edge weight and shrinks the size penalty, so quality
    strictly increases whenever this changes anything."""
    next_label = int(labels.max()) + 1
    changed = False
    for comm in np.unique(labels):
        members = np.flatnonzero(labels == comm)
        if len(members) <= 1:
            continue
        member_set = set(int(x) for x in members)
        unvisited = set(member_set)
        first = True
        while unvisited:
            start = min(unvisited)
            comp = []
            stack = [start]
            unvisited.discard(start)
            while stack:
                x = stack.pop()
                comp.append(x)
                for u in level.adj_idx[x]:
                    ui = int(u)
                    if ui in unvisited:
                        unvisited.discard(ui)
                        stack.append(ui)
            if first:
                first = False
            else:
                labels[comp] = next_label
                next_label += 1
                changed = True
    return changed


def leiden(graph: SimilarityGraph, gamma: float, seed: int = 0,
           initial: Partition | dict[str, int] | None = None,
           trace: list[float] | None = None) -> Clustering:
    """Partition the graph by maximizing CPM quality at resolution gamma.

    Runs local moving / refinement / aggregation rounds, then polishes at the
    original-node level until no single-node move improves quality and every
    community is connected. With `initial`, optimization starts from that
    partition and the result's quality never falls below it. `trace`, when
    given, collects the quality gain of every accepted move.
    """
    if gamma <= 0:
        raise ArgumentError(f"leiden: gamma must be positive, got {gamma}")
    n = len(graph.nodes)
    if n == 0:
        return Clustering({})
    if initial is None:
        labels = np.arange(n, dtype=np.int64)
    else:
        if isinstance(initial, dict):
            initial = Partition.from_mapping(graph, initial, gamma)
        if len(initial.membership) != n:
            raise ArgumentError("leiden: initial partition length mismatch")
        labels = _compact(np.asarray(initial.membership, dtype=np.int64))
    rng = rng_for(seed, "leiden")
    base = _base_level(graph)

    level, node_map = base, np.arange(n, dtype=np.int64)
    while True:
        moved = _local_move(level, labels, gamma, rng, trace)
        labels = _compact(labels)
        if int(labels.max()) + 1 == level.n:
            break
        refined = _refine(level, labels, gamma, rng)
        next_level, next_labels, proj = _aggregate(level, refined, labels)
        node_map = proj[node_map]
        shrunk = next_level.n < level.n
        level, labels = next_level, next_labels
        if not shrunk and not moved:
            break

    base_labels = _compact(labels[node_map])
    while True:
        split_changed = _split_disconnected(base, base_labels)
        moved = _local_move(base, base_labels, gamma, rng, trace)
        if not split_changed and not moved:
            break
    base_labels = _compact(base_labels)
    return Clustering({nid: int(lab) for nid, lab in zip(graph.nodes, base_labels)})


# ---------------------------------------------------------------------------
# Resolution tuning
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TuneResult:
    """Chosen resolution plus the cluster count it produced; `warning` is set
    when the target count was not met within the evaluation budget."""

    gamma: float
    n_clusters: int
    warning: str | None = field(default=None)


def tune_gamma(graph: SimilarityGraph, target_k: int, seed: int = 0,
               budget: int = 40) -> TuneResult:
    """Search for a gamma whose Leiden cluster count is closest to target_k.

    Cluster count grows with gamma in practice (not guaranteed), so this
    brackets by geometric expansion and then bisects, stopping early on an
    exact hit.
    """
    if target_k < 1:
        raise ArgumentError(f"tune_gamma: target_k must be >= 1, got {target_k}")
    n = len(graph.nodes)
    if n == 0:
        raise ArgumentError("tune_gamma: empty graph")
    if not graph.edges:
        warning = None if target_k == n else (
            f"graph has no edges; every gamma yields {n} singletons, "
            f"target {target_k} unreachable")
        return TuneResult(1.0, n, warning)

    evals: list[tuple[float, int]] = []

    def count(g: float) -> int:
        c = len(set(leiden(graph, g, seed).assignments.values()))
        evals.append((g, c))
        return c

    g = 1.0
    c = count(g)
    lo = hi = None
    if c < target_k:
        lo = (g, c)
        while len(evals) < budget:
            g *= 4.0
            c = count(g)
            if c >= target_k:
                hi = (g, c)
                break
            lo = (g, c)
    elif c > target_k:
        hi = (g, c)
        while len(evals) < budget:
            g /= 4.0
            c = count(g)
            if c <= target_k:
                lo = (g, c)
                break
            hi = (g, c)

    def best() -> tuple[float, int]:
        return min(evals, key=lambda t: (abs(t[1] - target_k), t[0]))

    if any(cc == target_k for _, cc in evals):
        g, c = best()
        return TuneResult(g, c, None)
    if lo is None or hi is None:
        g, c = best()
        return TuneResult(g, c, f"bracketing exhausted the budget; closest count {c}")

    while len(evals) < budget:
        mid = float(np.sqrt(lo[0] * hi[0]))
        if not (lo[0] < mid < hi[0]):
            break  # bracket collapsed to float resolution
        c = count(mid)
        if c == target_k:
            return TuneResult(mid, c, None)
        if c < target_k:
            lo = (mid, c)
        else:
            hi = (mid, c)

    g, c = best()
    return TuneResult(g, c, f"budget exhausted; closest count {c} for target {target_k}")
