import numpy as np
import pytest

from lexkit.cluster import (
    GraphBuilder,
    Partition,
    SimilarityGraph,
    build_graph,
    cpm_quality,
    leiden,
    tune_gamma,
)
from lexkit.distance import DistanceKind, dtw_distance
from lexkit.errors import ArgumentError, ValidationError

from oracles import cpm_best_oracle, cpm_quality_oracle, normalized_edit_oracle


def unit_rows_of(rng, n, d):
    x = rng.standard_normal((n, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def hand_graph(n, edges, threshold=0.5):
    return SimilarityGraph(tuple(f"n{i}" for i in range(n)), tuple(edges),
                           threshold, DistanceKind.COSINE)


def membership_of(graph, clustering):
    return [clustering.assignments[nid] for nid in graph.nodes]


def quality_of(graph, clustering, gamma):
    return cpm_quality(graph, Partition(tuple(membership_of(graph, clustering)), gamma))


def single_move_improves(graph, membership, gamma):
    """True when some node can switch community (or go solo) for a strict gain,
    judged entirely by the reference quality formula."""
    edges = [(i, j, w) for i, j, w in graph.edges]
    base = cpm_quality_oracle(edges, membership, gamma)
    targets = set(membership) | {max(membership) + 1}
    for v in range(len(membership)):
        for target in targets:
            if target == membership[v]:
                continue
            cand = list(membership)
            cand[v] = target
            if cpm_quality_oracle(edges, cand, gamma) > base + 1e-12:
                return True
    return False


def communities_connected(graph, clustering):
    n = len(graph.nodes)
    member = membership_of(graph, clustering)
    intra = [[] for _ in range(n)]
    for i, j, _ in graph.edges:
        if member[i] == member[j]:
            intra[i].append(j)
            intra[j].append(i)
    for comm in set(member):
        nodes = [v for v in range(n) if member[v] == comm]
        seen = {nodes[0]}
        stack = [nodes[0]]
        while stack:
            v = stack.pop()
            for u in intra[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        if len(seen) != len(nodes):
            return False
    return True


# ---------------------------------------------------------------------------
# graph construction
# ---------------------------------------------------------------------------

def test_build_graph_matches_brute_force_cosine(rng):
    emb = unit_rows_of(rng, 18, 5)
    threshold = 0.8
    graph = build_graph(emb, DistanceKind.COSINE, threshold)
    want = {}
    for i in range(18):
        for j in range(i + 1, 18):
            d = 1.0 - float(np.dot(emb[i], emb[j]))
            assert abs(d - threshold) > 1e-9
            if d <= threshold and 1.0 - d > 0.0:
                want[(i, j)] = 1.0 - d
    got = {(i, j): w for i, j, w in graph.edges}
    assert set(got) == set(want)
    for key in want:
        assert got[key] == pytest.approx(want[key], abs=1e-12)


def test_build_graph_matches_brute_force_dtw(rng):
    seqs = [rng.standard_normal((int(rng.integers(3, 7)), 4)) for _ in range(8)]
    threshold = 0.9
    graph = build_graph(seqs, DistanceKind.DTW, threshold)
    got = {(i, j): w for i, j, w in graph.edges}
    want = {}
    for i in range(8):
        for j in range(i + 1, 8):
            d = dtw_distance(seqs[i], seqs[j])
            if d <= threshold and 1.0 - d > 0.0:
                want[(i, j)] = 1.0 - d
    assert got == want


def test_build_graph_matches_brute_force_edit(rng):
    seqs = [list(rng.integers(0, 4, size=int(rng.integers(2, 7))))
            for _ in range(10)]
    threshold = 0.6
    graph = build_graph(seqs, DistanceKind.EDIT, threshold)
    got = {(i, j): w for i, j, w in graph.edges}
    want = {}
    for i in range(10):
        for j in range(i + 1, 10):
            d = normalized_edit_oracle(seqs[i], seqs[j])
            if d <= threshold and 1.0 - d > 0.0:
                want[(i, j)] = 1.0 - d
    assert set(got) == set(want)
    for key in want:
        assert got[key] == pytest.approx(want[key], abs=1e-12)


def test_graph_edge_invariants(rng):
    emb = unit_rows_of(rng, 25, 4)
    graph = build_graph(emb, DistanceKind.COSINE, 0.9)
    seen = set()
    for i, j, w in graph.edges:
        assert 0 <= i < j < 25
        assert 0.0 < w <= 1.0
        assert (i, j) not in seen
        seen.add((i, j))
        assert 1.0 - w <= 0.9 + 1e-15


def test_orthogonal_pair_is_dropped_not_zero_weighted():
    emb = np.array([[1.0, 0.0], [0.0, 1.0]])
    graph = build_graph(emb, DistanceKind.COSINE, 1.5)
    assert graph.edges == ()


def test_duplicate_items_get_weight_one(rng):
    row = unit_rows_of(rng, 1, 6)[0]
    graph = build_graph(np.stack([row, row]), DistanceKind.COSINE, 0.5)
    assert graph.edges == ((0, 1, 1.0),)


def test_incremental_builder_equals_batch(rng):
    emb = unit_rows_of(rng, 15, 5)
    batch = build_graph(emb, DistanceKind.COSINE, 0.8,
                        ids=[f"e{i}" for i in range(15)])
    builder = GraphBuilder(DistanceKind.COSINE, 0.8)
    for i in range(15):
        builder.add(emb[i], f"e{i}")
    inc = builder.graph()
    assert inc.nodes == batch.nodes
    assert inc.edges == batch.edges

    seqs = [rng.standard_normal((int(rng.integers(3, 6)), 3)) for _ in range(7)]
    batch = build_graph(seqs, DistanceKind.DTW, 0.9)
    builder = GraphBuilder(DistanceKind.DTW, 0.9)
    for s in seqs:
        builder.add(s)
    assert builder.graph().edges == batch.edges


def test_worker_count_does_not_change_edges(rng):
    seqs = [rng.standard_normal((int(rng.integers(3, 6)), 3)) for _ in range(9)]
    g1 = build_graph(seqs, DistanceKind.DTW, 0.9, workers=1)
    g2 = build_graph(seqs, DistanceKind.DTW, 0.9, workers=4)
    assert g1.edges == g2.edges


def test_build_graph_rejects_bad_threshold(rng):
    emb = unit_rows_of(rng, 3, 2)
    with pytest.raises(ArgumentError, match="threshold"):
        build_graph(emb, DistanceKind.COSINE, 0.0)
    with pytest.raises(ArgumentError, match="threshold"):
        GraphBuilder(DistanceKind.COSINE, -0.1)
    with pytest.raises(ArgumentError, match="ids"):
        build_graph(emb, DistanceKind.COSINE, 0.5, ids=["a"])


def test_graph_validation_rejects_malformed_edges():
    with pytest.raises(ValidationError, match="self-loop"):
        hand_graph(3, [(1, 1, 0.5)])
    with pytest.raises(ValidationError, match="indices"):
        hand_graph(3, [(2, 1, 0.5)])
    with pytest.raises(ValidationError, match="indices"):
        hand_graph(3, [(0, 3, 0.5)])
    with pytest.raises(ValidationError, match="weight"):
        hand_graph(3, [(0, 1, 0.0)])
    with pytest.raises(ValidationError, match="weight"):
        hand_graph(3, [(0, 1, 1.5)])
    with pytest.raises(ValidationError, match="duplicate"):
        hand_graph(3, [(0, 1, 0.5), (0, 1, 0.4)])


# ---------------------------------------------------------------------------
# quality function
# ---------------------------------------------------------------------------

def test_quality_singletons_on_edgeless_graph_is_zero():
    graph = hand_graph(3, [])
    assert cpm_quality(graph, Partition((0, 1, 2), 0.7)) == 0.0


def test_quality_merged_pair_worked_example():
    graph = hand_graph(2, [(0, 1, 1.0)])
    assert cpm_quality(graph, Partition((0, 0), 0.5)) == 0.5
    assert cpm_quality(graph, Partition((0, 1), 0.5)) == 0.0


def test_quality_matches_reference_on_random_graphs(rng):
    for _ in range(20):
        n = int(rng.integers(3, 12))
        edges = []
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 0.4:
                    edges.append((i, j, float(rng.uniform(0.05, 1.0))))
        graph = hand_graph(n, edges)
        membership = tuple(int(x) for x in rng.integers(0, 4, size=n))
        gamma = float(rng.uniform(0.1, 1.5))
        got = cpm_quality(graph, Partition(membership, gamma))
        want = cpm_quality_oracle(edges, list(membership), gamma)
        assert got == pytest.approx(want, abs=1e-12)


def test_quality_rejects_length_mismatch():
    graph = hand_graph(3, [])
    with pytest.raises(ArgumentError):
        cpm_quality(graph, Partition((0, 1), 0.5))


def test_partition_from_mapping_requires_every_node():
    graph = hand_graph(3, [])
    with pytest.raises(ValidationError, match="n2"):
        Partition.from_mapping(graph, {"n0": 0, "n1": 0}, 0.5)
    p = Partition.from_mapping(graph, {"n0": 4, "n1": 4, "n2": 7}, 0.5)
    assert p.membership == (4, 4, 7)


# ---------------------------------------------------------------------------
# leiden
# ---------------------------------------------------------------------------

def cliques_graph():
    edges = [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0),
             (3, 4, 1.0), (3, 5, 1.0), (4, 5, 1.0),
             (2, 3, 0.1)]
    return hand_graph(6, edges)


def test_two_cliques_with_weak_bridge():
    clustering = leiden(cliques_graph(), gamma=0.5, seed=0)
    labs = [clustering.assignments[f"n{i}"] for i in range(6)]
    assert labs[0] == labs[1] == labs[2]
    assert labs[3] == labs[4] == labs[5]
    assert labs[0] != labs[3]


def test_edgeless_graph_stays_singletons():
    graph = hand_graph(5, [])
    clustering = leiden(graph, gamma=0.3, seed=1)
    assert len(set(clustering.assignments.values())) == 5


def test_tiny_threshold_pipeline_gives_singletons(rng):
    emb = unit_rows_of(rng, 10, 4)
    graph = build_graph(emb, DistanceKind.COSINE, 1e-9)
    assert graph.edges == ()
    clustering = leiden(graph, gamma=0.5, seed=0)
    assert len(set(clustering.assignments.values())) == 10


def test_traced_gains_all_positive(rng):
    for seed in range(4):
        n = 20
        edges = []
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 0.25:
                    edges.append((i, j, float(rng.uniform(0.05, 1.0))))
        graph = hand_graph(n, edges)
        trace = []
        leiden(graph, gamma=0.4, seed=seed, trace=trace)
        assert len(trace) > 0
        assert all(g > 0.0 for g in trace)


def test_initial_partition_never_degrades(rng):
    for seed in range(5):
        n = 14
        edges = []
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 0.3:
                    edges.append((i, j, float(rng.uniform(0.05, 1.0))))
        graph = hand_graph(n, edges)
        gamma = 0.5
        init = {f"n{i}": int(rng.integers(0, 4)) for i in range(n)}
        q_init = cpm_quality(graph, Partition.from_mapping(graph, init, gamma))
        clustering = leiden(graph, gamma, seed=seed, initial=init)
        assert quality_of(graph, clustering, gamma) >= q_init - 1e-12


def test_optimal_initial_partition_is_kept():
    graph = cliques_graph()
    init = {"n0": 0, "n1": 0, "n2": 0, "n3": 1, "n4": 1, "n5": 1}
    clustering = leiden(graph, gamma=0.5, seed=3, initial=init)
    labs = [clustering.assignments[f"n{i}"] for i in range(6)]
    assert labs[0] == labs[1] == labs[2]
    assert labs[3] == labs[4] == labs[5]
    assert labs[0] != labs[3]


def test_small_graphs_reach_or_locally_match_optimum(rng):
    hits = 0
    trials = 60
    for t in range(trials):
        n = int(rng.integers(2, 8))
        edges = []
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 0.5:
                    edges.append((i, j, float(rng.uniform(0.05, 1.0))))
        graph = hand_graph(n, edges)
        gamma = float(rng.choice([0.3, 0.7, 1.2]))
        clustering = leiden(graph, gamma, seed=t)
        got = quality_of(graph, clustering, gamma)
        best = cpm_best_oracle(n, edges, gamma)
        assert got <= best + 1e-9
        if got >= best - 1e-9:
            hits += 1
        else:
            assert not single_move_improves(graph, membership_of(graph, clustering), gamma)
    assert hits >= trials * 0.9


def test_communities_are_connected(rng):
    for seed in range(4):
        n = 30
        edges = []
        for i in range(n):
            for j in range(i + 1, n):
                if rng.random() < 0.12:
                    edges.append((i, j, float(rng.uniform(0.3, 1.0))))
        graph = hand_graph(n, edges)
        clustering = leiden(graph, gamma=0.05, seed=seed)
        assert communities_connected(graph, clustering)


def test_labels_canonical_by_first_appearance():
    clustering = leiden(cliques_graph(), gamma=0.5, seed=0)
    seen = []
    for nid in [f"n{i}" for i in range(6)]:
        lab = clustering.assignments[nid]
        if lab not in seen:
            assert lab == len(seen)
            seen.append(lab)


def test_same_seed_identical(rng):
    n = 25
    edges = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < 0.2:
                edges.append((i, j, float(rng.uniform(0.05, 1.0))))
    graph = hand_graph(n, edges)
    a = leiden(graph, gamma=0.4, seed=9)
    b = leiden(graph, gamma=0.4, seed=9)
    assert a.assignments == b.assignments


def test_leiden_argument_errors():
    graph = cliques_graph()
    with pytest.raises(ArgumentError, match="gamma"):
        leiden(graph, gamma=0.0)
    with pytest.raises(ArgumentError, match="initial"):
        leiden(graph, gamma=0.5, initial=Partition((0, 0), 0.5))


# ---------------------------------------------------------------------------
# resolution tuning
# ---------------------------------------------------------------------------

def test_tune_hits_two_cliques():
    result = tune_gamma(cliques_graph(), target_k=2, seed=0)
    assert result.n_clusters == 2
    assert result.warning is None
    clustering = leiden(cliques_graph(), result.gamma, seed=0)
    assert len(set(clustering.assignments.values())) == 2


def test_tune_reaches_singletons_and_one_cluster():
    graph = cliques_graph()
    high = tune_gamma(graph, target_k=6, seed=0)
    assert high.n_clusters == 6
    assert high.warning is None
    low = tune_gamma(graph, target_k=1, seed=0)
    assert low.n_clusters == 1
    assert low.warning is None


def test_tune_edgeless_graph():
    graph = hand_graph(4, [])
    exact = tune_gamma(graph, target_k=4, seed=0)
    assert (exact.gamma, exact.n_clusters, exact.warning) == (1.0, 4, None)
    missed = tune_gamma(graph, target_k=2, seed=0)
    assert missed.n_clusters == 4
    assert missed.warning is not None


def test_tune_unreachable_count_warns():
    # equal-weight triangle: the count jumps from 1 to 3, never 2
    triangle = hand_graph(3, [(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)])
    result = tune_gamma(triangle, target_k=2, seed=0)
    assert result.warning is not None
    assert result.n_clusters in (1, 3)


def test_tune_argument_errors():
    with pytest.raises(ArgumentError, match="target_k"):
        tune_gamma(cliques_graph(), target_k=0)
    with pytest.raises(ArgumentError, match="empty"):
        tune_gamma(SimilarityGraph((), (), 0.5, DistanceKind.COSINE), target_k=1)
