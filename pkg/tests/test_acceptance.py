"""Acceptance gate: one test per promised behavior.

Each test prints a single PASS or FAIL line naming the behavior it checks
(visible with -s, or in the captured output on failure), and `pytest -v`
shows the same verdict per test. Tolerances are part of the promise: score
identities are exact, metric worked examples allow 1e-6, graph quality
comparisons allow 1e-9.
"""

import functools
import time

import numpy as np

from lexkit.cli import main as cli_main
from lexkit.distance import dtw_distance, edit_distance, frame_cost_matrix
from lexkit.evaluate import bitrate, ned, purity, v_measure
from lexkit.experiment import (
    Corpus,
    SystemSpec,
    perfect_init,
    perfect_representations,
    run_on_embeddings,
    run_system,
)
from lexkit.io import Clustering, FrameFeatureSequence
from lexkit.synth import SynthConfig, generate, sweep_noise
from lexkit.transform import Codebook, dpdp_smooth, quantize

from builders import build_manifest
from oracles import (
    cpm_best_oracle,
    cpm_quality_oracle,
    dpdp_objective,
    dpdp_oracle,
    dtw_norm_oracle,
    edit_oracle,
)
from test_cluster_graph import hand_graph, membership_of, single_move_improves


def criterion(label):
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            try:
                fn(*args, **kwargs)
            except BaseException:
                print(f"FAIL {label}")
                raise
            print(f"PASS {label}")
        return wrapper
    return deco


def corpus_of(**kw):
    manifest, sequences = generate(SynthConfig(**kw))
    return Corpus(manifest, sequences)


def clustering_for(manifest, cluster_ids):
    return Clustering({seg.segment_id: cid
                       for seg, cid in zip(manifest.segments, cluster_ids)})


@criterion("perfect representations: every method scores purity and V-measure 100.0")
def test_perfect_representations_score_100_for_every_method():
    start = time.perf_counter()
    data = corpus_of(n_types=100, instances_per_type=10, dim=64, mean_len=10,
                     within_type_noise=0.2, seed=42)
    assert len(data.manifest) >= 1000
    assert data.true_k() >= 100
    ideal = perfect_representations(data, "embedding", seed=42)
    for method in ("kmeans", "agglom", "birch", "graph"):
        _, report = run_on_embeddings(SystemSpec("continuous-avg", method),
                                      data, ideal, seed=42)
        assert report.purity == 100.0, (method, report.purity)
        assert report.v_measure == 100.0, (method, report.v_measure)
        assert report.n_clusters == data.true_k()
    assert time.perf_counter() - start < 60.0


@criterion("perfect initialization: fixed point without noise, strict drop with it")
def test_perfect_initialization_is_a_fixed_point_only_without_noise():
    start = time.perf_counter()
    for seed in range(5):
        clean = corpus_of(n_types=10, instances_per_type=10, dim=16,
                          mean_len=10, within_type_noise=0.0, seed=seed)
        for method in ("kmeans", "graph"):
            res = perfect_init(SystemSpec("continuous-avg", method), clean,
                               seed=seed)
            assert res.initial_report.purity == 100.0
            assert res.report.purity == 100.0, (seed, method)
        noisy = corpus_of(n_types=10, instances_per_type=10, dim=16,
                          mean_len=10, within_type_noise=2.0, seed=seed)
        res = perfect_init(SystemSpec("continuous-avg", "kmeans"), noisy,
                           seed=seed)
        assert res.report.purity < 100.0, seed
    assert time.perf_counter() - start < 120.0


@criterion("evaluation metrics match hand-computed worked examples")
def test_metrics_match_worked_examples():
    start = time.perf_counter()
    manifest = build_manifest(["A", "A", "B", "B"])
    h, c, v = v_measure(clustering_for(manifest, [0, 0, 1, 2]), manifest)
    assert abs(h - 100.0) < 1e-6
    assert abs(c - 100.0 * 2.0 / 3.0) < 1e-6
    assert abs(v - 80.0) < 1e-6
    assert abs(purity(clustering_for(manifest, [0, 0, 1, 2]), manifest)
               - 100.0) < 1e-6
    h1, c1, v1 = v_measure(clustering_for(manifest, [0, 0, 0, 0]), manifest)
    assert abs(h1 - 0.0) < 1e-6 and abs(c1 - 100.0) < 1e-6 and abs(v1) < 1e-6

    three = build_manifest(["A", "A", "B"])
    assert abs(purity(clustering_for(three, [0, 0, 0]), three)
               - 200.0 / 3.0) < 1e-6

    uniform = build_manifest(["A"] * 10, duration_each=1.0)
    assert abs(bitrate(clustering_for(uniform, [0, 1] * 5), uniform)
               - 1.0) < 1e-6
    assert abs(bitrate(clustering_for(uniform, [0] * 10), uniform)) < 1e-6

    pair = build_manifest(["A", "A"], phones=[tuple("kitten"),
                                              tuple("sitting")])
    assert abs(ned(clustering_for(pair, [0, 0]), pair)
               - 100.0 * 3.0 / 7.0) < 1e-6
    assert time.perf_counter() - start < 5.0


@criterion("warping and edit distances match exhaustive references")
def test_distances_match_exhaustive_references():
    rng = np.random.default_rng(2026)
    for _ in range(1000):
        ta, tb = int(rng.integers(1, 4)), int(rng.integers(1, 4))
        a = rng.standard_normal((ta, 3))
        b = rng.standard_normal((tb, 3))
        assert dtw_distance(a, b) == dtw_norm_oracle(frame_cost_matrix(a, b))
    for _ in range(1000):
        x, y, z = (rng.integers(0, 5, size=int(rng.integers(0, 8))).tolist()
                   for _ in range(3))
        dxy = edit_distance(x, y)
        assert dxy == edit_oracle(x, y)
        assert dxy == edit_distance(y, x)
        assert edit_distance(x, x) == 0
        assert dxy <= edit_distance(x, z) + edit_distance(z, y)
    kitten = [ord(ch) for ch in "kitten"]
    sitting = [ord(ch) for ch in "sitting"]
    assert edit_distance(kitten, sitting) == 3


@criterion("duration-penalized quantization matches exhaustive enumeration")
def test_duration_penalized_units_match_enumeration():
    rng = np.random.default_rng(77)
    for trial in range(500):
        t_len = int(rng.integers(1, 5))
        k = int(rng.integers(1, 4))
        frames = rng.standard_normal((t_len, 3)).astype(np.float32)
        centroids = rng.standard_normal((k, 3))
        lam = float(rng.uniform(0.0, 2.0))
        cb = Codebook(centroids)
        seq = FrameFeatureSequence(f"t{trial}", frames)
        got = dpdp_smooth(seq, cb, lam).units
        cost = np.sum((seq.frames.astype(np.float64)[:, None, :]
                       - centroids[None, :, :]) ** 2, axis=2)
        best, _ = dpdp_oracle(cost, lam)
        assert dpdp_objective(cost, lam, list(got)) == best
        assert np.array_equal(dpdp_smooth(seq, cb, 0.0).units,
                              quantize(seq, cb).units)


@criterion("graph partitions reach the small-graph optimum or pin a local one")
def test_graph_partitions_reach_or_locally_pin_the_optimum():
    from lexkit.cluster import leiden

    rng = np.random.default_rng(5150)
    for trial in range(200):
        n = int(rng.integers(2, 8))
        gamma = float(rng.uniform(0.2, 1.5))
        edges = [(i, j, float(rng.uniform(0.05, 1.0)))
                 for i in range(n) for j in range(i + 1, n)
                 if rng.random() < 0.55]
        graph = hand_graph(n, edges)
        trace: list = []
        clustering = leiden(graph, gamma, seed=trial, trace=trace)
        assert all(gain > 0.0 for gain in trace)
        membership = membership_of(graph, clustering)
        got = cpm_quality_oracle(edges, membership, gamma)
        best = cpm_best_oracle(n, edges, gamma)
        assert got <= best + 1e-9
        if got < best - 1e-9:
            assert not single_move_improves(graph, membership, gamma), trial


@criterion("sequence matching costs at least 20x the averaged-embedding pipeline")
def test_sequence_matching_cost_dominates():
    data = corpus_of(n_types=50, instances_per_type=10, dim=16, mean_len=25,
                     within_type_noise=0.1, seed=7)
    assert len(data.manifest) == 500
    _, fast = run_system(SystemSpec("continuous-avg", "graph",
                                    hyperparameters={"gamma": 1.0}),
                         data, seed=7)
    _, slow = run_system(SystemSpec("continuous-seq", "graph",
                                    hyperparameters={"gamma": 1.0}),
                         data, seed=7)
    assert slow.runtime_s >= 20.0 * fast.runtime_s, (fast.runtime_s,
                                                     slow.runtime_s)


@criterion("noise, not clustering, limits purity")
def test_noise_not_clustering_limits_purity():
    sigmas = [0.0, 0.05, 0.1, 0.2, 0.5]
    shape = dict(n_types=5, instances_per_type=12, dim=16, mean_len=8)
    per_seed = []
    for seed in range(5):
        rows = sweep_noise(SynthConfig(seed=seed, **shape), sigmas)
        assert [s for s, _ in rows] == sigmas
        per_seed.append([r.purity for _, r in rows])
    means = np.mean(per_seed, axis=0)
    assert means[0] == 100.0
    assert all(b <= a + 1e-9 for a, b in zip(means, means[1:])), means.tolist()
    assert means[-1] < means[0]
    for sigma in sigmas:
        noisy = corpus_of(within_type_noise=sigma, seed=0, **shape)
        ideal = perfect_representations(noisy, "embedding", seed=0)
        _, rep = run_on_embeddings(SystemSpec("continuous-avg", "kmeans"),
                                   noisy, ideal, seed=0)
        assert rep.purity == 100.0, sigma


@criterion("outputs are byte-identical across reruns and worker counts 1 and 8")
def test_outputs_byte_identical_across_runs_and_workers(tmp_path):
    flags = ["--n-types", "6", "--instances-per-type", "5", "--dim", "12",
             "--mean-len", "12", "--noise", "0.1", "--seed", "9"]
    corpora = []
    for name, workers in (("c1", "1"), ("c8", "8")):
        out = tmp_path / name
        assert cli_main(["synth", "generate", *flags, "--out", str(out),
                         "--workers", workers]) == 0
        corpora.append(out)
    one, eight = corpora
    assert (one / "manifest.jsonl").read_bytes() == (eight / "manifest.jsonl").read_bytes()
    for fa in sorted((one / "features").glob("*.lxk")):
        assert fa.read_bytes() == (eight / "features" / fa.name).read_bytes()

    runs = []
    for name, workers in (("r1", "1"), ("r2", "1"), ("r8", "8")):
        out = tmp_path / name
        assert cli_main(["experiment", "run", "--corpus", str(one),
                         "--repr", "continuous-avg", "--method", "kmeans",
                         "--workers", workers, "--out", str(out)]) == 0
        runs.append(out)
    first = runs[0]
    for other in runs[1:]:
        assert (first / "clustering.tsv").read_bytes() == (other / "clustering.tsv").read_bytes()
        assert (first / "report.json").read_bytes() == (other / "report.json").read_bytes()
