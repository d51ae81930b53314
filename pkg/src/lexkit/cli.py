"""Command-line entry point.

Subcommands mirror the library modules: synth, transform, distance, cluster,
evaluate, experiment. Every command that writes outputs also writes a
run.json beside them recording the resolved arguments, package versions,
kernel backend and wall-clock time, so a run can be reproduced exactly. Data
outputs (features, units, embeddings, distance tables, clustering.tsv,
report.json) are byte-identical across reruns and worker counts; wall clock
lives only in run.json.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .cluster import agglomerative_ward, birch, build_graph, kmeans, leiden, tune_gamma
from .distance import DistanceKind, pairwise_distances, write_triangular
from .errors import ArgumentError, LexkitError
from .evaluate import evaluate_all, ned
from .experiment import (
    Corpus,
    SystemSpec,
    compare_systems,
    default_specs,
    perfect_init,
    perfect_representations,
    render_report_table,
    run_on_embeddings,
    run_system,
    with_sequences,
)
from .io import (
    DTYPE_F32,
    read_clustering,
    read_embeddings,
    read_features,
    read_manifest,
    read_units,
    write_clustering,
    write_embeddings,
    write_features,
    write_manifest,
    write_matrix,
    write_report,
    write_units,
)
from .kernels import backend
from .synth import SynthConfig, generate, sweep_noise
from .transform import (
    DEFAULT_CODEBOOK_SIZE,
    apply_pca,
    dpdp_smooth,
    embed_all,
    fit_pca,
    normalize_mean_variance,
    quantize,
    train_codebook,
)

log = logging.getLogger("lexkit")


def _version_string() -> str:
    return (f"lexkit {__version__} (kernels: {backend()}, numpy {np.__version__}, "
            f"python {sys.version.split()[0]})")


def _json_safe(value):
    if isinstance(value, Path):
        return str(value)
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    return value


def _write_run_metadata(out_dir: Path, args: argparse.Namespace,
                        wall_clock_s: float, extra: dict | None = None) -> None:
    resolved = {k: _json_safe(v) for k, v in vars(args).items()
                if k not in ("func", "command_path")}
    payload = {
        "command": args.command_path,
        "arguments": resolved,
        "versions": {"lexkit": __version__, "numpy": np.__version__,
                     "python": sys.version.split()[0]},
        "kernel_backend": backend(),
        "wall_clock_s": wall_clock_s,
    }
    if extra:
        payload.update(_json_safe(extra))
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "run.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _load_corpus(directory: str) -> Corpus:
    return Corpus.load(directory)


def _print_report(report, name: str = "report") -> None:
    print(render_report_table([(name, report)]))
    print(json.dumps(report.to_dict(), indent=2))


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------

def _synth_config(args: argparse.Namespace) -> SynthConfig:
    base: dict = {}
    if args.config:
        base = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if not isinstance(base, dict):
            raise ArgumentError(f"{args.config}: config must be a JSON object")
    overrides = {
        "n_types": args.n_types, "instances_per_type": args.instances_per_type,
        "dim": args.dim, "mean_len": args.mean_len,
        "within_type_noise": args.noise, "length_jitter": args.jitter,
        "phone_alphabet_size": args.phone_alphabet_size, "seed": args.seed,
    }
    base.update({k: v for k, v in overrides.items() if v is not None})
    return SynthConfig.from_dict(base)


def cmd_synth_generate(args: argparse.Namespace) -> int:
    config = _synth_config(args)
    out = Path(args.out)
    start = time.perf_counter()
    manifest, sequences = generate(config, workers=args.workers)
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(manifest, out / "manifest.jsonl")
    (out / "features").mkdir(exist_ok=True)
    write_features(sequences, out / "features")
    wall = time.perf_counter() - start
    _write_run_metadata(out, args, wall, {"config": config.to_dict(),
                                          "n_segments": len(manifest)})
    print(f"wrote {len(manifest)} segments to {out}")
    return 0


def cmd_synth_sweep(args: argparse.Namespace) -> int:
    config = _synth_config(args)
    sigmas = [float(s) for s in args.sigmas.split(",") if s.strip() != ""]
    if not sigmas:
        raise ArgumentError("--sigmas must list at least one value")
    spec = SystemSpec(args.repr, args.method) if args.repr else None
    start = time.perf_counter()
    rows = sweep_noise(config, sigmas, spec=spec, workers=args.workers)
    wall = time.perf_counter() - start
    print(render_report_table([(f"sigma={s:g}", r) for s, r in rows]))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with (out / "sweep.jsonl").open("w", encoding="utf-8") as fh:
            for s, r in rows:
                row = {"sigma": s, **r.to_dict()}
                row["runtime_s"] = None  # wall clock lives in run.json only
                fh.write(json.dumps(row) + "\n")
        _write_run_metadata(out, args, wall, {"config": config.to_dict()})
    return 0


# ---------------------------------------------------------------------------
# transform
# ---------------------------------------------------------------------------

def cmd_transform_normalize(args: argparse.Namespace) -> int:
    manifest = read_manifest(args.manifest)
    sequences = read_features(args.features, manifest)
    out = Path(args.out)
    start = time.perf_counter()
    normed, (mean, std) = normalize_mean_variance(sequences)
    (out / "features").mkdir(parents=True, exist_ok=True)
    write_features(normed, out / "features")
    write_matrix(out / "stats.lxk",
                 np.stack([mean, std]).astype(np.float32), DTYPE_F32)
    wall = time.perf_counter() - start
    _write_run_metadata(out, args, wall)
    print(f"wrote normalized features for {len(manifest)} segments to {out}")
    return 0


def cmd_transform_embed(args: argparse.Namespace) -> int:
    manifest = read_manifest(args.manifest)
    sequences = read_features(args.features, manifest)
    out = Path(args.out)
    start = time.perf_counter()
    normed, _ = normalize_mean_variance(sequences)
    dim = normed[0].dim
    total = sum(s.num_frames for s in normed)
    d = min(args.pca_dim, dim, total - 1)
    projection = fit_pca(normed, d)
    embeddings = embed_all([apply_pca(s, projection) for s in normed])
    out.mkdir(parents=True, exist_ok=True)
    projection.save(out / "pca.lxk")
    write_embeddings(embeddings, out / "embeddings.lxk")
    wall = time.perf_counter() - start
    _write_run_metadata(out, args, wall, {"pca_dim_used": d})
    print(f"wrote {embeddings.shape[0]} x {embeddings.shape[1]} embeddings to {out}")
    return 0


def cmd_transform_quantize(args: argparse.Namespace) -> int:
    manifest = read_manifest(args.manifest)
    sequences = read_features(args.features, manifest)
    out = Path(args.out)
    start = time.perf_counter()
    cb = train_codebook(sequences, size=args.codebook_size, seed=args.seed)
    if args.lam > 0.0:
        units = [dpdp_smooth(s, cb, args.lam) for s in sequences]
    else:
        units = [quantize(s, cb) for s in sequences]
    (out / "units").mkdir(parents=True, exist_ok=True)
    cb.save(out / "codebook.lxk")
    write_units(units, out / "units")
    wall = time.perf_counter() - start
    _write_run_metadata(out, args, wall)
    print(f"wrote unit sequences for {len(manifest)} segments to {out}")
    return 0


# ---------------------------------------------------------------------------
# distance
# ---------------------------------------------------------------------------

def _load_items(args: argparse.Namespace, manifest):
    given = [name for name in ("embeddings", "features", "units")
             if getattr(args, name, None)]
    if len(given) != 1:
        raise ArgumentError(
            "exactly one of --embeddings, --features, --units is required")
    source = given[0]
    if source == "embeddings":
        return read_embeddings(args.embeddings, manifest), DistanceKind.COSINE
    if source == "features":
        return read_features(args.features, manifest), DistanceKind.DTW
    return read_units(args.units, manifest), DistanceKind.EDIT


def cmd_distance_pairwise(args: argparse.Namespace) -> int:
    manifest = read_manifest(args.manifest)
    items, inferred = _load_items(args, manifest)
    kind = DistanceKind(args.kind) if args.kind else inferred
    if kind is not inferred:
        raise ArgumentError(
            f"--kind {kind.value} does not match the given input "
            f"(expected {inferred.value})")
    out = Path(args.out)
    start = time.perf_counter()
    table = pairwise_distances(items, kind, budget_bytes=args.budget_bytes,
                               workers=args.workers)
    out.mkdir(parents=True, exist_ok=True)
    write_triangular(table, kind, out / "distances.lxt")
    wall = time.perf_counter() - start
    _write_run_metadata(out, args, wall, {"kind": kind.value, "n": len(items)})
    print(f"wrote {len(items)} x {len(items)} {kind.value} distances to {out}")
    return 0


# ---------------------------------------------------------------------------
# cluster
# ---------------------------------------------------------------------------

_GRAPH_DEFAULT_THRESHOLDS = {DistanceKind.COSINE: 0.4, DistanceKind.DTW: 0.35,
                             DistanceKind.EDIT: 0.65}


def cmd_cluster_run(args: argparse.Namespace) -> int:
    manifest = read_manifest(args.manifest)
    items, kind = _load_items(args, manifest)
    ids = manifest.segment_ids
    out = Path(args.out)
    extra: dict = {}

    start = time.perf_counter()
    if args.method in ("kmeans", "birch", "agglom"):
        if kind is not DistanceKind.COSINE:
            raise ArgumentError(f"{args.method} requires --embeddings")
        if args.k is None:
            raise ArgumentError(f"{args.method} requires --k")
        if args.method == "kmeans":
            _, clustering = kmeans(items, args.k, seed=args.seed,
                                   max_iter=args.max_iter, tol=args.tol,
                                   ids=ids, workers=args.workers)
        elif args.method == "birch":
            clustering = birch(items, args.k, threshold=args.birch_threshold,
                               branching=args.branching, ids=ids)
        else:
            clustering = agglomerative_ward(items, args.k, ids=ids)
    else:
        threshold = args.threshold
        if threshold is None:
            threshold = _GRAPH_DEFAULT_THRESHOLDS[kind]
        graph = build_graph(items, kind, threshold, ids=ids,
                            workers=args.workers)
        gamma = args.gamma
        if gamma is None:
            if args.k is None:
                raise ArgumentError("graph clustering needs --gamma or --k")
            tuned = tune_gamma(graph, args.k, seed=args.seed)
            gamma = tuned.gamma
            extra["tuned_gamma"] = tuned.gamma
            if tuned.warning:
                extra["tuning_warning"] = tuned.warning
                log.warning("%s", tuned.warning)
        clustering = leiden(graph, gamma, seed=args.seed)
        extra["threshold"] = threshold
        extra["gamma"] = gamma
    wall = time.perf_counter() - start

    out.mkdir(parents=True, exist_ok=True)
    write_clustering(clustering, out / "clustering.tsv", manifest=manifest)
    _write_run_metadata(out, args, wall, extra)
    print(f"wrote {clustering.n_clusters()} clusters over {len(manifest)} "
          f"segments to {out}")
    return 0


# ---------------------------------------------------------------------------
# evaluate
# ---------------------------------------------------------------------------

def cmd_evaluate(args: argparse.Namespace) -> int:
    manifest = read_manifest(args.manifest)
    clustering = read_clustering(args.clustering, manifest=manifest)
    report = evaluate_all(clustering, manifest, runtime_s=args.runtime_s)
    _print_report(report, name=Path(args.clustering).stem)
    if args.per_pair_ned:
        value = ned(clustering, manifest, per_pair=True)
        print(f"ned_per_pair: {'-' if value is None else f'{value:.6f}'}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_report(report.to_dict(), out / "report.json")
        _write_run_metadata(out, args, 0.0)
    return 0


# ---------------------------------------------------------------------------
# experiment
# ---------------------------------------------------------------------------

def _spec_from_args(args: argparse.Namespace) -> SystemSpec:
    hyp: dict = {}
    for field in ("k", "gamma", "threshold", "pca_dim", "codebook_size",
                  "lam", "birch_threshold", "branching"):
        value = getattr(args, field, None)
        if value is not None:
            hyp[field] = value
    return SystemSpec(args.repr, args.method, hyperparameters=hyp)


def _write_experiment_outputs(out_dir: Path, clustering, report, manifest,
                              args: argparse.Namespace, wall: float,
                              extra: dict | None = None) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    write_clustering(clustering, out_dir / "clustering.tsv", manifest=manifest)
    # wall clock lives in run.json only, keeping report.json byte-stable
    payload = report.to_dict()
    payload["runtime_s"] = None
    write_report(payload, out_dir / "report.json")
    _write_run_metadata(out_dir, args, wall, extra)


def cmd_experiment_run(args: argparse.Namespace) -> int:
    data = _load_corpus(args.corpus)
    spec = _spec_from_args(args)
    start = time.perf_counter()
    clustering, report = run_system(spec, data, seed=args.seed,
                                    workers=args.workers)
    wall = time.perf_counter() - start
    _print_report(report, name=spec.name)
    if args.out:
        _write_experiment_outputs(Path(args.out), clustering, report,
                                  data.manifest, args, wall,
                                  {"system": spec.to_dict()})
    return 0


def cmd_experiment_compare(args: argparse.Namespace) -> int:
    data = _load_corpus(args.corpus)
    if args.config:
        entries = json.loads(Path(args.config).read_text(encoding="utf-8"))
        if not isinstance(entries, list) or not entries:
            raise ArgumentError(f"{args.config}: expected a JSON list of systems")
        specs = [SystemSpec.from_dict(entry) for entry in entries]
    else:
        specs = default_specs()
    start = time.perf_counter()
    rows = compare_systems(specs, data, seed=args.seed, workers=args.workers)
    wall = time.perf_counter() - start
    print(render_report_table([(spec.name, r) for spec, r in rows]))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        with (out / "compare.jsonl").open("w", encoding="utf-8") as fh:
            for spec, r in rows:
                row = {"system": spec.name, **r.to_dict()}
                row["runtime_s"] = None  # wall clock lives in run.json only
                fh.write(json.dumps(row) + "\n")
        _write_run_metadata(out, args, wall)
    return 0


def cmd_experiment_perfect_init(args: argparse.Namespace) -> int:
    data = _load_corpus(args.corpus)
    spec = _spec_from_args(args)
    start = time.perf_counter()
    result = perfect_init(spec, data, seed=args.seed, workers=args.workers)
    wall = time.perf_counter() - start
    print(render_report_table([
        (f"{spec.name} (initial)", result.initial_report),
        (f"{spec.name} (converged)", result.report),
    ]))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_report(result.initial_report.to_dict(), out / "initial_report.json")
        _write_experiment_outputs(out, result.clustering, result.report,
                                  data.manifest, args, wall,
                                  {"system": spec.to_dict()})
    return 0


def cmd_experiment_perfect_repr(args: argparse.Namespace) -> int:
    data = _load_corpus(args.corpus)
    spec = _spec_from_args(args)
    start = time.perf_counter()
    if args.mode == "embedding":
        if spec.representation != "continuous-avg":
            raise ArgumentError(
                "embedding mode pairs with continuous-avg systems; "
                "use --mode sequence for sequence representations")
        ideal = perfect_representations(data, "embedding",
                                        noise_sigma=args.sigma, seed=args.seed,
                                        pca_dim=getattr(args, "pca_dim", None))
        clustering, report = run_on_embeddings(spec, data, ideal,
                                               seed=args.seed,
                                               workers=args.workers)
    else:
        ideal = perfect_representations(data, "sequence", seed=args.seed)
        clustering, report = run_system(spec, with_sequences(data, ideal),
                                        seed=args.seed, workers=args.workers)
    wall = time.perf_counter() - start
    _print_report(report, name=f"{spec.name} (perfect {args.mode})")
    if args.out:
        _write_experiment_outputs(Path(args.out), clustering, report,
                                  data.manifest, args, wall,
                                  {"system": spec.to_dict(), "mode": args.mode})
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _add_synth_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file with generator settings")
    p.add_argument("--n-types", dest="n_types", type=int)
    p.add_argument("--instances-per-type", dest="instances_per_type", type=int)
    p.add_argument("--dim", type=int)
    p.add_argument("--mean-len", dest="mean_len", type=int)
    p.add_argument("--noise", type=float, help="within-type noise sigma")
    p.add_argument("--jitter", type=float, help="length jitter fraction")
    p.add_argument("--phone-alphabet-size", dest="phone_alphabet_size", type=int)
    p.add_argument("--seed", type=int)


def _add_workers(p: argparse.ArgumentParser) -> None:
    p.add_argument("--workers", type=int, default=None,
                   help="worker threads (default: $LEXKIT_WORKERS or 1); "
                        "results are identical for any value")


def _add_system_flags(p: argparse.ArgumentParser, methods=("kmeans", "birch",
                                                           "agglom", "graph")) -> None:
    p.add_argument("--repr", required=True,
                   choices=("continuous-avg", "continuous-seq", "discrete-seq"))
    p.add_argument("--method", required=True, choices=methods)
    p.add_argument("--k", type=int, default=None,
                   help="cluster count (default: true type count)")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--threshold", type=float, default=None)
    p.add_argument("--pca-dim", dest="pca_dim", type=int, default=None)
    p.add_argument("--codebook-size", dest="codebook_size", type=int, default=None)
    p.add_argument("--lam", type=float, default=None,
                   help="duration penalty for unit smoothing")
    p.add_argument("--birch-threshold", dest="birch_threshold", type=float,
                   default=None)
    p.add_argument("--branching", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lexkit",
        description="Zero-resource word clustering toolkit: synthesize or "
                    "ingest word-segment features, embed or discretize them, "
                    "cluster, and score against ground truth.")
    parser.add_argument("--version", action="version", version=_version_string())
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="-v for info, -vv for debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    # synth
    synth_p = sub.add_parser("synth", help="synthetic corpus generation")
    synth_sub = synth_p.add_subparsers(dest="subcommand", required=True)
    g = synth_sub.add_parser("generate", help="write a synthetic corpus")
    _add_synth_config_flags(g)
    g.add_argument("--out", required=True)
    _add_workers(g)
    g.set_defaults(func=cmd_synth_generate, command_path="synth generate")
    s = synth_sub.add_parser("sweep", help="evaluate one system across noise levels")
    _add_synth_config_flags(s)
    s.add_argument("--sigmas", required=True,
                   help="comma-separated noise levels, e.g. 0,0.1,0.5")
    s.add_argument("--repr", default=None,
                   choices=("continuous-avg", "continuous-seq", "discrete-seq"))
    s.add_argument("--method", default="kmeans",
                   choices=("kmeans", "birch", "agglom", "graph"))
    s.add_argument("--out", default=None)
    _add_workers(s)
    s.set_defaults(func=cmd_synth_sweep, command_path="synth sweep")

    # transform
    tr = sub.add_parser("transform", help="feature normalization, embedding, quantization")
    tr_sub = tr.add_subparsers(dest="subcommand", required=True)
    n = tr_sub.add_parser("normalize", help="pooled mean-variance normalization")
    n.add_argument("--manifest", required=True)
    n.add_argument("--features", required=True)
    n.add_argument("--out", required=True)
    n.set_defaults(func=cmd_transform_normalize, command_path="transform normalize")
    e = tr_sub.add_parser("embed", help="normalize, project and average to one "
                                        "unit vector per segment")
    e.add_argument("--manifest", required=True)
    e.add_argument("--features", required=True)
    e.add_argument("--out", required=True)
    e.add_argument("--pca-dim", dest="pca_dim", type=int, default=350)
    e.set_defaults(func=cmd_transform_embed, command_path="transform embed")
    q = tr_sub.add_parser("quantize", help="train a codebook and write unit sequences")
    q.add_argument("--manifest", required=True)
    q.add_argument("--features", required=True)
    q.add_argument("--out", required=True)
    q.add_argument("--codebook-size", dest="codebook_size", type=int,
                   default=DEFAULT_CODEBOOK_SIZE)
    q.add_argument("--lam", type=float, default=0.0,
                   help="duration penalty; 0 = plain nearest-centroid units")
    q.add_argument("--seed", type=int, default=0)
    q.set_defaults(func=cmd_transform_quantize, command_path="transform quantize")

    # distance
    di = sub.add_parser("distance", help="dense pairwise distance tables")
    di_sub = di.add_subparsers(dest="subcommand", required=True)
    dp = di_sub.add_parser("pairwise", help="write a symmetric distance table")
    dp.add_argument("--manifest", required=True)
    dp.add_argument("--embeddings", help="embeddings file (cosine)")
    dp.add_argument("--features", help="feature directory (dynamic time warping)")
    dp.add_argument("--units", help="unit directory (edit distance)")
    dp.add_argument("--kind", choices=[k.value for k in DistanceKind],
                    default=None, help="checked against the input type")
    dp.add_argument("--budget-bytes", dest="budget_bytes", type=int,
                    default=4 << 30)
    dp.add_argument("--out", required=True)
    _add_workers(dp)
    dp.set_defaults(func=cmd_distance_pairwise, command_path="distance pairwise")

    # cluster
    cl = sub.add_parser("cluster", help="cluster embeddings or sequences")
    cl_sub = cl.add_subparsers(dest="subcommand", required=True)
    cr = cl_sub.add_parser("run", help="run one clustering method")
    cr.add_argument("--manifest", required=True)
    cr.add_argument("--embeddings")
    cr.add_argument("--features")
    cr.add_argument("--units")
    cr.add_argument("--method", required=True,
                    choices=("kmeans", "birch", "agglom", "graph"))
    cr.add_argument("--k", type=int, default=None)
    cr.add_argument("--gamma", type=float, default=None)
    cr.add_argument("--threshold", type=float, default=None,
                    help="graph edge threshold (default per distance kind)")
    cr.add_argument("--birch-threshold", dest="birch_threshold", type=float,
                    default=0.25)
    cr.add_argument("--branching", type=int, default=50)
    cr.add_argument("--max-iter", dest="max_iter", type=int, default=100)
    cr.add_argument("--tol", type=float, default=1e-4)
    cr.add_argument("--seed", type=int, default=0)
    cr.add_argument("--out", required=True)
    _add_workers(cr)
    cr.set_defaults(func=cmd_cluster_run, command_path="cluster run")

    # evaluate
    ev = sub.add_parser("evaluate", help="score a clustering against the manifest")
    ev.add_argument("--clustering", required=True)
    ev.add_argument("--manifest", required=True)
    ev.add_argument("--runtime-s", dest="runtime_s", type=float, default=None)
    ev.add_argument("--per-pair-ned", dest="per_pair_ned", action="store_true",
                    help="also print the pair-weighted phone edit rate")
    ev.add_argument("--out", default=None)
    ev.set_defaults(func=cmd_evaluate, command_path="evaluate")

    # experiment
    ex = sub.add_parser("experiment", help="end-to-end systems on a corpus directory")
    ex_sub = ex.add_subparsers(dest="subcommand", required=True)
    er = ex_sub.add_parser("run", help="one representation + method pipeline")
    er.add_argument("--corpus", required=True,
                    help="directory with manifest.jsonl and features/")
    _add_system_flags(er)
    er.add_argument("--out", default=None)
    _add_workers(er)
    er.set_defaults(func=cmd_experiment_run, command_path="experiment run")
    ec = ex_sub.add_parser("compare", help="all six standard systems")
    ec.add_argument("--corpus", required=True)
    ec.add_argument("--config", default=None,
                    help="JSON list of systems (default: the six standard ones)")
    ec.add_argument("--seed", type=int, default=0)
    ec.add_argument("--out", default=None)
    _add_workers(ec)
    ec.set_defaults(func=cmd_experiment_compare, command_path="experiment compare")
    ei = ex_sub.add_parser("perfect-init",
                           help="start the method from the true partition")
    ei.add_argument("--corpus", required=True)
    _add_system_flags(ei, methods=("kmeans", "graph"))
    ei.add_argument("--out", default=None)
    _add_workers(ei)
    ei.set_defaults(func=cmd_experiment_perfect_init,
                    command_path="experiment perfect-init")
    ep = ex_sub.add_parser("perfect-repr",
                           help="run on idealized per-type representations")
    ep.add_argument("--corpus", required=True)
    ep.add_argument("--mode", required=True, choices=("embedding", "sequence"))
    ep.add_argument("--sigma", type=float, default=1e-4,
                    help="noise around the type mean in embedding mode")
    _add_system_flags(ep)
    ep.add_argument("--out", default=None)
    _add_workers(ep)
    ep.set_defaults(func=cmd_experiment_perfect_repr,
                    command_path="experiment perfect-repr")

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse already printed usage or version
        return int(exc.code or 0)
    level = logging.WARNING
    if args.verbose == 1:
        level = logging.INFO
    elif args.verbose >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ArgumentError as exc:
        parser.print_usage(sys.stderr)
        print(f"lexkit: argument error: {exc}", file=sys.stderr)
        return 2
    except LexkitError as exc:
        print(f"lexkit: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
