"""Synthetic corpus generation with known word types.

Each word type owns a prototype frame sequence (random unit vectors) and a
phone string. Instances are noisy, time-warped copies of the prototype, so
ground truth is exact and representation variability is a single knob: the
per-frame noise sigma. Generation is deterministic given the seed, for any
worker count, because every type and instance draws from its own named
substream.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping

import numpy as np

from .errors import ArgumentError
from .io import FrameFeatureSequence, Manifest, SegmentMetadata
from .parallel import iter_blocks, run_blocks
from .seeding import rng_for

SEGMENTS_PER_UTTERANCE = 10
SPEAKER_CYCLE = 12


@dataclass(frozen=True)
class SynthConfig:
    """Knobs for one synthetic corpus.

    instances_per_type is either a fixed count or an inclusive (lo, hi)
    range sampled per type. within_type_noise is the per-frame Gaussian
    sigma added to the prototype; length_jitter is the per-frame probability
    of a time-warp edit (half deletions, half duplications).
    """

    n_types: int = 100
    instances_per_type: int | tuple[int, int] = 10
    dim: int = 24
    mean_len: int = 30
    within_type_noise: float = 0.1
    length_jitter: float = 0.0
    phone_alphabet_size: int = 40
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_types < 1:
            raise ArgumentError(f"n_types must be >= 1, got {self.n_types}")
        inst = self.instances_per_type
        if isinstance(inst, int):
            if inst < 1:
                raise ArgumentError(f"instances_per_type must be >= 1, got {inst}")
        else:
            inst = tuple(int(v) for v in inst)
            object.__setattr__(self, "instances_per_type", inst)
            if len(inst) != 2 or not 1 <= inst[0] <= inst[1]:
                raise ArgumentError(
                    f"instances_per_type range must be (lo, hi) with 1 <= lo <= hi, got {inst}")
        if self.dim < 1:
            raise ArgumentError(f"dim must be >= 1, got {self.dim}")
        if self.mean_len < 1:
            raise ArgumentError(f"mean_len must be >= 1, got {self.mean_len}")
        if not self.within_type_noise >= 0.0:
            raise ArgumentError(
                f"within_type_noise must be >= 0, got {self.within_type_noise}")
        if not 0.0 <= self.length_jitter <= 1.0:
            raise ArgumentError(
                f"length_jitter must be in [0, 1], got {self.length_jitter}")
        if self.phone_alphabet_size < 1:
            raise ArgumentError(
                f"phone_alphabet_size must be >= 1, got {self.phone_alphabet_size}")
        if self.seed < 0:
            raise ArgumentError(f"seed must be >= 0, got {self.seed}")

    def to_dict(self) -> dict:
        inst = self.instances_per_type
        return {
            "n_types": self.n_types,
            "instances_per_type": list(inst) if isinstance(inst, tuple) else inst,
            "dim": self.dim,
            "mean_len": self.mean_len,
            "within_type_noise": self.within_type_noise,
            "length_jitter": self.length_jitter,
            "phone_alphabet_size": self.phone_alphabet_size,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "SynthConfig":
        known = {f: data[f] for f in (
            "n_types", "instances_per_type", "dim", "mean_len",
            "within_type_noise", "length_jitter", "phone_alphabet_size",
            "seed") if f in data}
        extra = set(data) - set(known)
        if extra:
            raise ArgumentError(f"unknown config fields: {sorted(extra)}")
        inst = known.get("instances_per_type")
        if isinstance(inst, list):
            known["instances_per_type"] = tuple(inst)
        return cls(**known)


def _prototype_length(rng: np.random.Generator, mean_len: int) -> int:
    lo = max(1, int(round(0.75 * mean_len)))
    hi = max(lo, int(round(1.25 * mean_len)))
    return int(rng.integers(lo, hi + 1))


def _make_type(config: SynthConfig, t: int):
    """Prototype, phone string and instance frames for word type `t`."""
    rng = rng_for(config.seed, f"type:{t}")
    length = _prototype_length(rng, config.mean_len)
    prototype = rng.standard_normal((length, config.dim))
    prototype /= np.linalg.norm(prototype, axis=1, keepdims=True)

    n_phones = max(1, int(round(length / 4)))
    phone_ids = rng.integers(0, config.phone_alphabet_size, size=n_phones)
    phones = tuple(f"p{int(v):02d}" for v in phone_ids)

    inst = config.instances_per_type
    count = inst if isinstance(inst, int) else int(rng.integers(inst[0], inst[1] + 1))

    sigma = config.within_type_noise
    jitter = config.length_jitter
    instances = []
    for i in range(count):
        inst_rng = rng_for(config.seed, f"inst:{t}:{i}")
        frames = prototype.copy()
        if sigma > 0.0:
            frames += sigma * inst_rng.standard_normal(frames.shape)
        if jitter > 0.0:
            u = inst_rng.random(length)
            reps = np.ones(length, dtype=np.int64)
            reps[u < 0.5 * jitter] = 0
            reps[(u >= 0.5 * jitter) & (u < jitter)] = 2
            if reps.sum() == 0:
                # never drop a segment entirely
                reps[length // 2] = 1
            frames = np.repeat(frames, reps, axis=0)
        instances.append(frames)
    return phones, instances


def generate(config: SynthConfig,
             workers: int | None = None) -> tuple[Manifest, list[FrameFeatureSequence]]:
    """Build a corpus: a labeled manifest and one feature sequence per segment.

    Word type t is labeled w%04d and all its instances share its phone
    string. Instances are shuffled across the corpus, then packed into
    utterances of 10 consecutive segments on a 20 ms frame grid.
    """
    per_type: list = [None] * config.n_types

    def fill(lo: int, hi: int) -> None:
        for t in range(lo, hi):
            per_type[t] = _make_type(config, t)

    run_blocks(fill, iter_blocks(config.n_types, 8), workers)

    entries = []  # (label, phones, frames) in type order
    for t, (phones, instances) in enumerate(per_type):
        label = f"w{t:04d}"
        for frames in instances:
            entries.append((label, phones, frames))

    perm = rng_for(config.seed, "pack").permutation(len(entries))
    frame_period = 0.02
    segments = []
    sequences = []
    clock = 0.0
    for j, src in enumerate(perm):
        label, phones, frames = entries[src]
        if j % SEGMENTS_PER_UTTERANCE == 0:
            clock = 0.0
        utterance = j // SEGMENTS_PER_UTTERANCE
        segment_id = f"seg{j:06d}"
        start = clock
        end = start + frames.shape[0] * frame_period
        clock = end
        segments.append(SegmentMetadata(
            segment_id=segment_id,
            utterance_id=f"utt{utterance:05d}",
            speaker_id=f"spk{utterance % SPEAKER_CYCLE:02d}",
            start_s=start,
            end_s=end,
            word_label=label,
            phones=phones,
        ))
        sequences.append(FrameFeatureSequence(segment_id, frames.astype(np.float32),
                                              frame_period))
    return Manifest(tuple(segments)), sequences


def sweep_noise(config: SynthConfig, sigmas: list, spec=None,
                workers: int | None = None):
    """One full system evaluation per noise level.

    Regenerates the corpus at each sigma (same seed, so prototypes and
    packing are held fixed) and runs the given system, defaulting to averaged
    embeddings with k-means at the true type count. Returns
    [(sigma, EvalReport), ...] in the order given. Averaging across seeds is
    left to the caller: rerun with different config seeds and combine, since
    report fields are typed scalars.
    """
    from .experiment import Corpus, SystemSpec, run_system

    if spec is None:
        spec = SystemSpec("continuous-avg", "kmeans")
    rows = []
    for sigma in sigmas:
        cfg = replace(config, within_type_noise=float(sigma))
        manifest, sequences = generate(cfg, workers=workers)
        _, report = run_system(spec, Corpus(manifest, sequences),
                               seed=cfg.seed, workers=workers)
        rows.append((float(sigma), report))
    return rows


__all__ = ["SynthConfig", "generate", "sweep_noise",
           "SEGMENTS_PER_UTTERANCE", "SPEAKER_CYCLE"]
