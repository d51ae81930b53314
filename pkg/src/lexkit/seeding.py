"""Deterministic fan-out of one top-level seed into named substreams.

Every random decision in the toolkit draws from a generator obtained here, so
a run is reproducible from (inputs, seed) alone, independent of worker count.
"""

from __future__ import annotations

import zlib

import numpy as np


def derive_seed(seed: int, name: str) -> int:
    """Derive a stable child seed for the substream `name`."""
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    tag = zlib.crc32(name.encode("utf-8"))
    ss = np.random.SeedSequence([seed, tag])
    return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)


def rng_for(seed: int, name: str) -> np.random.Generator:
    """Generator for the substream `name` of the top-level `seed`."""
    return np.random.default_rng(derive_seed(seed, name))


def sample_index(rng: np.random.Generator, weights: np.ndarray) -> int:
    """Sample an index with probability proportional to `weights`.

    Uses an explicit inverse-CDF so the draw is stable across numpy versions.
    Weights must be non-negative with a positive sum.
    """
    cum = np.cumsum(weights, dtype=np.float64)
    total = cum[-1]
    if not total > 0:
        raise ValueError("weights must have a positive sum")
    r = rng.random() * total
    idx = int(np.searchsorted(cum, r, side="right"))
    idx = min(idx, len(weights) - 1)
    # r can round up to total; never land on a zero-weight index
    while idx > 0 and weights[idx] == 0:
        idx -= 1
    return idx
