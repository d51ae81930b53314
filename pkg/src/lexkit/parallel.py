"""Worker-count resolution and a deterministic parallel map over index blocks.

Parallel results are written into preallocated, disjoint slices, so the output
is identical for any worker count or scheduling order.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence

WORKERS_ENV = "LEXKIT_WORKERS"


def resolve_workers(workers: int | None = None) -> int:
    """Effective worker count: explicit argument, else $LEXKIT_WORKERS, else 1."""
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def iter_blocks(n: int, block: int) -> list[tuple[int, int]]:
    """Split range(n) into [lo, hi) blocks of at most `block` items."""
    return [(lo, min(lo + block, n)) for lo in range(0, n, block)]


def run_blocks(fn: Callable[[int, int], None], blocks: Sequence[tuple[int, int]],
               workers: int | None = None) -> None:
    """Run fn(lo, hi) over every block, in parallel when workers > 1.

    fn must only write to slices owned by its own block.
    """
    nworkers = resolve_workers(workers)
    if nworkers <= 1 or len(blocks) <= 1:
        for lo, hi in blocks:
            fn(lo, hi)
        return
    with ThreadPoolExecutor(max_workers=nworkers) as pool:
        futures = [pool.submit(fn, lo, hi) for lo, hi in blocks]
        for fut in futures:
            fut.result()
