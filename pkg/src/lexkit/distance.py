"""Pairwise distance kernels: cosine, length-normalized DTW, normalized edit.

All three return normalized distances so one global threshold can be applied
across item pairs of differing lengths. Kernels are pure and reentrant;
``pairwise_distances`` parallelizes over the upper triangle with results
independent of scheduling order.
"""

from __future__ import annotations

import enum
import struct
from pathlib import Path

import numpy as np

from . import kernels
from .errors import ArgumentError, MemoryBudgetError, ParseError
from .io import FrameFeatureSequence, UnitSequence
from .parallel import iter_blocks, run_blocks


class DistanceKind(enum.Enum):
    """Which kernel applies: cosine to embeddings, DTW to frame sequences,
    edit to unit or phone sequences."""

    COSINE = "cosine"
    DTW = "dtw"
    EDIT = "edit"


# ---------------------------------------------------------------------------
# Scalar kernels
# ---------------------------------------------------------------------------

def cosine_distance(a: np.ndarray, b: np.ndarray) -> float:
    """1 - a.b for unit-norm vectors; 0 iff equal, up to 2 for antipodal."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ArgumentError(f"cosine_distance: incompatible shapes {a.shape} vs {b.shape}")
    if np.array_equal(a, b):
        return 0.0  # a self-dot rounds to 1 +- ulp; equality is exact
    return float(1.0 - np.dot(a, b))


def unit_rows(frames: np.ndarray) -> np.ndarray:
    """Rows scaled to unit L2 norm (float64); zero rows stay zero."""
    x = np.asarray(frames, dtype=np.float64)
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    norms[norms == 0.0] = 1.0
    return x / norms


def frame_cost_matrix(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise cosine distance between the frames of two sequences."""
    ua = unit_rows(a)
    ub = unit_rows(b)
    return 1.0 - ua @ ub.T


def _dtw_from_unit_rows(ua: np.ndarray, ub: np.ndarray,
                        band: int | None = None) -> float:
    """DTW over already unit-normalized frame rows.

    The matrix product is issued in one canonical argument order per pair, so
    d(a, b) and d(b, a) run the identical float operations: the alignment DP
    is exactly orientation-invariant (paths transpose one-to-one, min is
    exact, and per-path sums accumulate in the same order), which makes the
    result bitwise symmetric.
    """
    if ua.shape[0] == ub.shape[0]:
        bytes_a, bytes_b = ua.tobytes(), ub.tobytes()
        if bytes_a == bytes_b:
            # identical sequences: the diagonal path has zero cost exactly,
            # which the float cost matrix only reproduces up to rounding
            return 0.0
        if bytes_a > bytes_b:
            ua, ub = ub, ua
    elif ua.shape[0] > ub.shape[0]:
        ua, ub = ub, ua
    cost = 1.0 - ua @ ub.T
    if band is not None:
        width = max(band, abs(cost.shape[0] - cost.shape[1]))
        ii = np.arange(cost.shape[0])[:, None]
        jj = np.arange(cost.shape[1])[None, :]
        cost = np.where(np.abs(ii - jj) <= width, cost, np.inf)
    return kernels.dtw_norm(cost)


def dtw_distance(a: FrameFeatureSequence | np.ndarray, b: FrameFeatureSequence | np.ndarray,
                 band: int | None = None) -> float:
    """Length-normalized DTW with per-frame cosine cost.

    Minimizes accumulated cost per path cell over all monotone alignments
    with steps (1,0), (0,1), (1,1). `band` optionally restricts |i - j| as a
    speed knob; it is widened to keep the end cell reachable and disabled by
    default, in which case the result is exact.
    """
    fa = a.frames if isinstance(a, FrameFeatureSequence) else np.asarray(a)
    fb = b.frames if isinstance(b, FrameFeatureSequence) else np.asarray(b)
    if fa.ndim != 2 or fb.ndim != 2 or fa.shape[1] != fb.shape[1]:
        raise ArgumentError(
            f"dtw_distance: feature dimensions differ ({fa.shape} vs {fb.shape})")
    if band is not None and band < 0:
        raise ArgumentError("dtw_distance: band must be >= 0")
    return _dtw_from_unit_rows(unit_rows(fa), unit_rows(fb), band)


def _as_int_array(seq) -> np.ndarray:
    if isinstance(seq, UnitSequence):
        return seq.units
    arr = np.asarray(seq)
    if arr.dtype.kind in ("i", "u"):
        return arr.astype(np.int32)
    # fall back to hashing arbitrary comparable elements (e.g. phone strings)
    table: dict = {}
    out = np.empty(len(arr), dtype=np.int32)
    for i, item in enumerate(arr):
        out[i] = table.setdefault(item, len(table))
    return out


def edit_distance(a, b) -> int:
    """Levenshtein distance with unit-cost insert/delete/substitute."""
    if isinstance(a, UnitSequence) or isinstance(b, UnitSequence):
        return int(kernels.levenshtein(_as_int_array(a), _as_int_array(b)))
    la, lb = list(a), list(b)
    # map elements of both sequences through one shared table
    table: dict = {}
    ia = np.array([table.setdefault(x, len(table)) for x in la], dtype=np.int32)
    ib = np.array([table.setdefault(x, len(table)) for x in lb], dtype=np.int32)
    return int(kernels.levenshtein(ia, ib))


def normalized_edit_distance(a, b) -> float:
    """Edit distance divided by max length; 0 when both sequences are empty."""
    la = len(a.units) if isinstance(a, UnitSequence) else len(a)
    lb = len(b.units) if isinstance(b, UnitSequence) else len(b)
    denom = max(la, lb)
    if denom == 0:
        return 0.0
    return edit_distance(a, b) / denom


# ---------------------------------------------------------------------------
# Pairwise tables
# ---------------------------------------------------------------------------

DEFAULT_BUDGET_BYTES = 4 << 30

_PAIR_BLOCK = 2048


def _check_items(items, kind: DistanceKind):
    if kind is DistanceKind.COSINE:
        mat = np.asarray(items, dtype=np.float64)
        if mat.ndim != 2:
            raise ArgumentError("cosine pairwise needs an n x d embedding matrix")
        return mat
    if kind is DistanceKind.DTW:
        seqs = [s.frames if isinstance(s, FrameFeatureSequence) else np.asarray(s) for s in items]
        dims = {s.shape[1] for s in seqs}
        if len(dims) > 1:
            raise ArgumentError(f"dtw pairwise: mixed feature dimensions {sorted(dims)}")
        return [unit_rows(s) for s in seqs]
    return [_as_int_array(s) for s in items]


def _pair_value(prepared, kind: DistanceKind, i: int, j: int) -> float:
    if kind is DistanceKind.COSINE:
        return float(1.0 - np.dot(prepared[i], prepared[j]))
    if kind is DistanceKind.DTW:
        return _dtw_from_unit_rows(prepared[i], prepared[j])
    a, b = prepared[i], prepared[j]
    denom = max(len(a), len(b))
    if denom == 0:
        return 0.0
    return kernels.levenshtein(a, b) / denom


def pairwise_distances(items, kind: DistanceKind, budget_bytes: int = DEFAULT_BUDGET_BYTES,
                       workers: int | None = None) -> np.ndarray:
    """Dense symmetric distance table with zero diagonal.

    Only the upper triangle is computed; the lower is mirrored, so the table
    is exactly symmetric. Raises MemoryBudgetError when n*n float64 exceeds
    `budget_bytes` (use the graph builder's streaming mode instead).
    """
    n = len(items)
    if n * n * 8 > budget_bytes:
        raise MemoryBudgetError(
            f"dense {n}x{n} table exceeds budget ({n*n*8} > {budget_bytes} bytes); "
            "use cluster.build_graph, which streams pairs against the threshold")
    prepared = _check_items(items, kind)
    table = np.zeros((n, n), dtype=np.float64)

    if kind is DistanceKind.COSINE:
        # row blocks with boundaries fixed by n alone, so each entry comes
        # from one matmul of a fixed shape regardless of worker count
        def rows(lo: int, hi: int) -> None:
            table[lo:hi] = 1.0 - prepared[lo:hi] @ prepared.T

        run_blocks(rows, iter_blocks(n, _PAIR_BLOCK), workers)
    else:
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]

        def work(lo: int, hi: int) -> None:
            for i, j in pairs[lo:hi]:
                table[i, j] = _pair_value(prepared, kind, i, j)

        run_blocks(work, iter_blocks(len(pairs), _PAIR_BLOCK), workers)

    ii, jj = np.triu_indices(n, k=1)
    table[jj, ii] = table[ii, jj]
    np.fill_diagonal(table, 0.0)
    return table


# ---------------------------------------------------------------------------
# Triangular table file (header: magic, n, kind)
# ---------------------------------------------------------------------------

_TRI_MAGIC = b"LXT1"
_KIND_TAGS = {DistanceKind.COSINE: 0, DistanceKind.DTW: 1, DistanceKind.EDIT: 2}


def write_triangular(table: np.ndarray, kind: DistanceKind, path: str | Path) -> None:
    """Write the strict upper triangle of a symmetric table, row-major float32."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    n = table.shape[0]
    ii, jj = np.triu_indices(n, k=1)
    payload = np.ascontiguousarray(table[ii, jj], dtype="<f4")
    with path.open("wb") as fh:
        fh.write(_TRI_MAGIC + struct.pack("<IB", n, _KIND_TAGS[kind]))
        fh.write(payload.tobytes())


def read_triangular(path: str | Path) -> tuple[np.ndarray, DistanceKind]:
    """Read a triangular table file back into a dense symmetric matrix."""
    raw = Path(path).read_bytes()
    if len(raw) < 9 or raw[:4] != _TRI_MAGIC:
        raise ParseError(f"{path}: not a triangular distance file")
    n, tag = struct.unpack("<IB", raw[4:9])
    kind = {v: k for k, v in _KIND_TAGS.items()}.get(tag)
    if kind is None:
        raise ParseError(f"{path}: unknown kind tag {tag}")
    expected = n * (n - 1) // 2
    values = np.frombuffer(raw[9:], dtype="<f4")
    if len(values) != expected:
        raise ParseError(f"{path}: expected {expected} values, got {len(values)}")
    table = np.zeros((n, n), dtype=np.float64)
    ii, jj = np.triu_indices(n, k=1)
    table[ii, jj] = values
    table[jj, ii] = values
    return table, kind
