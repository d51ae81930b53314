"""Pure numpy implementations of the hot dynamic-programming kernels.

These are the import-time fallback for the compiled extension in
``_ckernels.pyx``. Both backends perform the same float64 operations in the
same pairing, so their results are bit-identical; only speed differs.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def dtw_norm(cost: np.ndarray) -> float:
    """Length-normalized alignment cost over a local-cost matrix.

    Minimizes total-path-cost / path-cell-count over all monotone paths from
    (0, 0) to (Ta-1, Tb-1) with steps (1,0), (0,1), (1,1). The minimum is
    taken over per-length optima, so the value is well defined even when
    several paths tie on total cost.
    """
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    ta, tb = cost.shape
    inf = np.inf
    prev = np.full((ta, tb), inf)
    prev[0, 0] = cost[0, 0]
    best = prev[ta - 1, tb - 1] / 1.0  # only hit when ta == tb == 1
    n_layers = ta + tb - 1
    cur = np.full((ta, tb), inf)
    for layer in range(1, n_layers):
        cur.fill(inf)
        # steps into (i, j): from (i-1, j), (i, j-1), (i-1, j-1)
        move = cur[1:, :]
        np.minimum(prev[:-1, :], move, out=move)          # (1, 0)
        np.minimum(prev[:, :-1], cur[:, 1:], out=cur[:, 1:])   # (0, 1)
        np.minimum(prev[:-1, :-1], cur[1:, 1:], out=cur[1:, 1:])  # (1, 1)
        np.add(cur, cost, out=cur)
        end = cur[ta - 1, tb - 1]
        if end < inf:
            best = min(best, end / (layer + 1))
        prev, cur = cur, prev
    return float(best)


def levenshtein(a: np.ndarray, b: np.ndarray) -> int:
    """Unit-cost edit distance between two int sequences."""
    a = np.ascontiguousarray(a, dtype=np.int32)
    b = np.ascontiguousarray(b, dtype=np.int32)
    n, m = len(a), len(b)
    if n == 0:
        return m
    if m == 0:
        return n
    jj = np.arange(1, m + 1, dtype=np.int64)
    prev = np.arange(m + 1, dtype=np.int64)
    base = np.empty(m + 1, dtype=np.int64)
    for i in range(1, n + 1):
        sub = prev[:-1] + (b != a[i - 1])
        dele = prev[1:] + 1
        tmp = np.minimum(sub, dele)
        # resolve the left-to-right insertion chain via a prefix minimum
        base[0] = i
        np.subtract(tmp, jj, out=base[1:])
        np.minimum.accumulate(base, out=base)
        cur = base
        cur[1:] += jj
        prev, base = cur, prev
    return int(prev[m])


def dpdp_backtrack(cost: np.ndarray, lam: float) -> np.ndarray:
    """Minimum-cost unit path through a T x K assignment-cost matrix.

    Objective: sum_t cost[t, z_t] + lam * (number of t with z_t != z_{t-1}).
    Ties break toward the lowest unit index.
    """
    cost = np.ascontiguousarray(cost, dtype=np.float64)
    t_len, k = cost.shape
    dp = np.empty_like(cost)
    dp[0] = cost[0]
    for t in range(1, t_len):
        m = dp[t - 1].min()
        np.minimum(dp[t - 1], m + lam, out=dp[t])
        dp[t] += cost[t]
    path = np.empty(t_len, dtype=np.int32)
    path[t_len - 1] = int(np.argmin(dp[t_len - 1]))
    pen = np.empty(k, dtype=np.float64)
    for t in range(t_len - 2, -1, -1):
        pen.fill(lam)
        pen[path[t + 1]] = 0.0
        pen += dp[t]
        path[t] = int(np.argmin(pen))
    return path
