"""Numpy fallbacks for the compiled kernels.

Semantics (down to accumulation order) match ``_kernels.pyx`` exactly, so
either implementation may be selected without changing results.
"""

from __future__ import annotations

import numpy as np


def spmm(indptr, indices, data, x, out):
    """out += CSR(indptr, indices, data) @ x."""
    if len(indices) == 0:
        return
    contrib = data[:, None] * x[indices]
    row_sizes = np.diff(indptr)
    nonempty = np.flatnonzero(row_sizes > 0)
    # reduceat segments between consecutive starts cover exactly one
    # nonempty row each; empty rows occupy no entry space.
    sums = np.add.reduceat(contrib, indptr[nonempty], axis=0)
    out[nonempty] += sums


def exact_hop_pairs(indptr, indices, k):
    """All (source, target) pairs at shortest-path distance exactly k.

    Per-source BFS truncated at depth k; columns within a row follow BFS
    discovery order (the caller sorts rows).
    """
    n = len(indptr) - 1
    visited = np.full(n, -1, dtype=np.int32)
    frontiers: list[np.ndarray] = []
    counts = np.zeros(n, dtype=np.int64)
    empty = np.empty(0, dtype=np.int32)
    for s in range(n):
        visited[s] = s
        cur = np.array([s], dtype=np.int32)
        level_k = empty
        for level in range(1, k + 1):
            if len(cur) == 1:
                u = cur[0]
                cand = indices[indptr[u]:indptr[u + 1]]
            else:
                cand = np.concatenate([indices[indptr[u]:indptr[u + 1]] for u
                                       in cur])
            fresh = cand[visited[cand] != s]
            if len(fresh) == 0:
                level_k = empty
                break
            # first occurrence wins, mirroring the sequential visit order
            fresh = fresh[np.sort(np.unique(fresh, return_index=True)[1])]
            visited[fresh] = s
            cur = fresh
            if level == k:
                level_k = fresh
        counts[s] = len(level_k)
        frontiers.append(level_k)
    out_indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=out_indptr[1:])
    if out_indptr[n] > 0:
        out_indices = np.concatenate(frontiers).astype(np.int32)
    else:
        out_indices = np.empty(0, dtype=np.int32)
    return out_indptr, out_indices


def adam_step(w, g, m, v, lr, beta1, beta2, eps, bc1, bc2):
    """One in-place Adam update; bc1/bc2 are the bias corrections 1-beta^t."""
    dt = w.dtype.type
    m *= dt(beta1)
    m += dt(1.0 - beta1) * g
    v *= dt(beta2)
    v += dt(1.0 - beta2) * (g * g)
    w -= dt(lr) * ((m / dt(bc1)) / (np.sqrt(v / dt(bc2)) + dt(eps)))
