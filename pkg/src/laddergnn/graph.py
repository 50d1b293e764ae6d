"""Sparse graph core: CSR matrices, symmetric normalization, multi-hop
feature propagation, and per-node homophily measurement.

Feature matrices are plain 2-D numpy arrays (row-major, one row per node).
All functions are pure; none mutates its inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels

UNLABELED = -1


@dataclass(frozen=True)
class CsrMatrix:
    """Compressed sparse row matrix.

    Invariants: ``row_ptr`` is non-decreasing with ``row_ptr[0] == 0`` and
    ``row_ptr[-1] == nnz``; within each row the column indices are strictly
    increasing; all values are finite.
    """

    n_rows: int
    n_cols: int
    row_ptr: np.ndarray  # int64, length n_rows + 1
    col_idx: np.ndarray  # int32
    values: np.ndarray  # float64 (or float32)

    @property
    def nnz(self) -> int:
        return len(self.col_idx)

    def validate(self) -> None:
        if self.n_rows < 0 or self.n_cols < 0:
            raise ValueError("negative dimensions")
        if len(self.row_ptr) != self.n_rows + 1 or self.row_ptr[0] != 0:
            raise ValueError("malformed row_ptr")
        if self.row_ptr[-1] != len(self.col_idx) or len(self.col_idx) != len(self.values):
            raise ValueError("row_ptr does not match entry count")
        if np.any(np.diff(self.row_ptr) < 0):
            raise ValueError("row_ptr must be non-decreasing")
        if self.nnz:
            if self.col_idx.min() < 0 or self.col_idx.max() >= self.n_cols:
                raise ValueError("column index out of range")
            if not np.all(np.isfinite(self.values)):
                raise ValueError("non-finite value")
            for i in range(self.n_rows):
                row = self.col_idx[self.row_ptr[i]:self.row_ptr[i + 1]]
                if len(row) > 1 and np.any(np.diff(row) <= 0):
                    raise ValueError(f"row {i}: columns not strictly increasing")

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.n_cols), dtype=self.values.dtype)
        for i in range(self.n_rows):
            lo, hi = self.row_ptr[i], self.row_ptr[i + 1]
            out[i, self.col_idx[lo:hi]] = self.values[lo:hi]
        return out

    def row_degrees(self) -> np.ndarray:
        return np.diff(self.row_ptr)


def csr_from_dense(dense: np.ndarray) -> CsrMatrix:
    dense = np.asarray(dense)
    rows, cols = np.nonzero(dense)
    row_ptr = np.zeros(dense.shape[0] + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=dense.shape[0]), out=row_ptr[1:])
    return CsrMatrix(dense.shape[0], dense.shape[1], row_ptr,
                     cols.astype(np.int32), dense[rows, cols].astype(np.float64))


def csr_identity(n: int, dtype=np.float64) -> CsrMatrix:
    return CsrMatrix(n, n, np.arange(n + 1, dtype=np.int64),
                     np.arange(n, dtype=np.int32), np.ones(n, dtype=dtype))


def _dedup_undirected(edges, n: int, keep_self_loops: bool) -> np.ndarray:
    """Canonical (u, v) pairs with u <= v, deduplicated, endpoints checked."""
    arr = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
    if len(arr) and (arr.min() < 0 or arr.max() >= n):
        raise ValueError(f"edge endpoint out of range [0, {n})")
    if not keep_self_loops:
        arr = arr[arr[:, 0] != arr[:, 1]]
    lo = np.minimum(arr[:, 0], arr[:, 1])
    hi = np.maximum(arr[:, 0], arr[:, 1])
    return np.unique(np.stack([lo, hi], axis=1), axis=0) if len(arr) else arr


def _csr_from_symmetric_entries(rows, cols, vals, n: int) -> CsrMatrix:
    order = np.lexsort((cols, rows))
    rows, cols, vals = rows[order], cols[order], vals[order]
    row_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=row_ptr[1:])
    return CsrMatrix(n, n, row_ptr, cols.astype(np.int32), vals)


def build_normalized_adjacency(edges, n: int) -> CsrMatrix:
    """Self-loop-augmented symmetric normalization D^-1/2 (A + I) D^-1/2.

    Input self-loops are ignored (the identity term is added exactly once)
    and duplicate edges are collapsed before degrees are computed.  Every
    node gets degree >= 1 from the identity term, so no division by zero.
    """
    if n <= 0:
        raise ValueError("node count must be positive")
    pairs = _dedup_undirected(edges, n, keep_self_loops=False)
    deg = np.ones(n, dtype=np.int64)  # the +I contribution
    if len(pairs):
        deg += np.bincount(pairs[:, 0], minlength=n)
        deg += np.bincount(pairs[:, 1], minlength=n)
    inv_sqrt = 1.0 / np.sqrt(deg.astype(np.float64))
    loops = np.arange(n, dtype=np.int64)
    rows = np.concatenate([pairs[:, 0], pairs[:, 1], loops])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0], loops])
    vals = inv_sqrt[rows] * inv_sqrt[cols]
    return _csr_from_symmetric_entries(rows, cols, vals, n)


def build_binary_adjacency(edges, n: int) -> CsrMatrix:
    """Unweighted symmetric adjacency without self-loops (for hop analysis)."""
    if n <= 0:
        raise ValueError("node count must be positive")
    pairs = _dedup_undirected(edges, n, keep_self_loops=False)
    rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
    cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
    return _csr_from_symmetric_entries(rows, cols, np.ones(len(rows)), n)


def spmm(m: CsrMatrix, x: np.ndarray) -> np.ndarray:
    """Sparse-dense product m @ x.

    Deterministic: rows are accumulated independently in entry order.
    """
    x = np.ascontiguousarray(x)
    if x.ndim != 2 or m.n_cols != x.shape[0]:
        raise ValueError(f"shape mismatch: {m.n_rows}x{m.n_cols} @ {x.shape}")
    out = np.zeros((m.n_rows, x.shape[1]), dtype=x.dtype)
    values = m.values if m.values.dtype == x.dtype else m.values.astype(x.dtype)
    kernels.spmm_into(m.row_ptr, m.col_idx, values, x, out)
    return out


def propagate(adj: CsrMatrix, x: np.ndarray, k_max: int) -> list[np.ndarray]:
    """[adj @ x, adj^2 @ x, ..., adj^k_max @ x] by iterated products.

    The matrix power is never materialized.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if adj.n_rows != adj.n_cols:
        raise ValueError("adjacency must be square")
    out = [spmm(adj, x)]
    for _ in range(1, k_max):
        out.append(spmm(adj, out[-1]))
    return out


def hop_k_neighbors(adj_binary: CsrMatrix, k: int) -> CsrMatrix:
    """Binary CSR of node pairs at shortest-path distance exactly k.

    ``adj_binary`` must be the unweighted adjacency without self-loops.
    k = 1 returns the adjacency itself (with unit weights).
    """
    if k < 1:
        raise ValueError("hop must be >= 1")
    if adj_binary.n_rows != adj_binary.n_cols:
        raise ValueError("adjacency must be square")
    n = adj_binary.n_rows
    if adj_binary.nnz:
        row_of = np.repeat(np.arange(n, dtype=np.int32),
                           adj_binary.row_degrees())
        if np.any(row_of == adj_binary.col_idx):
            raise ValueError("adjacency must not contain self-loops")
    if k == 1:
        return CsrMatrix(n, n, adj_binary.row_ptr.copy(),
                         adj_binary.col_idx.copy(),
                         np.ones(adj_binary.nnz, dtype=np.float64))
    indptr, indices = kernels.exact_hop_pairs(adj_binary.row_ptr,
                                              adj_binary.col_idx, k)
    for i in range(n):  # BFS emits discovery order; rows must be sorted
        indices[indptr[i]:indptr[i + 1]].sort()
    return CsrMatrix(n, n, indptr, indices, np.ones(len(indices), dtype=np.float64))


@dataclass
class HomophilyReport:
    """Per-node same-label neighbor fractions plus their histogram.

    ``per_node_ratio[i]`` is NaN when node i has no neighbors in the
    supplied structure; histogram buckets cover [0, 1] with the last bucket
    closed on the right.
    """

    hop: int | None
    per_node_ratio: np.ndarray
    histogram: np.ndarray
    bucket_width: float = 0.05

    @property
    def defined_count(self) -> int:
        return int(np.sum(~np.isnan(self.per_node_ratio)))

    @property
    def mean_ratio(self) -> float:
        if self.defined_count == 0:
            return float("nan")
        return float(np.nanmean(self.per_node_ratio))

    @property
    def bucket_edges(self) -> np.ndarray:
        return np.arange(len(self.histogram) + 1) * self.bucket_width


def ratio_histogram(ratios: np.ndarray, bucket_width: float) -> np.ndarray:
    """Bucket counts over [0, 1]; ratio 1.0 falls in the last bucket."""
    n_buckets = int(np.ceil(round(1.0 / bucket_width, 9)))
    defined = ratios[~np.isnan(ratios)]
    idx = np.minimum((defined / bucket_width).astype(np.int64), n_buckets - 1)
    return np.bincount(idx, minlength=n_buckets)


def node_homophily(adj_unnormalized: CsrMatrix, labels: np.ndarray, *,
                   hop: int | None = None,
                   bucket_width: float = 0.05) -> HomophilyReport:
    """Fraction of same-label neighbors per node, over the supplied
    neighbor structure (use hop_k_neighbors for distance-k variants).

    Nodes without neighbors get an undefined (NaN) ratio and are excluded
    from the histogram.  All counted nodes must be labeled.
    """
    labels = np.asarray(labels)
    if len(labels) != adj_unnormalized.n_rows:
        raise ValueError("label count does not match node count")
    n = adj_unnormalized.n_rows
    counts = adj_unnormalized.row_degrees()
    row_of = np.repeat(np.arange(n, dtype=np.int32), counts)
    same = labels[row_of] == labels[adj_unnormalized.col_idx]
    same_counts = np.bincount(row_of, weights=same.astype(np.float64), minlength=n)
    ratios = np.full(n, np.nan)
    has = counts > 0
    ratios[has] = same_counts[has] / counts[has]
    return HomophilyReport(hop=hop, per_node_ratio=ratios,
                           histogram=ratio_histogram(ratios, bucket_width),
                           bucket_width=bucket_width)
