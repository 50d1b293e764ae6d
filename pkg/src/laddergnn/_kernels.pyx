# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: CSR*dense products, exact-distance BFS, fused Adam.

Each function has a numpy twin in ``_kernels_py`` with identical semantics
(same accumulation order, so results match bitwise); ``kernels`` picks one
at import time.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

ctypedef cnp.int64_t i64
ctypedef cnp.int32_t i32

ctypedef fused floating:
    float
    double


def spmm(i64[::1] indptr, i32[::1] indices, floating[::1] data,
         floating[:, ::1] x, floating[:, ::1] out):
    """out += CSR(indptr, indices, data) @ x, row by row."""
    cdef Py_ssize_t n_rows = indptr.shape[0] - 1
    cdef Py_ssize_t n_cols = x.shape[1]
    cdef Py_ssize_t i, jj, j
    cdef i32 col
    cdef floating v
    for i in range(n_rows):
        for jj in range(indptr[i], indptr[i + 1]):
            col = indices[jj]
            v = data[jj]
            for j in range(n_cols):
                out[i, j] += v * x[col, j]


def exact_hop_pairs(i64[::1] indptr, i32[::1] indices, int k):
    """All (source, target) pairs at shortest-path distance exactly k.

    Runs one BFS per source, truncated at depth k.  Two passes: the first
    counts the depth-k frontier per source, the second fills the CSR
    column array.  Column order within a row follows BFS discovery order;
    the caller sorts rows.
    """
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef cnp.ndarray[i64, ndim=1] out_indptr = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.ndarray[i32, ndim=1] visited = np.full(n, -1, dtype=np.int32)
    cdef cnp.ndarray[i32, ndim=1] cur = np.empty(n, dtype=np.int32)
    cdef cnp.ndarray[i32, ndim=1] nxt = np.empty(n, dtype=np.int32)
    cdef i64[::1] op = out_indptr
    cdef i32[::1] vis = visited
    cdef i32[::1] c = cur
    cdef i32[::1] x = nxt

    cdef Py_ssize_t s
    for s in range(n):
        op[s + 1] = op[s] + _bfs_level_k(indptr, indices, vis, c, x,
                                         <i32> s, k, NULL)

    cdef cnp.ndarray[i32, ndim=1] out_indices = np.empty(op[n], dtype=np.int32)
    cdef i32[::1] oi = out_indices
    cdef i32* base = NULL
    if op[n] > 0:
        base = &oi[0]
        visited[:] = -1
        for s in range(n):
            _bfs_level_k(indptr, indices, vis, c, x, <i32> s, k, base + op[s])
    return out_indptr, out_indices


cdef Py_ssize_t _bfs_level_k(i64[::1] indptr, i32[::1] indices, i32[::1] visited,
                             i32[::1] cur, i32[::1] nxt, i32 source, int k,
                             i32* sink) noexcept nogil:
    """BFS from ``source``; returns the size of the depth-k frontier.

    ``visited`` stores the id of the last source that reached a node, so it
    never needs clearing between sources.  When ``sink`` is non-NULL the
    depth-k frontier is written there.
    """
    cdef Py_ssize_t cur_len = 1, nxt_len, fi
    cdef Py_ssize_t out_count = 0
    cdef int level
    cdef i64 jj
    cdef i32 u, v
    visited[source] = source
    cur[0] = source
    for level in range(1, k + 1):
        nxt_len = 0
        for fi in range(cur_len):
            u = cur[fi]
            for jj in range(indptr[u], indptr[u + 1]):
                v = indices[jj]
                if visited[v] != source:
                    visited[v] = source
                    nxt[nxt_len] = v
                    nxt_len += 1
        if nxt_len == 0:
            return 0
        if level == k:
            if sink != NULL:
                for fi in range(nxt_len):
                    sink[fi] = nxt[fi]
            return nxt_len
        for fi in range(nxt_len):
            cur[fi] = nxt[fi]
        cur_len = nxt_len
    return out_count


def adam_step(floating[::1] w, floating[::1] g, floating[::1] m,
              floating[::1] v, double lr, double beta1, double beta2,
              double eps, double bc1, double bc2):
    """One in-place Adam update; bc1/bc2 are the bias corrections 1-beta^t."""
    cdef Py_ssize_t i, n = w.shape[0]
    cdef floating b1 = <floating> beta1
    cdef floating b2 = <floating> beta2
    cdef floating a1 = <floating> (1.0 - beta1)
    cdef floating a2 = <floating> (1.0 - beta2)
    cdef floating flr = <floating> lr
    cdef floating feps = <floating> eps
    cdef floating fbc1 = <floating> bc1
    cdef floating fbc2 = <floating> bc2
    cdef floating gi
    for i in range(n):
        gi = g[i]
        m[i] = b1 * m[i] + a1 * gi
        v[i] = b2 * v[i] + a2 * (gi * gi)
        w[i] = w[i] - flr * ((m[i] / fbc1) / (sqrt(v[i] / fbc2) + feps))
