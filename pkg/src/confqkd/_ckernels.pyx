# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled GF(2) kernels.

Rows are packed into 64-bit words for elimination; coset leaders are
enumerated with Gosper's hack so that equal-weight candidates arrive in
increasing integer (= lexicographic text) order.
"""
import numpy as np

from libc.stdint cimport int64_t, uint64_t


cdef extern from *:
    int __builtin_ctzll(unsigned long long)


def rref(const unsigned char[:, :] mat, Py_ssize_t pivot_cols=-1):
    cdef Py_ssize_t rows = mat.shape[0]
    cdef Py_ssize_t cols = mat.shape[1]
    cdef Py_ssize_t nwords = (cols + 63) >> 6
    cdef Py_ssize_t i, j, k, c, p, r, w
    cdef uint64_t bit, tmp
    if pivot_cols < 0 or pivot_cols > cols:
        pivot_cols = cols

    packed = np.zeros((rows, max(nwords, 1)), dtype=np.uint64)
    cdef uint64_t[:, :] P = packed
    for i in range(rows):
        for j in range(cols):
            if mat[i, j]:
                P[i, j >> 6] |= (<uint64_t>1) << (j & 63)

    pivots = []
    r = 0
    for c in range(pivot_cols):
        if r == rows:
            break
        w = c >> 6
        bit = (<uint64_t>1) << (c & 63)
        p = -1
        for i in range(r, rows):
            if P[i, w] & bit:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            for k in range(nwords):
                tmp = P[p, k]
                P[p, k] = P[r, k]
                P[r, k] = tmp
        # row r is zero left of column c, so words before w never change
        for i in range(rows):
            if i != r and (P[i, w] & bit):
                for k in range(w, nwords):
                    P[i, k] ^= P[r, k]
        pivots.append(c)
        r += 1

    out = np.zeros((rows, cols), dtype=np.uint8)
    cdef unsigned char[:, :] O = out
    for i in range(rows):
        for j in range(cols):
            O[i, j] = (P[i, j >> 6] >> (j & 63)) & 1
    return out, pivots


def coset_leaders(const int64_t[:] colsyn, int r):
    cdef Py_ssize_t n = colsyn.shape[0]
    cdef int64_t size = (<int64_t>1) << r
    cdef int64_t filled = 0
    cdef int64_t s
    cdef uint64_t x, y, c, rr, limit
    cdef int w, b

    table = np.full(size, -1, dtype=np.int64)
    cdef int64_t[:] T = table
    limit = (<uint64_t>1) << n

    for w in range(n + 1):
        x = ((<uint64_t>1) << w) - 1
        while x < limit:
            s = 0
            y = x
            while y:
                b = __builtin_ctzll(y)
                s ^= colsyn[n - 1 - b]
                y &= y - 1
            if T[s] < 0:
                T[s] = <int64_t>x
                filled += 1
                if filled == size:
                    return table
            if x == 0:
                break
            c = x & (~x + 1)
            rr = x + c
            x = (((rr ^ x) >> 2) // c) | rr
    return table
