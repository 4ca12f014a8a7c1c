"""Pure numpy versions of the compiled GF(2) kernels.

Same signatures and results as ``_ckernels``; used when the extension
is unavailable or ``CONFQKD_PURE_PYTHON`` is set.
"""
from __future__ import annotations

from itertools import combinations

import numpy as np


def rref(mat, pivot_cols=-1):
    R = np.array(mat, dtype=np.uint8, copy=True)
    rows, cols = R.shape
    if pivot_cols < 0 or pivot_cols > cols:
        pivot_cols = cols
    pivots = []
    r = 0
    for c in range(pivot_cols):
        if r == rows:
            break
        nz = np.flatnonzero(R[r:, c])
        if nz.size == 0:
            continue
        p = r + int(nz[0])
        if p != r:
            R[[r, p]] = R[[p, r]]
        hit = R[:, c].astype(bool)
        hit[r] = False
        R[hit, c:] ^= R[r, c:]
        pivots.append(c)
        r += 1
    return R, pivots


def coset_leaders(colsyn, r):
    colsyn = np.asarray(colsyn, dtype=np.int64)
    n = colsyn.shape[0]
    size = 1 << r
    table = np.full(size, -1, dtype=np.int64)
    filled = 0
    weights = (1 << (n - 1 - np.arange(n, dtype=np.int64))).astype(np.int64)
    for w in range(n + 1):
        if w == 0:
            table[0] = 0
            filled = 1
        else:
            pos = np.array(list(combinations(range(n), w)), dtype=np.int64)
            syn = np.bitwise_xor.reduce(colsyn[pos], axis=1)
            words = weights[pos].sum(axis=1)
            order = np.argsort(words, kind="stable")
            syn, words = syn[order], words[order]
            uniq, first = np.unique(syn, return_index=True)
            fresh = table[uniq] < 0
            table[uniq[fresh]] = words[first[fresh]]
            filled += int(fresh.sum())
        if filled == size:
            break
    return table
