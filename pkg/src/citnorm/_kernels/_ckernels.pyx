# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled rank-scan and weight-accumulation kernels.

Same contracts as ``_pykernels``; a single linear pass per group instead of
a stack of vectorized intermediates.
"""

import numpy as np

cimport numpy as cnp

cnp.import_array()

ctypedef fused scan_t:
    cnp.int64_t
    cnp.float64_t


def rank_scan(scan_t[::1] sorted_values, cnp.int64_t[::1] offsets):
    """See ``_pykernels.rank_scan``."""
    cdef Py_ssize_t n = sorted_values.shape[0]
    cdef Py_ssize_t n_groups = offsets.shape[0] - 1

    midrank = np.empty(n, dtype=np.float64)
    strict_lower = np.empty(n, dtype=np.int64)
    unique_rank = np.empty(n, dtype=np.int64)
    n_unique = np.zeros(n_groups, dtype=np.int64)

    cdef cnp.float64_t[::1] mid_v = midrank
    cdef cnp.int64_t[::1] low_v = strict_lower
    cdef cnp.int64_t[::1] uniq_v = unique_rank
    cdef cnp.int64_t[::1] nu_v = n_unique

    cdef Py_ssize_t g, i, j, k, start, end
    cdef cnp.int64_t rank
    cdef double mid

    with nogil:
        for g in range(n_groups):
            start = offsets[g]
            end = offsets[g + 1]
            i = start
            rank = 0
            while i < end:
                j = i + 1
                while j < end and sorted_values[j] == sorted_values[i]:
                    j += 1
                # run [i, j): strict-lower = i-start, tie count = j-i
                mid = (i - start) + 0.5 * ((j - i) + 1)
                for k in range(i, j):
                    mid_v[k] = mid
                    low_v[k] = i - start
                    uniq_v[k] = rank
                rank += 1
                i = j
            nu_v[g] = rank

    return midrank, strict_lower, unique_rank, n_unique


def accumulate(cnp.int64_t[::1] idx, cnp.float64_t[::1] weights, Py_ssize_t size):
    """Sum ``weights`` into ``size`` bins addressed by ``idx``."""
    if idx.shape[0] != weights.shape[0]:
        raise ValueError("idx and weights must have equal length")
    out = np.zeros(size, dtype=np.float64)
    cdef cnp.float64_t[::1] out_v = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(idx.shape[0]):
            out_v[idx[i]] += weights[i]
    return out
