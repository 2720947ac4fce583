# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled knapsack kernel over int64 values/weights (same contract as _knapsack_py)."""

from libc.stdint cimport int64_t, uint64_t
from libc.stdlib cimport malloc, free


def knapsack_max_value(values, weights, capacity):
    cdef Py_ssize_t n = len(values)
    cdef int64_t cap = capacity
    if cap < 0:
        return None
    cdef Py_ssize_t top = 0
    cdef Py_ssize_t i, val, t, reach = 0
    for i in range(n):
        top += <Py_ssize_t>values[i]
    cdef int64_t *bw = <int64_t *>malloc((top + 1) * sizeof(int64_t))
    cdef uint64_t *bm = <uint64_t *>malloc((top + 1) * sizeof(uint64_t))
    cdef int64_t *vs = <int64_t *>malloc((n + 1) * sizeof(int64_t))
    cdef int64_t *ws = <int64_t *>malloc((n + 1) * sizeof(int64_t))
    if bw == NULL or bm == NULL or vs == NULL or ws == NULL:
        free(bw); free(bm); free(vs); free(ws)
        raise MemoryError()
    cdef int64_t cw, old
    cdef uint64_t cm, bit
    try:
        for i in range(n):
            vs[i] = values[i]
            ws[i] = weights[i]
        for val in range(top + 1):
            bw[val] = -1
            bm[val] = 0
        bw[0] = 0
        for i in range(n):
            bit = (<uint64_t>1) << i
            for val in range(reach, -1, -1):
                if bw[val] < 0:
                    continue
                cw = bw[val] + ws[i]
                if cw > cap:
                    continue
                t = val + vs[i]
                cm = bm[val] | bit
                old = bw[t]
                if old < 0 or cw < old or (cw == old and cm < bm[t]):
                    bw[t] = cw
                    bm[t] = cm
            reach += vs[i]
        for val in range(top, -1, -1):
            if bw[val] >= 0:
                return int(val), int(bw[val]), int(bm[val])
        return None
    finally:
        free(bw); free(bm); free(vs); free(ws)
