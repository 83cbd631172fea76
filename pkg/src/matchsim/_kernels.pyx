# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled matching-year kernel.

Same contract as _reference.year_step.  Only comparisons touch the float
inputs (the race keys and lottery priorities are computed by the caller),
and every comparison carries the same index tie-break as the reference,
so outputs are bit-identical between the two kernels.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY

cnp.import_array()


# Max-heap over (priority, student-id) lexicographic order.  Keeping the
# v_star smallest pairs matches a stable sort by priority.
cdef inline bint _pair_gt(double pa, long ia, double pb, long ib) noexcept nogil:
    if pa != pb:
        return pa > pb
    return ia > ib


cdef inline void _siftdown(double* hp, long* hid, Py_ssize_t size) noexcept nogil:
    cdef Py_ssize_t root = 0
    cdef Py_ssize_t child
    cdef double pv = hp[0]
    cdef long iv = hid[0]
    while True:
        child = 2 * root + 1
        if child >= size:
            break
        if child + 1 < size and _pair_gt(hp[child + 1], hid[child + 1],
                                         hp[child], hid[child]):
            child += 1
        if not _pair_gt(hp[child], hid[child], pv, iv):
            break
        hp[root] = hp[child]
        hid[root] = hid[child]
        root = child
    hp[root] = pv
    hid[root] = iv


cdef inline void _heapify(double* hp, long* hid, Py_ssize_t size) noexcept nogil:
    cdef Py_ssize_t start = size // 2 - 1
    cdef Py_ssize_t root, child
    cdef double pv
    cdef long iv
    while start >= 0:
        root = start
        pv = hp[root]
        iv = hid[root]
        while True:
            child = 2 * root + 1
            if child >= size:
                break
            if child + 1 < size and _pair_gt(hp[child + 1], hid[child + 1],
                                             hp[child], hid[child]):
                child += 1
            if not _pair_gt(hp[child], hid[child], pv, iv):
                break
            hp[root] = hp[child]
            hid[root] = hid[child]
            root = child
        hp[root] = pv
        hid[root] = iv
        start -= 1


def year_step(object keys_in, object prio_in, long v_star, int a):
    """One matching year; see _reference.year_step for the contract."""
    keys_arr = np.ascontiguousarray(keys_in, dtype=np.float64)
    prio_arr = np.ascontiguousarray(prio_in, dtype=np.float64)
    if keys_arr.ndim != 2 or keys_arr.shape != prio_arr.shape:
        raise ValueError("keys and u_prio must share shape (N, K)")

    cdef double[:, ::1] keys = keys_arr
    cdef double[:, ::1] prio = prio_arr
    cdef Py_ssize_t N = keys.shape[0]
    cdef Py_ssize_t K = keys.shape[1]
    if a < 1 or a > K:
        raise ValueError("a must be in 1..K")
    if v_star < 0:
        raise ValueError("v_star must be non-negative")

    v_out = np.zeros(K, dtype=np.int64)
    s_out = np.zeros((N, K), dtype=np.uint8)
    chosen_out = np.full(N, -1, dtype=np.int32)
    cdef cnp.int64_t[::1] v = v_out
    cdef cnp.uint8_t[:, ::1] s = s_out
    cdef cnp.int32_t[::1] chosen = chosen_out

    cdef cnp.uint8_t[:, ::1] applied = np.zeros((N, K), dtype=np.uint8)

    cdef Py_ssize_t i, j, k, pos, cnt
    cdef long best_k
    cdef double best

    # applications: a smallest keys per student; strict < keeps the
    # smallest company index on ties, first-free fallback covers rows
    # of all-infinite keys the same way the stable sort does
    with nogil:
        for i in range(N):
            for j in range(a):
                best = INFINITY
                best_k = -1
                for k in range(K):
                    if applied[i, k] == 0 and keys[i, k] < best:
                        best = keys[i, k]
                        best_k = k
                if best_k < 0:
                    for k in range(K):
                        if applied[i, k] == 0:
                            best_k = k
                            break
                applied[i, best_k] = 1
                v[best_k] += 1

    # per-company applicant lists in student order
    total = int(np.asarray(v_out).sum())
    sid_arr = np.empty(total, dtype=np.int64)
    spr_arr = np.empty(total, dtype=np.float64)
    off_arr = np.zeros(K + 1, dtype=np.int64)
    np.cumsum(v_out, out=off_arr[1:])
    fill_arr = off_arr[:K].copy()
    cdef cnp.int64_t[::1] sid = sid_arr
    cdef double[::1] spr = spr_arr
    cdef cnp.int64_t[::1] off = off_arr
    cdef cnp.int64_t[::1] fill = fill_arr

    heap_pr_arr = np.empty(max(v_star, 1), dtype=np.float64)
    heap_id_arr = np.empty(max(v_star, 1), dtype=np.int64)
    cdef double[::1] heap_pr = heap_pr_arr
    cdef cnp.int64_t[::1] heap_id = heap_id_arr

    cdef Py_ssize_t m, sidx
    with nogil:
        for i in range(N):
            for k in range(K):
                if applied[i, k]:
                    pos = fill[k]
                    sid[pos] = i
                    spr[pos] = prio[i, k]
                    fill[k] = pos + 1

        for k in range(K):
            cnt = off[k + 1] - off[k]
            if cnt == 0:
                continue
            if cnt <= v_star:
                for m in range(off[k], off[k + 1]):
                    sidx = sid[m]
                    s[sidx, k] = 1
                    if k > chosen[sidx]:
                        chosen[sidx] = <cnp.int32_t> k
            elif v_star > 0:
                for m in range(v_star):
                    heap_pr[m] = spr[off[k] + m]
                    heap_id[m] = sid[off[k] + m]
                _heapify(&heap_pr[0], <long*> &heap_id[0], v_star)
                for m in range(off[k] + v_star, off[k + 1]):
                    if _pair_gt(heap_pr[0], heap_id[0], spr[m], sid[m]):
                        heap_pr[0] = spr[m]
                        heap_id[0] = sid[m]
                        _siftdown(&heap_pr[0], <long*> &heap_id[0], v_star)
                for m in range(v_star):
                    sidx = heap_id[m]
                    s[sidx, k] = 1
                    if k > chosen[sidx]:
                        chosen[sidx] = <cnp.int32_t> k

    return v_out, s_out, chosen_out
