# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops of the mixing-weight solver.

Blocks are given as candidates ``(shape, row, col)`` over a shape table of
concatenated offsets (``ptr`` delimits each shape).  All routines wrap
positions periodically on the ``M x N`` grid.
"""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange, threadid
from libc.stdlib cimport malloc, free

cnp.import_array()

ctypedef cnp.int64_t i64


cdef inline Py_ssize_t _wrap(Py_ssize_t v, Py_ssize_t n) noexcept nogil:
    v = v % n
    if v < 0:
        v += n
    return v


def block_stats(double[:, :, ::1] coef, double[:, ::1] energy,
                i64[::1] off_r, i64[::1] off_c, i64[::1] lines,
                i64[::1] ptr, i64[::1] nlines,
                i64[::1] cand_shape, i64[::1] cand_r, i64[::1] cand_c,
                int nthreads=1):
    """Block energy and directional regularizer for every candidate."""
    cdef Py_ssize_t n = cand_shape.shape[0]
    cdef Py_ssize_t C = coef.shape[0], M = coef.shape[1], N = coef.shape[2]
    cdef Py_ssize_t maxl = 1, maxs = 1, s
    for s in range(nlines.shape[0]):
        if nlines[s] > maxl:
            maxl = nlines[s]
        if ptr[s + 1] - ptr[s] > maxs:
            maxs = ptr[s + 1] - ptr[s]
    S1_arr = np.zeros(n, dtype=np.float64)
    R_arr = np.zeros(n, dtype=np.float64)
    cdef double[::1] S1 = S1_arr
    cdef double[::1] R = R_arr
    if nthreads < 1:
        nthreads = 1
    # per-line counts are fixed per shape
    cnt_arr = np.zeros(ptr[ptr.shape[0] - 1] if ptr.shape[0] else 0, dtype=np.float64)
    cdef double[::1] inv_cnt = cnt_arr
    cdef Py_ssize_t o, sh
    for sh in range(nlines.shape[0]):
        counts = np.bincount(np.asarray(lines[ptr[sh]:ptr[sh + 1]]), minlength=nlines[sh])
        for o in range(ptr[sh], ptr[sh + 1]):
            inv_cnt[o] = 1.0 / counts[lines[o]]
    cdef double[:, ::1] flat = np.asarray(coef).reshape(C, M * N)
    cdef double[::1] eflat = np.asarray(energy).reshape(M * N)
    cdef double *sums = <double *> malloc(nthreads * maxl * sizeof(double))
    cdef Py_ssize_t *idx = <Py_ssize_t *> malloc(nthreads * maxs * sizeof(Py_ssize_t))
    if sums == NULL or idx == NULL:
        free(sums)
        free(idx)
        raise MemoryError()
    cdef Py_ssize_t b, ch, l, tid, base, ibase, L, p0, i
    cdef double e, dev, acc
    try:
        for b in prange(n, nogil=True, num_threads=nthreads, schedule="static"):
            tid = threadid()
            base = tid * maxl
            ibase = tid * maxs
            sh = cand_shape[b]
            p0 = ptr[sh]
            L = ptr[sh + 1] - p0
            e = 0.0
            for i in range(L):
                idx[ibase + i] = _wrap(cand_r[b] + off_r[p0 + i], M) * N + _wrap(cand_c[b] + off_c[p0 + i], N)
                e = e + eflat[idx[ibase + i]]
            S1[b] = e
            acc = 0.0
            for ch in range(C):
                for l in range(nlines[sh]):
                    sums[base + l] = 0.0
                for i in range(L):
                    sums[base + lines[p0 + i]] += flat[ch, idx[ibase + i]]
                for i in range(L):
                    dev = flat[ch, idx[ibase + i]] - sums[base + lines[p0 + i]] * inv_cnt[p0 + i]
                    acc = acc + dev * dev
            R[b] = acc
    finally:
        free(sums)
        free(idx)
    return S1_arr, R_arr


def bcd_sweep(double[:, ::1] energy, double[:, ::1] cov,
              i64[::1] off_r, i64[::1] off_c, i64[::1] ptr,
              i64[::1] cand_shape, i64[::1] cand_r, i64[::1] cand_c,
              i64[::1] order, double[::1] S1, double[::1] R,
              double[::1] a, double lam):
    """One coordinate-descent pass over ``order``; updates ``a`` and ``cov`` in place."""
    cdef Py_ssize_t M = energy.shape[0], N = energy.shape[1]
    cdef Py_ssize_t i, b, sh, o, r, c
    cdef double s2, new, delta
    with nogil:
        for i in range(order.shape[0]):
            b = order[i]
            if S1[b] <= 0.0:
                continue
            sh = cand_shape[b]
            s2 = 0.0
            for o in range(ptr[sh], ptr[sh + 1]):
                r = _wrap(cand_r[b] + off_r[o], M)
                c = _wrap(cand_c[b] + off_c[o], N)
                s2 = s2 + energy[r, c] * cov[r, c]
            new = a[b] + (S1[b] - s2 - lam * R[b]) / S1[b]
            if new < 0.0:
                new = 0.0
            delta = new - a[b]
            if delta != 0.0:
                a[b] = new
                for o in range(ptr[sh], ptr[sh + 1]):
                    r = _wrap(cand_r[b] + off_r[o], M)
                    c = _wrap(cand_c[b] + off_c[o], N)
                    cov[r, c] += delta


def accumulate(double[:, ::1] out, double[::1] weight,
               i64[::1] off_r, i64[::1] off_c, i64[::1] ptr,
               i64[::1] cand_shape, i64[::1] cand_r, i64[::1] cand_c):
    """``out[p] += weight[b]`` for every position ``p`` of every candidate ``b``."""
    cdef Py_ssize_t M = out.shape[0], N = out.shape[1]
    cdef Py_ssize_t b, sh, o, r, c
    cdef double w
    with nogil:
        for b in range(cand_shape.shape[0]):
            w = weight[b]
            if w == 0.0:
                continue
            sh = cand_shape[b]
            for o in range(ptr[sh], ptr[sh + 1]):
                r = _wrap(cand_r[b] + off_r[o], M)
                c = _wrap(cand_c[b] + off_c[o], N)
                out[r, c] += w
