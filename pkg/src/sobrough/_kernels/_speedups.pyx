# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: packed tensor products, increment distance
matrices and partition dynamic programming.  API mirrors _fallback."""

from libc.math cimport pow as c_pow, sqrt, INFINITY
from libc.stdlib cimport malloc, free

import numpy as np
cimport numpy as cnp

cnp.import_array()


def level_layout(int d, int N):
    cdef int k
    sizes = np.empty(N + 1, dtype=np.int64)
    offsets = np.empty(N + 1, dtype=np.int64)
    sizes[0] = 1
    offsets[0] = 0
    for k in range(1, N + 1):
        sizes[k] = sizes[k - 1] * d
        offsets[k] = offsets[k - 1] + sizes[k - 1]
    return offsets, sizes


cdef void _mul_into(double* out, const double* a, const double* b,
                    const long* off, const long* sz, int N) nogil:
    cdef int k, i, j
    cdef long ia, ib, oa, ob, oo
    cdef double av
    for k in range(N + 1):
        oo = off[k]
        for ia in range(sz[k]):
            out[oo + ia] = 0.0
        for i in range(k + 1):
            j = k - i
            oa = off[i]
            ob = off[j]
            for ia in range(sz[i]):
                av = a[oa + ia]
                if av != 0.0:
                    for ib in range(sz[j]):
                        out[oo + ia * sz[j] + ib] += av * b[ob + ib]


cdef class _Layout:
    cdef long* off
    cdef long* sz
    cdef int N
    cdef long L

    def __cinit__(self, int d, int N):
        cdef int k
        self.N = N
        self.off = <long*>malloc((N + 1) * sizeof(long))
        self.sz = <long*>malloc((N + 1) * sizeof(long))
        self.sz[0] = 1
        self.off[0] = 0
        for k in range(1, N + 1):
            self.sz[k] = self.sz[k - 1] * d
            self.off[k] = self.off[k - 1] + self.sz[k - 1]
        self.L = self.off[N] + self.sz[N]

    def __dealloc__(self):
        free(self.off)
        free(self.sz)


def rowwise_mul(cnp.ndarray[double, ndim=2] a, cnp.ndarray[double, ndim=2] b,
                int d, int N):
    cdef _Layout lay = _Layout(d, N)
    cdef cnp.ndarray[double, ndim=2] out = np.zeros_like(a)
    cdef Py_ssize_t m = a.shape[0], r
    for r in range(m):
        _mul_into(&out[r, 0], &a[r, 0], &b[r, 0], lay.off, lay.sz, N)
    return out


def chen_prefix(cnp.ndarray[double, ndim=2] segs, int d, int N, start=None):
    cdef _Layout lay = _Layout(d, N)
    cdef Py_ssize_t m = segs.shape[0], L = segs.shape[1], r
    cdef cnp.ndarray[double, ndim=2] out = np.zeros((m + 1, L))
    if start is None:
        out[0, 0] = 1.0
    else:
        out[0] = start
    for r in range(m):
        _mul_into(&out[r + 1, 0], &out[r, 0], &segs[r, 0], lay.off, lay.sz, N)
    return out


def inverse_batch(cnp.ndarray[double, ndim=2] nodes, int d, int N):
    cdef _Layout lay = _Layout(d, N)
    cdef Py_ssize_t n = nodes.shape[0], L = nodes.shape[1], r
    cdef long i
    cdef int k
    cdef cnp.ndarray[double, ndim=2] out = np.zeros((n, L))
    cdef double* negx = <double*>malloc(L * sizeof(double))
    cdef double* cur = <double*>malloc(L * sizeof(double))
    cdef double* tmp = <double*>malloc(L * sizeof(double))
    try:
        for r in range(n):
            negx[0] = 0.0
            for i in range(1, L):
                negx[i] = -nodes[r, i]
            for i in range(L):
                cur[i] = 0.0
            cur[0] = 1.0
            for i in range(L):
                out[r, i] = 0.0
            out[r, 0] = 1.0
            for k in range(N):
                _mul_into(tmp, cur, negx, lay.off, lay.sz, N)
                for i in range(L):
                    cur[i] = tmp[i]
                    out[r, i] += tmp[i]
    finally:
        free(negx)
        free(cur)
        free(tmp)
    return out


cdef double _hom_dist_pair(const double* inv_u, const double* node_v,
                           double* tmp, const long* off, const long* sz,
                           int N) nogil:
    cdef int k
    cdef long c
    cdef double ss, total = 0.0
    _mul_into(tmp, inv_u, node_v, off, sz, N)
    for k in range(1, N + 1):
        ss = 0.0
        for c in range(sz[k]):
            ss += tmp[off[k] + c] * tmp[off[k] + c]
        total += c_pow(ss, 0.5 / k)
    return total


def hom_dist_block(cnp.ndarray[double, ndim=2] inv_rows,
                   cnp.ndarray[double, ndim=2] nodes, int d, int N):
    cdef _Layout lay = _Layout(d, N)
    cdef Py_ssize_t m = inv_rows.shape[0], n = nodes.shape[0], u, v
    cdef cnp.ndarray[double, ndim=2] out = np.empty((m, n))
    cdef double* tmp = <double*>malloc(lay.L * sizeof(double))
    try:
        for u in range(m):
            for v in range(n):
                out[u, v] = _hom_dist_pair(&inv_rows[u, 0], &nodes[v, 0],
                                           tmp, lay.off, lay.sz, N)
    finally:
        free(tmp)
    return out


def hom_dist_matrix(cnp.ndarray[double, ndim=2] nodes,
                    cnp.ndarray[double, ndim=2] inv, int d, int N,
                    Py_ssize_t i0, Py_ssize_t i1):
    cdef _Layout lay = _Layout(d, N)
    cdef Py_ssize_t w = i1 - i0, u, v
    cdef cnp.ndarray[double, ndim=2] out = np.empty((w, w))
    cdef double* tmp = <double*>malloc(lay.L * sizeof(double))
    try:
        for u in range(w):
            for v in range(w):
                out[u, v] = _hom_dist_pair(&inv[i0 + u, 0], &nodes[i0 + v, 0],
                                           tmp, lay.off, lay.sz, N)
    finally:
        free(tmp)
    return out


def level_diff_block(cnp.ndarray[double, ndim=2] inv1, cnp.ndarray[double, ndim=2] nodes1,
                     cnp.ndarray[double, ndim=2] inv2, cnp.ndarray[double, ndim=2] nodes2,
                     int d, int N, int k):
    cdef _Layout lay = _Layout(d, N)
    cdef Py_ssize_t m = inv1.shape[0], n = nodes1.shape[0], u, v
    cdef long c
    cdef double ss, diff
    cdef cnp.ndarray[double, ndim=2] out = np.empty((m, n))
    cdef double* t1 = <double*>malloc(lay.L * sizeof(double))
    cdef double* t2 = <double*>malloc(lay.L * sizeof(double))
    try:
        for u in range(m):
            for v in range(n):
                _mul_into(t1, &inv1[u, 0], &nodes1[v, 0], lay.off, lay.sz, k)
                _mul_into(t2, &inv2[u, 0], &nodes2[v, 0], lay.off, lay.sz, k)
                ss = 0.0
                for c in range(lay.sz[k]):
                    diff = t1[lay.off[k] + c] - t2[lay.off[k] + c]
                    ss += diff * diff
                out[u, v] = sqrt(ss)
    finally:
        free(t1)
        free(t2)
    return out


def sobolev_pair_sum(cnp.ndarray[double, ndim=2] nodes,
                     cnp.ndarray[double, ndim=2] inv, int d, int N,
                     double p, double expo, double h,
                     Py_ssize_t i0, Py_ssize_t i1):
    """Kahan-compensated Σ_{u<v} dist(u,v)^p · ((v−u)h)^(−expo) over the window."""
    cdef _Layout lay = _Layout(d, N)
    cdef Py_ssize_t u, v
    cdef double dist, term, s = 0.0, comp = 0.0, y, t
    cdef double* tmp = <double*>malloc(lay.L * sizeof(double))
    try:
        for u in range(i0, i1):
            for v in range(u + 1, i1):
                dist = _hom_dist_pair(&inv[u, 0], &nodes[v, 0],
                                      tmp, lay.off, lay.sz, N)
                term = c_pow(dist, p) * c_pow((v - u) * h, -expo)
                y = term - comp
                t = s + y
                comp = (t - s) - y
                s = t
    finally:
        free(tmp)
    return s


def partition_dp_max(cnp.ndarray[double, ndim=2] w):
    cdef Py_ssize_t n = w.shape[0], j, m
    if n < 2:
        return 0.0
    cdef cnp.ndarray[double, ndim=1] dp = np.full(n, -INFINITY)
    cdef double best, cand
    dp[0] = 0.0
    for j in range(1, n):
        best = -INFINITY
        for m in range(j):
            cand = dp[m] + w[m, j]
            if cand > best:
                best = cand
        dp[j] = best
    return float(dp[n - 1])


def interval_dp_table(cnp.ndarray[double, ndim=2] w):
    cdef Py_ssize_t n = w.shape[0], a, b, m
    cdef cnp.ndarray[double, ndim=2] T = np.zeros((n, n))
    cdef double best, cand
    for a in range(n - 1):
        for b in range(a + 1, n):
            best = -INFINITY
            for m in range(a, b):
                cand = T[a, m] + w[m, b]
                if cand > best:
                    best = cand
            T[a, b] = best
    return T
