# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled string covariance kernel; same contract as ``_strings_py``."""
import numpy as np

cimport numpy as cnp
from libc.math cimport pow

cnp.import_array()


cdef inline int local_op(long i, long j, long p, long q, long s) nogil:
    if s == i:
        return <int>p
    if s == j and j > i:
        return <int>q
    if s > i and s < j:
        return 3
    return 0


cdef inline bint interior(long i, long j, long s) nogil:
    return s > i and s < j


def string_variance(i_idx, j_idx, op_i, op_j, coef, table):
    cdef long[::1] I = np.ascontiguousarray(i_idx, dtype=np.int64)
    cdef long[::1] Jx = np.ascontiguousarray(j_idx, dtype=np.int64)
    cdef long[::1] P = np.ascontiguousarray(op_i, dtype=np.int64)
    cdef long[::1] Q = np.ascontiguousarray(op_j, dtype=np.int64)
    cdef double[::1] C = np.ascontiguousarray(coef, dtype=float)
    tab = np.ascontiguousarray(table, dtype=complex)
    cdef double[:, ::1] tre = np.ascontiguousarray(tab.real)
    cdef double[:, ::1] tim = np.ascontiguousarray(tab.imag)
    cdef Py_ssize_t m = C.shape[0]
    cdef double z = tre[3, 0]
    cdef double[::1] means = np.empty(m)
    cdef Py_ssize_t a, b, e, f
    cdef long ia, ja, ib, jb, s, na, nb, lo, hi, overlap, count, nsym
    cdef long sites[4]
    cdef int la, lb, n_sites
    cdef bint dup
    cdef double vr, vi, tr, ti, tmp, cov, row, total = 0.0

    for a in range(m):
        na = Jx[a] - I[a] - 1
        if na < 0:
            na = 0
        tmp = tre[P[a], 0] * pow(z, <double>na)
        if Jx[a] > I[a]:
            tmp *= tre[Q[a], 0]
        means[a] = tmp

    with nogil:
        for a in range(m):
            ia = I[a]
            ja = Jx[a]
            na = ja - ia - 1
            if na < 0:
                na = 0
            row = 0.0
            for b in range(a, m):
                ib = I[b]
                jb = Jx[b]
                lo = ia if ia > ib else ib
                hi = ja if ja < jb else jb
                if lo > hi:
                    continue
                sites[0] = ia
                sites[1] = ja
                sites[2] = ib
                sites[3] = jb
                vr = 1.0
                vi = 0.0
                nsym = 0
                for e in range(4):
                    s = sites[e]
                    dup = False
                    for f in range(e):
                        if sites[f] == s:
                            dup = True
                    if dup:
                        continue
                    la = local_op(ia, ja, P[a], Q[a], s)
                    lb = local_op(ib, jb, P[b], Q[b], s)
                    tr = tre[la, lb]
                    ti = tim[la, lb]
                    tmp = vr * tr - vi * ti
                    vi = vr * ti + vi * tr
                    vr = tmp
                    if interior(ia, ja, s) != interior(ib, jb, s):
                        nsym += 1
                nb = jb - ib - 1
                if nb < 0:
                    nb = 0
                overlap = hi - lo - 1
                if overlap < 0:
                    overlap = 0
                count = na + nb - 2 * overlap - nsym
                cov = vr * pow(z, <double>count) - means[a] * means[b]
                if b == a:
                    row += C[b] * cov
                else:
                    row += 2.0 * C[b] * cov
            total += C[a] * row
    return total
