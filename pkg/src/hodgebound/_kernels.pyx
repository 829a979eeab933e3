# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled hot loops: Whitney element mass matrices and modular rank."""

import numpy as np
cimport numpy as cnp
from libcpp.vector cimport vector
from libcpp.unordered_map cimport unordered_map
from libc.stdint cimport int64_t

cnp.import_array()

from ._kernels_py import local_subsets


cdef double _det(double[:, :, :] G, Py_ssize_t e, long* rows, long* cols, int k) nogil:
    if k == 0:
        return 1.0
    if k == 1:
        return G[e, rows[0], cols[0]]
    if k == 2:
        return (G[e, rows[0], cols[0]] * G[e, rows[1], cols[1]]
                - G[e, rows[0], cols[1]] * G[e, rows[1], cols[0]])
    return (G[e, rows[0], cols[0]] * (G[e, rows[1], cols[1]] * G[e, rows[2], cols[2]]
                                      - G[e, rows[1], cols[2]] * G[e, rows[2], cols[1]])
            - G[e, rows[0], cols[1]] * (G[e, rows[1], cols[0]] * G[e, rows[2], cols[2]]
                                        - G[e, rows[1], cols[2]] * G[e, rows[2], cols[0]])
            + G[e, rows[0], cols[2]] * (G[e, rows[1], cols[0]] * G[e, rows[2], cols[1]]
                                        - G[e, rows[1], cols[1]] * G[e, rows[2], cols[0]]))


def whitney_local(double[:, :, :] G, double[:] vols, int k, int n):
    cdef long[:, :] subs = local_subsets(n, k).astype(np.int_)
    cdef Py_ssize_t m = subs.shape[0]
    cdef Py_ssize_t M = vols.shape[0]
    out_arr = np.zeros((M, m, m))
    cdef double[:, :, :] out = out_arr
    cdef long rows[3]
    cdef long cols[3]
    cdef Py_ssize_t e, s, t, a, b, i, q
    cdef double c, acc, w, kf = 1.0
    for i in range(2, k + 1):
        kf *= i
    kf = kf * kf
    with nogil:
        for e in range(M):
            c = vols[e] / ((n + 1) * (n + 2))
            for s in range(m):
                for t in range(s, m):
                    acc = 0.0
                    for a in range(k + 1):
                        q = 0
                        for i in range(k + 1):
                            if i != a:
                                rows[q] = subs[s, i]
                                q += 1
                        for b in range(k + 1):
                            q = 0
                            for i in range(k + 1):
                                if i != b:
                                    cols[q] = subs[t, i]
                                    q += 1
                            w = 2.0 * c if subs[s, a] == subs[t, b] else c
                            if (a + b) % 2:
                                w = -w
                            acc += w * _det(G, e, rows, cols, k)
                    out[e, s, t] = kf * acc
                    out[e, t, s] = kf * acc
    return out_arr


def _check_csc(n_rows, indptr, indices, data):
    indptr = np.asarray(indptr)
    indices = np.asarray(indices)
    if len(indptr) < 1 or indptr[0] != 0 or np.any(np.diff(indptr) < 0):
        raise ValueError("indptr must start at 0 and be non-decreasing")
    if indptr[-1] != len(indices) or len(indices) != len(data):
        raise ValueError("indptr, indices and data lengths disagree")
    if len(indices) and (indices.min() < 0 or indices.max() >= n_rows):
        raise ValueError("row index out of range (expected CSC layout)")


def rank_mod_p(Py_ssize_t n_rows, indptr_in, indices_in, data_in, int64_t prime):
    cdef int64_t[:] indptr = np.ascontiguousarray(indptr_in, dtype=np.int64)
    cdef int64_t[:] indices = np.ascontiguousarray(indices_in, dtype=np.int64)
    cdef int64_t[:] data = np.ascontiguousarray(data_in, dtype=np.int64)
    cdef Py_ssize_t ncols = indptr.shape[0] - 1
    _check_csc(n_rows, indptr_in, indices_in, data_in)
    cdef vector[vector[int64_t]] piv_rows
    cdef vector[vector[int64_t]] piv_vals
    cdef vector[int64_t] pivot_of = vector[int64_t](n_rows, -1)
    cdef vector[int64_t] cr, cv, nr, nv
    cdef Py_ssize_t j, i, p, q, r
    cdef int64_t low, f, v, inv, base, e, rank = 0
    cdef vector[int64_t]* pr
    cdef vector[int64_t]* pv
    for j in range(ncols):
        # columns arrive in canonical CSC form: sorted rows, no duplicates
        cr.clear()
        cv.clear()
        for i in range(indptr[j], indptr[j + 1]):
            v = data[i] % prime
            if v < 0:
                v += prime
            if v != 0:
                cr.push_back(indices[i])
                cv.push_back(v)
        with nogil:
            while True:
                # drop trailing zeros
                while cr.size() > 0 and cv.back() == 0:
                    cr.pop_back()
                    cv.pop_back()
                if cr.size() == 0:
                    break
                low = cr.back()
                if pivot_of[low] < 0:
                    # normalise and store
                    base = cv.back()
                    e = prime - 2
                    inv = 1
                    while e > 0:
                        if e & 1:
                            inv = (inv * base) % prime
                        base = (base * base) % prime
                        e >>= 1
                    for i in range(<Py_ssize_t>cv.size()):
                        cv[i] = (cv[i] * inv) % prime
                    pivot_of[low] = piv_rows.size()
                    piv_rows.push_back(cr)
                    piv_vals.push_back(cv)
                    rank += 1
                    break
                f = cv.back()
                pr = &piv_rows[pivot_of[low]]
                pv = &piv_vals[pivot_of[low]]
                nr.clear()
                nv.clear()
                p = 0
                q = 0
                while p < <Py_ssize_t>cr.size() or q < <Py_ssize_t>pr.size():
                    if q >= <Py_ssize_t>pr.size() or (p < <Py_ssize_t>cr.size() and cr[p] < pr[0][q]):
                        nr.push_back(cr[p])
                        nv.push_back(cv[p])
                        p += 1
                    elif p >= <Py_ssize_t>cr.size() or pr[0][q] < cr[p]:
                        v = (prime - (f * pv[0][q]) % prime) % prime
                        if v != 0:
                            nr.push_back(pr[0][q])
                            nv.push_back(v)
                        q += 1
                    else:
                        v = (cv[p] - (f * pv[0][q]) % prime) % prime
                        if v < 0:
                            v += prime
                        if v != 0:
                            nr.push_back(cr[p])
                            nv.push_back(v)
                        p += 1
                        q += 1
                cr.swap(nr)
                cv.swap(nv)
    return rank
