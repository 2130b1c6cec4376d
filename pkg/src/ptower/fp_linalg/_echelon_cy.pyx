# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled row-reduction kernels mod p.

Mirrors ``_echelon_py`` exactly (same strategies, same canonical output);
the per-row inner loops run in C.  Selected by ``_kernel`` when importable.
"""

import numpy as np

from ptower.fp_linalg._echelon_py import _int_dtype, _pack, _unpack

from libc.stdint cimport int64_t, uint8_t, uint64_t

BACKEND = "cython"


cdef inline void _swap_words(uint64_t[:, ::1] a, Py_ssize_t r, Py_ssize_t i) noexcept nogil:
    cdef Py_ssize_t j
    cdef uint64_t t
    for j in range(a.shape[1]):
        t = a[r, j]; a[r, j] = a[i, j]; a[i, j] = t


def _rref_gf2(mat, bint reduced):
    rows, cols = mat.shape
    a_np = _pack((np.asarray(mat) % 2).astype(np.uint8))
    cdef uint64_t[:, ::1] a = a_np
    cdef Py_ssize_t nrows = a_np.shape[0], nwords = a_np.shape[1]
    cdef Py_ssize_t r = 0, i, j, w, pivot, start
    cdef int b
    cdef Py_ssize_t c
    pivots = []
    for c in range(cols):
        if r >= nrows:
            break
        w = c >> 6
        b = c & 63
        pivot = -1
        for i in range(r, nrows):
            if (a[i, w] >> b) & 1:
                pivot = i
                break
        if pivot < 0:
            continue
        if pivot != r:
            _swap_words(a, r, pivot)
        start = 0 if reduced else r + 1
        with nogil:
            for i in range(start, nrows):
                if i != r and ((a[i, w] >> b) & 1):
                    for j in range(w, nwords):
                        a[i, j] ^= a[r, j]
        pivots.append(c)
        r += 1
    return _unpack(a_np, cols).astype(np.uint8), pivots


cdef inline void _gf3_addrow(uint64_t[:, ::1] lo, uint64_t[:, ::1] hi,
                             Py_ssize_t i, Py_ssize_t r, Py_ssize_t w0,
                             bint swap_pivot) noexcept nogil:
    # row_i += pivot (swap_pivot: += 2*pivot, i.e. planes of the pivot swapped)
    cdef Py_ssize_t j
    cdef uint64_t l1, h1, l2, h2, sl, sh
    for j in range(w0, lo.shape[1]):
        l1 = lo[i, j]; h1 = hi[i, j]
        if swap_pivot:
            l2 = hi[r, j]; h2 = lo[r, j]
        else:
            l2 = lo[r, j]; h2 = hi[r, j]
        sl = ((l1 ^ l2) & ~(h1 | h2)) | (h1 & h2)
        sh = ((h1 ^ h2) & ~(l1 | l2)) | (l1 & l2)
        lo[i, j] = sl; hi[i, j] = sh


def _rref_gf3(mat, bint reduced):
    rows, cols = mat.shape
    m = (np.asarray(mat) % 3).astype(np.uint8)
    lo_np = _pack((m == 1).astype(np.uint8))
    hi_np = _pack((m == 2).astype(np.uint8))
    cdef uint64_t[:, ::1] lo = lo_np
    cdef uint64_t[:, ::1] hi = hi_np
    cdef Py_ssize_t nrows = lo_np.shape[0]
    cdef Py_ssize_t r = 0, i, w, pivot, start
    cdef int b
    cdef Py_ssize_t c, j
    cdef uint64_t t, vl, vh
    pivots = []
    for c in range(cols):
        if r >= nrows:
            break
        w = c >> 6
        b = c & 63
        pivot = -1
        for i in range(r, nrows):
            if ((lo[i, w] | hi[i, w]) >> b) & 1:
                pivot = i
                break
        if pivot < 0:
            continue
        if pivot != r:
            _swap_words(lo, r, pivot)
            _swap_words(hi, r, pivot)
        if (hi[r, w] >> b) & 1:
            for j in range(w, lo.shape[1]):
                t = lo[r, j]; lo[r, j] = hi[r, j]; hi[r, j] = t
        start = 0 if reduced else r + 1
        with nogil:
            for i in range(start, nrows):
                if i == r:
                    continue
                vl = (lo[i, w] >> b) & 1
                vh = (hi[i, w] >> b) & 1
                if vl:
                    _gf3_addrow(lo, hi, i, r, w, True)
                elif vh:
                    _gf3_addrow(lo, hi, i, r, w, False)
        pivots.append(c)
        r += 1
    out = _unpack(lo_np, cols).astype(np.uint8) + 2 * _unpack(hi_np, cols).astype(np.uint8)
    return out, pivots


def _rref_u8(mat, int p, bint reduced):
    # general p < 256: uint8 storage, 64K lookup table folds sums mod p
    rows, cols = mat.shape
    a_np = np.asarray(np.asarray(mat, dtype=np.int64) % p, dtype=np.uint8)
    if not a_np.flags.c_contiguous:
        a_np = np.ascontiguousarray(a_np)
    lut_np = (np.arange(65536, dtype=np.int64) % p).astype(np.uint8)
    cdef uint8_t[:, ::1] a = a_np
    cdef uint8_t[::1] lut = lut_np
    cdef Py_ssize_t nrows = rows, ncols = cols
    cdef Py_ssize_t r = 0, i, j, pivot, start
    cdef Py_ssize_t c
    cdef int v, inv, f, pp = p
    cdef uint8_t t
    pivots = []
    for c in range(ncols):
        if r >= nrows:
            break
        pivot = -1
        for i in range(r, nrows):
            if a[i, c]:
                pivot = i
                break
        if pivot < 0:
            continue
        if pivot != r:
            for j in range(ncols):
                t = a[r, j]; a[r, j] = a[pivot, j]; a[pivot, j] = t
        v = a[r, c]
        if v != 1:
            inv = pow(v, -1, p)
            with nogil:
                for j in range(c, ncols):
                    a[r, j] = lut[inv * a[r, j]]
        start = 0 if reduced else r + 1
        with nogil:
            for i in range(start, nrows):
                if i == r or a[i, c] == 0:
                    continue
                f = pp - a[i, c]
                for j in range(c, ncols):
                    a[i, j] = lut[a[i, j] + f * a[r, j]]
        pivots.append(c)
        r += 1
    return a_np, pivots


def _rref_i64(mat, int64_t p, bint reduced):
    rows, cols = mat.shape
    a_np = np.asarray(np.asarray(mat, dtype=np.int64) % p, dtype=np.int64)
    if not a_np.flags.c_contiguous:
        a_np = np.ascontiguousarray(a_np)
    cdef int64_t[:, ::1] a = a_np
    cdef Py_ssize_t nrows = rows, ncols = cols
    cdef Py_ssize_t r = 0, i, j, pivot, start
    cdef Py_ssize_t c
    cdef int64_t v, inv, f, t
    pivots = []
    for c in range(ncols):
        if r >= nrows:
            break
        pivot = -1
        for i in range(r, nrows):
            if a[i, c]:
                pivot = i
                break
        if pivot < 0:
            continue
        if pivot != r:
            for j in range(ncols):
                t = a[r, j]; a[r, j] = a[pivot, j]; a[pivot, j] = t
        v = a[r, c]
        if v != 1:
            inv = pow(v, -1, p)
            with nogil:
                for j in range(c, ncols):
                    a[r, j] = (a[r, j] * inv) % p
        start = 0 if reduced else r + 1
        with nogil:
            for i in range(start, nrows):
                if i == r or a[i, c] == 0:
                    continue
                f = p - a[i, c]
                for j in range(c, ncols):
                    a[i, j] = (a[i, j] + f * a[r, j]) % p
        pivots.append(c)
        r += 1
    return a_np, pivots


def row_reduce(mat, int p, bint reduced=True):
    """Row-reduce ``mat`` mod p.  Returns (echelon matrix, pivot column list)."""
    mat = np.atleast_2d(np.asarray(mat))
    if mat.size == 0:
        return np.zeros(mat.shape, dtype=np.uint8), []
    if p == 2:
        return _rref_gf2(mat, reduced)
    if p == 3:
        return _rref_gf3(mat, reduced)
    if p < 256:
        return _rref_u8(mat, p, reduced)
    return _rref_i64(mat, p, reduced)
