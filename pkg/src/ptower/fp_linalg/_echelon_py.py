"""Pure numpy row-reduction kernels mod p.

This is the fallback backend; ``_echelon_cy`` provides the same interface
compiled with Cython.  Three strategies share one entry point:

* p == 2: rows packed into uint64 words, elimination is XOR;
* p == 3: two-plane bitsliced representation (lo = entries equal to 1,
  hi = entries equal to 2), elimination uses boolean formulas;
* general p: per-pivot vectorised outer-product updates in the smallest
  integer dtype whose products cannot overflow.

Every strategy produces the same canonical result: the (reduced) row
echelon form with entries in [0, p) and pivot columns in increasing order.
Pivot choice is positional (first remaining row with a nonzero entry in
the current column), so output is deterministic; the reduced form is the
unique RREF of the row space.
"""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def _int_dtype(p: int):
    # products of two residues must fit: (p-1)^2 bounds the magnitude
    if p <= 181:
        return np.int16
    if p <= 46340:
        return np.int32
    return np.int64


def _pack(bits: np.ndarray) -> np.ndarray:
    """Pack a (rows, cols) 0/1 uint8 array into (rows, words) uint64, little-endian bits."""
    rows, cols = bits.shape
    nwords = (cols + 63) // 64
    padded = np.zeros((rows, nwords * 64), dtype=np.uint8)
    padded[:, :cols] = bits
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view(np.uint64)


def _unpack(words: np.ndarray, cols: int) -> np.ndarray:
    bits = np.unpackbits(words.view(np.uint8), axis=1, bitorder="little")
    return bits[:, :cols]


def _rref_gf2(mat: np.ndarray, reduced: bool):
    rows, cols = mat.shape
    a = _pack((mat % 2).astype(np.uint8))
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        w, b = divmod(c, 64)
        col = (a[:, w] >> np.uint64(b)) & np.uint64(1)
        nz = np.nonzero(col[r:])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
            col[[r, i]] = col[[i, r]]
        if reduced:
            col[r] = 0
            targets = np.nonzero(col)[0]
        else:
            targets = r + 1 + np.nonzero(col[r + 1 :])[0]
        if targets.size:
            a[targets, w:] ^= a[r, w:]
        pivots.append(c)
        r += 1
    return _unpack(a, cols).astype(np.uint8), pivots


def _gf3_add(l1, h1, l2, h2):
    """Bitsliced addition in GF(3): encoding lo=(v==1), hi=(v==2)."""
    sl = ((l1 ^ l2) & ~(h1 | h2)) | (h1 & h2)
    sh = ((h1 ^ h2) & ~(l1 | l2)) | (l1 & l2)
    return sl, sh


def _rref_gf3(mat: np.ndarray, reduced: bool):
    rows, cols = mat.shape
    m = (mat % 3).astype(np.uint8)
    lo = _pack((m == 1).astype(np.uint8))
    hi = _pack((m == 2).astype(np.uint8))
    pivots: list[int] = []
    r = 0
    one = np.uint64(1)
    for c in range(cols):
        if r >= rows:
            break
        w, b = divmod(c, 64)
        bb = np.uint64(b)
        cl = (lo[:, w] >> bb) & one
        ch = (hi[:, w] >> bb) & one
        nz = np.nonzero((cl | ch)[r:])[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            lo[[r, i]] = lo[[i, r]]
            hi[[r, i]] = hi[[i, r]]
            cl[[r, i]] = cl[[i, r]]
            ch[[r, i]] = ch[[i, r]]
        if ch[r]:
            # scale the pivot row by 2 = inverse of 2, swapping the planes
            lo[r, w:], hi[r, w:] = hi[r, w:].copy(), lo[r, w:].copy()
        plo = lo[r, w:]
        phi = hi[r, w:]
        if reduced:
            cl[r] = 0
            ch[r] = 0
        else:
            cl[: r + 1] = 0
            ch[: r + 1] = 0
        # rows with entry 1 need +2*pivot (planes swapped); entry 2 needs +pivot
        t1 = np.nonzero(cl)[0]
        t2 = np.nonzero(ch)[0]
        if t1.size:
            nl, nh = _gf3_add(lo[t1, w:], hi[t1, w:], phi, plo)
            lo[t1, w:] = nl
            hi[t1, w:] = nh
        if t2.size:
            nl, nh = _gf3_add(lo[t2, w:], hi[t2, w:], plo, phi)
            lo[t2, w:] = nl
            hi[t2, w:] = nh
        pivots.append(c)
        r += 1
    out = _unpack(lo, cols).astype(np.uint8) + 2 * _unpack(hi, cols).astype(np.uint8)
    return out, pivots


def _rref_general(mat: np.ndarray, p: int, reduced: bool):
    rows, cols = mat.shape
    dt = _int_dtype(p)
    a = np.asarray(np.asarray(mat, dtype=np.int64) % p, dtype=dt)
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r >= rows:
            break
        col = a[r:, c]
        nz = np.nonzero(col)[0]
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        v = int(a[r, c])
        if v != 1:
            a[r, c:] = (a[r, c:].astype(np.int64) * pow(v, -1, p)) % p
        if reduced:
            col_all = a[:, c].copy()
            col_all[r] = 0
            targets = np.nonzero(col_all)[0]
        else:
            targets = r + 1 + np.nonzero(a[r + 1 :, c])[0]
        if targets.size:
            f = a[targets, c][:, None]
            a[targets, c:] = (a[targets, c:] - f * a[r, c:]) % p
        pivots.append(c)
        r += 1
    return a, pivots


def row_reduce(mat: np.ndarray, p: int, reduced: bool = True):
    """Row-reduce ``mat`` mod p.  Returns (echelon matrix, pivot column list)."""
    mat = np.atleast_2d(np.asarray(mat))
    if mat.size == 0:
        return np.zeros(mat.shape, dtype=np.uint8), []
    if p == 2:
        return _rref_gf2(mat, reduced)
    if p == 3:
        return _rref_gf3(mat, reduced)
    return _rref_general(mat, p, reduced)
