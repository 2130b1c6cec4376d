"""Exact linear algebra over prime fields.

Matrices are stored sparsely (triplet map) and routed to a dense kernel when
they are small or dense enough; very large sparse matrices go through a
dict-based elimination.  Both paths produce the unique reduced row echelon
form, so results are deterministic and byte-identical across runs and
backends.

No floating point is used anywhere.
"""

from __future__ import annotations

import heapq

import numpy as np

from ptower.errors import ResourceCapError, ValidationError
from ptower.fp_linalg._kernel import BACKEND, row_reduce

__all__ = [
    "BACKEND",
    "FpMatrix",
    "Subspace",
    "image",
    "intersect",
    "is_prime",
    "kernel",
    "rank",
    "rref_dense",
    "subspace_sum",
]

# above this many cells the sparse elimination is used unless density is high
DENSE_CELL_LIMIT = 1 << 26
DENSE_DENSITY = 0.25
# hard cap for materialising a dense array
DENSE_HARD_LIMIT = 1 << 28


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def rref_dense(mat: np.ndarray, p: int, reduced: bool = True):
    """Reduced row echelon form of a dense integer array mod p.

    Returns (echelon array, pivot columns).  Thin wrapper over the selected
    kernel; used directly by callers that keep their own numpy matrices.
    """
    return row_reduce(mat, p, reduced)


class FpMatrix:
    """Sparse matrix over F_p.  Treated as immutable once constructed."""

    __slots__ = ("p", "rows", "cols", "entries", "_coo")

    def __init__(self, p, rows, cols, entries=None, _trusted=False):
        if not _trusted:
            if not is_prime(p):
                raise ValidationError(f"modulus {p} is not prime")
            if rows < 0 or cols < 0:
                raise ValidationError("negative matrix dimensions")
        self.p = p
        self.rows = rows
        self.cols = cols
        self._coo = None
        if entries is None:
            self.entries = {}
        elif _trusted:
            self.entries = entries
        else:
            clean = {}
            for (r, c), v in entries.items():
                if not (0 <= r < rows and 0 <= c < cols):
                    raise ValidationError(f"entry index ({r},{c}) out of range")
                v %= p
                if v:
                    clean[(r, c)] = v
            self.entries = clean

    # -- constructors ---------------------------------------------------

    @classmethod
    def from_dense(cls, p, arr):
        arr = np.atleast_2d(np.asarray(arr, dtype=np.int64)) % p
        entries = {}
        for r, c in zip(*np.nonzero(arr)):
            entries[(int(r), int(c))] = int(arr[r, c])
        return cls(p, arr.shape[0], arr.shape[1], entries, _trusted=True)

    @classmethod
    def identity(cls, p, n):
        return cls(p, n, n, {(i, i): 1 for i in range(n)}, _trusted=True)

    @classmethod
    def zeros(cls, p, rows, cols):
        return cls(p, rows, cols, {}, _trusted=True)

    @classmethod
    def from_permutation(cls, p, perm):
        """Matrix sending basis vector e_j to e_perm[j]."""
        return cls(p, len(perm), len(perm), {(int(perm[j]), j): 1 for j in range(len(perm))}, _trusted=True)

    @classmethod
    def vstack(cls, blocks):
        blocks = list(blocks)
        p = blocks[0].p
        cols = blocks[0].cols
        entries = {}
        off = 0
        for b in blocks:
            if b.p != p or b.cols != cols:
                raise ValidationError("vstack shape/modulus mismatch")
            for (r, c), v in b.entries.items():
                entries[(r + off, c)] = v
            off += b.rows
        return cls(p, off, cols, entries, _trusted=True)

    @classmethod
    def hstack(cls, blocks):
        blocks = list(blocks)
        p = blocks[0].p
        rows = blocks[0].rows
        entries = {}
        off = 0
        for b in blocks:
            if b.p != p or b.rows != rows:
                raise ValidationError("hstack shape/modulus mismatch")
            for (r, c), v in b.entries.items():
                entries[(r, c + off)] = v
            off += b.cols
        return cls(p, rows, off, entries, _trusted=True)

    # -- basic structure -------------------------------------------------

    @property
    def nnz(self):
        return len(self.entries)

    @property
    def density(self):
        cells = self.rows * self.cols
        return self.nnz / cells if cells else 0.0

    def is_zero(self):
        return not self.entries

    def __eq__(self, other):
        return (
            isinstance(other, FpMatrix)
            and (self.p, self.rows, self.cols) == (other.p, other.rows, other.cols)
            and self.entries == other.entries
        )

    def __hash__(self):
        return hash((self.p, self.rows, self.cols, frozenset(self.entries.items())))

    def __repr__(self):
        return f"<FpMatrix {self.rows}x{self.cols} mod {self.p}, nnz={self.nnz}>"

    def to_dense(self, dtype=np.int64):
        if self.rows * self.cols > DENSE_HARD_LIMIT:
            raise ResourceCapError(
                f"dense materialisation of {self.rows}x{self.cols} exceeds cap"
            )
        out = np.zeros((self.rows, self.cols), dtype=dtype)
        if self.entries:
            rr, cc, vv = self._as_coo()
            out[rr, cc] = vv
        return out

    def _as_coo(self):
        if self._coo is None:
            n = len(self.entries)
            rr = np.empty(n, dtype=np.int64)
            cc = np.empty(n, dtype=np.int64)
            vv = np.empty(n, dtype=np.int64)
            for i, ((r, c), v) in enumerate(self.entries.items()):
                rr[i] = r
                cc[i] = c
                vv[i] = v
            self._coo = (rr, cc, vv)
        return self._coo

    # -- arithmetic -------------------------------------------------------

    def transpose(self):
        return FpMatrix(
            self.p, self.cols, self.rows,
            {(c, r): v for (r, c), v in self.entries.items()}, _trusted=True,
        )

    def __add__(self, other):
        self._check_same_shape(other)
        entries = dict(self.entries)
        for k, v in other.entries.items():
            w = (entries.get(k, 0) + v) % self.p
            if w:
                entries[k] = w
            else:
                entries.pop(k, None)
        return FpMatrix(self.p, self.rows, self.cols, entries, _trusted=True)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, a):
        a %= self.p
        if a == 0:
            return FpMatrix.zeros(self.p, self.rows, self.cols)
        return FpMatrix(
            self.p, self.rows, self.cols,
            {k: (v * a) % self.p for k, v in self.entries.items()}, _trusted=True,
        )

    def __matmul__(self, other):
        if self.p != other.p:
            raise ValidationError("modulus mismatch")
        if self.cols != other.rows:
            raise ValidationError("matmul shape mismatch")
        rows_of_other: dict[int, list] = {}
        for (r, c), v in other.entries.items():
            rows_of_other.setdefault(r, []).append((c, v))
        acc: dict[tuple[int, int], int] = {}
        for (r, c), v in self.entries.items():
            for c2, v2 in rows_of_other.get(c, ()):
                k = (r, c2)
                acc[k] = acc.get(k, 0) + v * v2
        entries = {k: w % self.p for k, w in acc.items() if w % self.p}
        return FpMatrix(self.p, self.rows, other.cols, entries, _trusted=True)

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Sparse-matrix times dense vector/matrix, entries reduced mod p."""
        x = np.asarray(x, dtype=np.int64)
        vec = x.ndim == 1
        if vec:
            x = x[:, None]
        if x.shape[0] != self.cols:
            raise ValidationError("apply shape mismatch")
        out = np.zeros((self.rows, x.shape[1]), dtype=np.int64)
        if self.entries:
            rr, cc, vv = self._as_coo()
            np.add.at(out, rr, vv[:, None] * x[cc])
            out %= self.p
        return out[:, 0] if vec else out

    def _check_same_shape(self, other):
        if not isinstance(other, FpMatrix) or self.p != other.p:
            raise ValidationError("modulus mismatch")
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValidationError("shape mismatch")

    # -- elimination ------------------------------------------------------

    def _use_dense(self):
        cells = self.rows * self.cols
        return cells <= DENSE_CELL_LIMIT or self.density > DENSE_DENSITY

    def row_echelon(self, reduced=True):
        """Returns (echelon FpMatrix with zero rows dropped, pivot columns)."""
        if self.rows == 0 or self.cols == 0 or not self.entries:
            return FpMatrix.zeros(self.p, 0, self.cols), []
        if self._use_dense():
            red, pivots = row_reduce(self.to_dense(), self.p, reduced)
            r = len(pivots)
            return FpMatrix.from_dense(self.p, red[:r]), pivots
        return self._sparse_echelon(reduced)

    def _sparse_echelon(self, reduced):
        p = self.p
        row_dicts: dict[int, dict[int, int]] = {}
        for (r, c), v in self.entries.items():
            row_dicts.setdefault(r, {})[c] = v
        buckets: dict[int, list] = {}
        heap: list[int] = []
        for seq in sorted(row_dicts):
            row = row_dicts[seq]
            lead = min(row)
            if lead not in buckets:
                heapq.heappush(heap, lead)
                buckets[lead] = []
            buckets[lead].append((seq, row))
        ech: list[tuple[int, dict[int, int]]] = []
        nseq = self.rows
        while heap:
            c = heapq.heappop(heap)
            group = buckets.pop(c, None)
            if not group:
                continue
            group.sort(key=lambda t: t[0])
            _, piv = group[0]
            inv = pow(piv[c], -1, p)
            if inv != 1:
                for k in piv:
                    piv[k] = (piv[k] * inv) % p
            ech.append((c, piv))
            for seq, row in group[1:]:
                f = row.pop(c)
                for k, v in piv.items():
                    if k == c:
                        continue
                    w = (row.get(k, 0) - f * v) % p
                    if w:
                        row[k] = w
                    else:
                        row.pop(k, None)
                if row:
                    lead = min(row)
                    if lead not in buckets:
                        heapq.heappush(heap, lead)
                        buckets[lead] = []
                    buckets[lead].append((nseq, row))
                    nseq += 1
        if reduced:
            # back-substitution against later pivots
            for i in range(len(ech) - 1, -1, -1):
                c, piv = ech[i]
                for j in range(i):
                    _, row = ech[j]
                    f = row.get(c)
                    if f:
                        for k, v in piv.items():
                            w = (row.get(k, 0) - f * v) % p
                            if w:
                                row[k] = w
                            else:
                                row.pop(k, None)
        entries = {}
        pivots = []
        for i, (c, row) in enumerate(ech):
            pivots.append(c)
            for k, v in row.items():
                entries[(i, k)] = v
        return FpMatrix(p, len(ech), self.cols, entries, _trusted=True), pivots

    def rank(self):
        _, pivots = self.row_echelon(reduced=False)
        return len(pivots)

    def right_kernel(self) -> "Subspace":
        """Right kernel {x : M x = 0} as a subspace of F_p^cols."""
        red, pivots = self.row_echelon(reduced=True)
        pivset = set(pivots)
        free = [c for c in range(self.cols) if c not in pivset]
        if not free:
            return Subspace.zero(self.p, self.cols)
        col_of_pivot = {c: i for i, c in enumerate(pivots)}
        entries = {}
        red_rows: dict[int, dict[int, int]] = {}
        for (r, c), v in red.entries.items():
            red_rows.setdefault(r, {})[c] = v
        for i, f in enumerate(free):
            entries[(i, f)] = 1
            for c in pivots:
                v = red_rows.get(col_of_pivot[c], {}).get(f, 0)
                if v:
                    entries[(i, c)] = (-v) % self.p
        span = FpMatrix(self.p, len(free), self.cols, entries, _trusted=True)
        return Subspace.from_spanning(span)

    def column_space(self) -> "Subspace":
        return Subspace.from_spanning(self.transpose())


class Subspace:
    """Subspace of F_p^n, stored as a reduced-echelon basis (rows)."""

    __slots__ = ("ambient_dim", "basis", "pivots")

    def __init__(self, basis: FpMatrix, pivots, _trusted=False):
        self.ambient_dim = basis.cols
        self.basis = basis
        self.pivots = list(pivots)
        if not _trusted:
            self._validate()

    def _validate(self):
        if len(self.pivots) != self.basis.rows:
            raise ValidationError("pivot count does not match basis rows")
        if any(b <= a for a, b in zip(self.pivots, self.pivots[1:])):
            raise ValidationError("pivot columns not strictly increasing")
        for i, c in enumerate(self.pivots):
            if self.basis.entries.get((i, c)) != 1:
                raise ValidationError("pivot not normalised to 1")

    @classmethod
    def from_spanning(cls, span: FpMatrix) -> "Subspace":
        red, pivots = span.row_echelon(reduced=True)
        return cls(red, pivots, _trusted=True)

    @classmethod
    def zero(cls, p, n) -> "Subspace":
        return cls(FpMatrix.zeros(p, 0, n), [], _trusted=True)

    @classmethod
    def full(cls, p, n) -> "Subspace":
        return cls(FpMatrix.identity(p, n), list(range(n)), _trusted=True)

    @property
    def p(self):
        return self.basis.p

    @property
    def dim(self):
        return self.basis.rows

    def __eq__(self, other):
        return (
            isinstance(other, Subspace)
            and self.ambient_dim == other.ambient_dim
            and self.basis == other.basis
        )

    def __hash__(self):
        return hash((self.ambient_dim, self.basis))

    def __repr__(self):
        return f"<Subspace dim {self.dim} of F_{self.p}^{self.ambient_dim}>"

    def reduce_vector(self, v: np.ndarray) -> np.ndarray:
        """Canonical representative of v modulo this subspace (pivot coords cleared)."""
        v = np.asarray(v, dtype=np.int64) % self.p
        if v.shape != (self.ambient_dim,):
            raise ValidationError("vector dimension mismatch")
        out = v.copy()
        rows: dict[int, dict[int, int]] = {}
        for (r, c), val in self.basis.entries.items():
            rows.setdefault(r, {})[c] = val
        for i, c in enumerate(self.pivots):
            f = int(out[c])
            if f:
                for k, val in rows[i].items():
                    out[k] = (out[k] - f * val) % self.p
        return out

    def contains_vector(self, v) -> bool:
        return not self.reduce_vector(v).any()

    def contains(self, other: "Subspace") -> bool:
        if other.ambient_dim != self.ambient_dim:
            raise ValidationError("ambient dimension mismatch")
        return subspace_sum(self, other).dim == self.dim

    def intersect(self, other: "Subspace") -> "Subspace":
        return intersect(self, other)

    def sum(self, other: "Subspace") -> "Subspace":
        return subspace_sum(self, other)


# -- spec-level operations -------------------------------------------------


def rank(m: FpMatrix) -> int:
    return m.rank()


def kernel(m: FpMatrix) -> Subspace:
    return m.right_kernel()


def image(m: FpMatrix) -> Subspace:
    """Column space of m as a subspace of F_p^rows."""
    return m.column_space()


def subspace_sum(a: Subspace, b: Subspace) -> Subspace:
    if a.ambient_dim != b.ambient_dim or a.p != b.p:
        raise ValidationError("ambient dimension or modulus mismatch")
    return Subspace.from_spanning(FpMatrix.vstack([a.basis, b.basis]))


def intersect(a: Subspace, b: Subspace) -> Subspace:
    """Intersection via the Zassenhaus double-block elimination."""
    if a.ambient_dim != b.ambient_dim or a.p != b.p:
        raise ValidationError("ambient dimension or modulus mismatch")
    n = a.ambient_dim
    p = a.p
    top = FpMatrix.hstack([a.basis, a.basis])
    bot = FpMatrix.hstack([b.basis, FpMatrix.zeros(p, b.basis.rows, n)])
    stacked = FpMatrix.vstack([top, bot])
    red, pivots = stacked.row_echelon(reduced=False)
    rows: dict[int, dict[int, int]] = {}
    for (r, c), v in red.entries.items():
        rows.setdefault(r, {})[c] = v
    entries = {}
    k = 0
    for i, c in enumerate(pivots):
        if c >= n:  # left half of this echelon row is zero
            for col, v in rows[i].items():
                entries[(k, col - n)] = v
            k += 1
    span = FpMatrix(p, k, n, entries, _trusted=True)
    return Subspace.from_spanning(span)
