"""Congruence homomorphisms and the finite coefficient modules they induce.

A CongruenceMap sends the generators of a presented group to SL(2, Z/p^k)
matrices, usually obtained by evaluating polynomial matrix entries at a
Hensel-lifted root of the trace ring's minimal polynomial (the degree-1
prime picture: entries of O_F reduce through x -> root).

Module constructors:

* coset_module: permutation module on the cosets of a congruence-shaped
  subgroup inside the generated image;
* sym_module: degree-d homogeneous polynomials in two variables;
* tensor_module: Kronecker products;
* permutation_module: explicit finite quotient actions (used for abstract
  index-p pairs in tests).

All modules carry per-generator action matrices over F_p together with an
invariant nondegenerate bilinear pairing (None means the standard dot
product, which is invariant for permutation actions).
"""

from __future__ import annotations

from math import comb

import numpy as np

from ptower.errors import (
    InvariantViolationError,
    ResourceCapError,
    UnusablePrimeError,
    ValidationError,
)
from ptower.fp_linalg import FpMatrix, is_prime
from ptower.group_core import FreeRingElement, GroupPresentation
from ptower.words import Word

DEFAULT_INDEX_CAP = 200_000
ELEMENT_ENUM_CAP = 2_000_000

# -- 2x2 matrices mod m as tuples (a, b, c, d) ------------------------------


def mat_mul(x, y, m):
    a, b, c, d = x
    e, f, g, h = y
    return ((a * e + b * g) % m, (a * f + b * h) % m, (c * e + d * g) % m, (c * f + d * h) % m)


def mat_inv_det1(x, m):
    a, b, c, d = x
    return (d % m, (-b) % m, (-c) % m, a % m)


def mat_det(x, m):
    a, b, c, d = x
    return (a * d - b * c) % m


MAT_ID = (1, 0, 0, 1)


def sl2_order(p: int, k: int) -> int:
    """|SL(2, Z/p^k)| = p^(3k-2) (p^2 - 1)."""
    return p ** (3 * k - 2) * (p * p - 1)


def poly_eval(coeffs, x, m):
    """Evaluate an integer polynomial (coefficients low degree first) mod m."""
    acc = 0
    for c in reversed(coeffs):
        acc = (acc * x + c) % m
    return acc


def poly_derivative(coeffs):
    return [i * c for i, c in enumerate(coeffs)][1:]


def hensel_root(f, p: int, a1: int, k: int) -> int:
    """Lift a simple root of f mod p to a root mod p^k.

    Requires f(a1) = 0 mod p and f'(a1) != 0 mod p; a non-simple root makes
    the prime unusable for the degree-1 reduction and is rejected.
    """
    if not is_prime(p):
        raise ValidationError(f"{p} is not prime")
    if k < 1:
        raise ValidationError("level exponent must be >= 1")
    a1 %= p
    if poly_eval(f, a1, p) != 0:
        raise ValidationError(f"{a1} is not a root of the polynomial mod {p}")
    fp = poly_eval(poly_derivative(f), a1, p)
    if fp == 0:
        raise UnusablePrimeError(
            f"root {a1} mod {p} is not simple; prime unusable for degree-1 reduction"
        )
    a = a1
    for j in range(2, k + 1):
        mod = p**j
        val = poly_eval(f, a, mod)
        deriv_inv = pow(poly_eval(poly_derivative(f), a, p), -1, p)
        t = (-(val // p ** (j - 1)) * deriv_inv) % p
        a = (a + t * p ** (j - 1)) % mod
    return a


class RingSpec:
    """Order Z[x]/(f) of the trace field; f monic irreducible (asserted by corpus)."""

    __slots__ = ("min_poly", "label")

    def __init__(self, min_poly, label=""):
        coeffs = [int(c) for c in min_poly]
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        if not coeffs or coeffs[-1] != 1:
            raise ValidationError("minimal polynomial must be monic (leading coefficient 1)")
        self.min_poly = coeffs
        self.label = label

    @property
    def degree(self):
        return len(self.min_poly) - 1

    def simple_roots_mod(self, p: int) -> list[int]:
        """Simple roots of the minimal polynomial mod p, ascending."""
        fprime = poly_derivative(self.min_poly)
        return [
            a
            for a in range(p)
            if poly_eval(self.min_poly, a, p) == 0 and poly_eval(fprime, a, p) != 0
        ]

    def __repr__(self):
        return f"<RingSpec {self.label or self.min_poly}>"


class CongruenceMap:
    """Generator images in SL(2, Z/p^k)."""

    __slots__ = ("p", "k", "root", "images", "inv_images", "label")

    def __init__(self, p, k, images, root=None, label=""):
        if not is_prime(p):
            raise ValidationError(f"{p} is not prime")
        if k < 1:
            raise ValidationError("level exponent must be >= 1")
        mod = p**k
        self.p = p
        self.k = k
        self.root = None if root is None else root % mod
        self.label = label
        self.images = []
        self.inv_images = []
        for g in images:
            g = tuple(int(x) % mod for x in g)
            if mat_det(g, mod) != 1:
                raise ValidationError(f"generator image {g} has determinant != 1 mod {mod}")
            self.images.append(g)
            self.inv_images.append(mat_inv_det1(g, mod))

    @classmethod
    def from_polynomial_images(cls, ring: RingSpec, p, k, poly_images, a1=None, label=""):
        """Evaluate 2x2 polynomial matrices at a Hensel-lifted root of ring.min_poly.

        poly_images: per generator, 2x2 nested list of coefficient lists
        (low degree first).  a1 picks the prime above p; default is the
        smallest simple root mod p.
        """
        if a1 is None:
            roots = ring.simple_roots_mod(p)
            if not roots:
                raise UnusablePrimeError(
                    f"no simple root of {ring.min_poly} mod {p}: no usable degree-1 prime"
                )
            a1 = roots[0]
        root = hensel_root(ring.min_poly, p, a1, k)
        mod = p**k
        images = []
        for gmat in poly_images:
            (paa, pab), (pac, pad) = gmat
            images.append(
                (
                    poly_eval(paa, root, mod),
                    poly_eval(pab, root, mod),
                    poly_eval(pac, root, mod),
                    poly_eval(pad, root, mod),
                )
            )
        return cls(p, k, images, root=root, label=label)

    @property
    def n_generators(self):
        return len(self.images)

    @property
    def modulus(self):
        return self.p**self.k

    def identity(self):
        return MAT_ID

    def generator_image(self, i, e=1):
        return self.images[i] if e == 1 else self.inv_images[i]

    def word_image(self, w: Word):
        m = MAT_ID
        mod = self.modulus
        for g, e in w.letters:
            m = mat_mul(m, self.generator_image(g, e), mod)
        return m

    def reduce_to(self, k2: int) -> "CongruenceMap":
        if not (1 <= k2 <= self.k):
            raise ValidationError("can only reduce to a lower positive level")
        mod = self.p**k2
        return CongruenceMap(
            self.p, k2, [tuple(x % mod for x in g) for g in self.images],
            root=None if self.root is None else self.root % mod, label=self.label,
        )

    def __repr__(self):
        return f"<CongruenceMap {self.label or ''} -> SL(2, Z/{self.p}^{self.k}), {self.n_generators} gens>"


class SubgroupSpec:
    """Congruence-shaped subgroup of SL(2, Z/p^k).

    Kinds: full; principal(j) (= identity mod p^j); borel0(j) (lower left
    entry 0 mod p^j); h(j) (diagonal 1 mod p, lower left 0 mod p, upper
    right 0 mod p^j); p(j, l) (diagonal 1 mod p, upper right 0 mod p^j,
    lower left 0 mod p^l).
    """

    KINDS = ("full", "principal", "borel0", "h", "p")
    __slots__ = ("kind", "j", "l")

    def __init__(self, kind, j=None, l=None):
        if kind not in self.KINDS:
            raise ValidationError(f"unknown subgroup kind {kind!r}")
        self.kind = kind
        self.j = j
        self.l = l
        if kind == "full":
            pass
        elif kind in ("principal", "borel0", "h"):
            if j is None or j < 0:
                raise ValidationError(f"kind {kind} needs a level parameter j >= 0")
        elif kind == "p":
            if j is None or l is None or j < 0 or l < 0:
                raise ValidationError("kind p needs parameters j, l >= 0")

    @classmethod
    def full(cls):
        return cls("full")

    @classmethod
    def principal(cls, j):
        return cls("principal", j)

    @classmethod
    def borel0(cls, j):
        return cls("borel0", j)

    @classmethod
    def h_family(cls, j):
        return cls("h", j)

    @classmethod
    def p_family(cls, j, l):
        return cls("p", j, l)

    def validate_level(self, k):
        top = max(x for x in (self.j, self.l, 0) if x is not None)
        if top > k:
            raise ValidationError(f"subgroup parameter {top} exceeds ambient level {k}")

    def member(self, m, p, k) -> bool:
        a, b, c, d = m
        if self.kind == "full":
            return True
        if self.kind == "principal":
            q = p**self.j
            return a % q == 1 and d % q == 1 and b % q == 0 and c % q == 0
        if self.kind == "borel0":
            return c % p**self.j == 0
        if self.kind == "h":
            return (
                a % p == 1 and d % p == 1 and c % p == 0 and b % p**self.j == 0
            )
        # kind == "p"
        return (
            a % p == 1 and d % p == 1 and b % p**self.j == 0 and c % p**self.l == 0
        )

    def coset_key(self, m, p, k):
        """Canonical label of the left coset m*U, or None when the kind
        has no closed-form invariant (h and p kinds; handled by full
        enumeration)."""
        if self.kind == "full":
            return ()
        if self.kind == "principal":
            q = p**self.j
            return tuple(x % q for x in m)
        if self.kind == "borel0":
            q = p**self.j
            a, _, c, _ = m
            if a % p != 0:
                return (0, (c * pow(a % q, -1, q)) % q)
            return (1, (a * pow(c % q, -1, q)) % q)
        return None

    def describe(self):
        if self.kind == "full":
            return "full"
        if self.kind == "p":
            return f"p({self.j},{self.l})"
        return f"{self.kind}({self.j})"

    def __repr__(self):
        return f"<SubgroupSpec {self.describe()}>"


class GammaModule:
    """Finite-dimensional F_p module with per-generator action matrices.

    pairing None means the standard dot product.  ``perm`` holds the
    underlying permutations when every generator acts by one (coset and
    quotient modules); ``tensor`` remembers Kronecker factors.  ``meta``
    carries coset bookkeeping for the fast paths in algebra_trunc.
    """

    __slots__ = ("p", "dim", "n_generators", "_mats", "pairing", "perm", "tensor", "meta")

    def __init__(self, p, dim, mats=None, pairing=None, perm=None, tensor=None, meta=None):
        if not is_prime(p):
            raise ValidationError(f"{p} is not prime")
        self.p = p
        self.dim = dim
        self.perm = perm
        self.tensor = tensor
        self.meta = meta or {}
        self.pairing = pairing
        if mats is not None:
            self._mats = list(mats)
            self.n_generators = len(self._mats)
        elif perm is not None:
            self._mats = [None] * len(perm)
            self.n_generators = len(perm)
        else:
            raise ValidationError("module needs action matrices or permutations")

    def action(self, i, e=1) -> FpMatrix:
        """Action matrix of g_i (e=1) or g_i^-1 (e=-1)."""
        if self._mats[i] is None:
            fwd, inv = self.perm[i]
            self._mats[i] = (
                FpMatrix.from_permutation(self.p, fwd),
                FpMatrix.from_permutation(self.p, inv),
            )
        return self._mats[i][0 if e == 1 else 1]

    def pairing_matrix(self) -> FpMatrix:
        return self.pairing if self.pairing is not None else FpMatrix.identity(self.p, self.dim)

    def word_matrix(self, w: Word) -> FpMatrix:
        m = FpMatrix.identity(self.p, self.dim)
        for g, e in w.letters:
            m = m @ self.action(g, e)
        return m

    def word_perm(self, w: Word) -> np.ndarray:
        """Composed permutation of a word (permutation modules only)."""
        if self.perm is None:
            raise ValidationError("not a permutation module")
        out = np.arange(self.dim)
        for g, e in reversed(w.letters):
            out = self.perm[g][0 if e == 1 else 1][out]
        return out

    def ring_image(self, elem: FreeRingElement) -> FpMatrix:
        acc = FpMatrix.zeros(self.p, self.dim, self.dim)
        for w, c in elem.terms.items():
            acc = acc + self.word_matrix(w).scale(c)
        return acc

    def apply_word(self, w: Word, x: np.ndarray) -> np.ndarray:
        for g, e in reversed(w.letters):
            x = self.action(g, e).apply(x)
        return x

    def check_invariants(self, pres: GroupPresentation | None = None):
        """Assert inverse actions, pairing invariance, and relator identities."""
        ident = FpMatrix.identity(self.p, self.dim)
        for i in range(self.n_generators):
            if self.perm is not None:
                fwd, inv = self.perm[i]
                if not np.array_equal(fwd[inv], np.arange(self.dim)):
                    raise InvariantViolationError(f"generator {i}: permutations not inverse")
            elif self.action(i, 1) @ self.action(i, -1) != ident:
                raise InvariantViolationError(f"generator {i}: action times inverse is not identity")
        if self.pairing is not None:
            pm = self.pairing
            for i in range(self.n_generators):
                m = self.action(i, 1)
                if m.transpose() @ pm @ m != pm:
                    raise InvariantViolationError(f"generator {i}: pairing not invariant")
        if pres is not None:
            if pres.n_generators != self.n_generators:
                raise ValidationError("presentation/module generator count mismatch")
            for r in pres.relators:
                if self.perm is not None:
                    if not np.array_equal(self.word_perm(r), np.arange(self.dim)):
                        raise InvariantViolationError(f"relator {r!r} does not act as identity")
                elif self.word_matrix(r) != ident:
                    raise InvariantViolationError(f"relator {r!r} does not act as identity")
        return True

    def __repr__(self):
        return f"<GammaModule dim {self.dim} over F_{self.p}, {self.n_generators} gens>"


def trivial_module(p: int, n_generators: int) -> GammaModule:
    n = np.zeros(1, dtype=np.int64)
    perm = [(n.copy(), n.copy()) for _ in range(n_generators)]
    return GammaModule(p, 1, perm=perm, meta={"kind": "trivial"})


def permutation_module(p: int, perms) -> GammaModule:
    """Module from explicit generator permutations of a finite set.

    perms: per generator, an integer array sigma with g_i . e_x = e_sigma[x].
    This is the induction-formula module F_p[G/H] for an abstract finite
    quotient action on cosets.
    """
    arrs = []
    dim = None
    for s in perms:
        s = np.asarray(s, dtype=np.int64)
        if dim is None:
            dim = len(s)
        if len(s) != dim or sorted(s.tolist()) != list(range(dim)):
            raise ValidationError("generator images must be permutations of the same set")
        inv = np.empty_like(s)
        inv[s] = np.arange(dim)
        arrs.append((s, inv))
    return GammaModule(p, dim, perm=arrs, meta={"kind": "permutation"})


def _enumerate_group(hom: CongruenceMap, cap: int) -> list:
    """BFS closure of the generator images; deterministic order of discovery."""
    mod = hom.modulus
    gens = list(hom.images) + list(hom.inv_images)
    seen = {MAT_ID}
    order = [MAT_ID]
    frontier = [MAT_ID]
    while frontier:
        nxt = []
        for m in frontier:
            for g in gens:
                m2 = mat_mul(g, m, mod)
                if m2 not in seen:
                    seen.add(m2)
                    order.append(m2)
                    nxt.append(m2)
                    if len(seen) > cap:
                        raise ResourceCapError(
                            f"group enumeration exceeded cap {cap} at level {hom.p}^{hom.k}"
                        )
        frontier = nxt
    return order


def coset_module(hom: CongruenceMap, sub: SubgroupSpec, cap: int = DEFAULT_INDEX_CAP) -> GammaModule:
    """Permutation module of the generated image Q on Q/(Q meet U).

    Cosets are found breadth-first from the identity coset with the
    generator order fixed (generators then inverses); the basis is then
    sorted by canonical coset label so the module does not depend on the
    generator order.
    """
    sub.validate_level(hom.k)
    p, k = hom.p, hom.k
    mod = hom.modulus
    if sub.kind == "full":
        m = trivial_module(p, hom.n_generators)
        m.meta.update({"kind": "coset", "subgroup": "full", "level": k, "index": 1})
        return m

    if sub.coset_key(MAT_ID, p, k) is not None:
        # closed-form coset invariant: BFS directly on cosets
        gens = list(hom.images) + list(hom.inv_images)
        key0 = sub.coset_key(MAT_ID, p, k)
        reps = {key0: MAT_ID}
        order = [key0]
        frontier = [MAT_ID]
        while frontier:
            nxt = []
            for m in frontier:
                for g in gens:
                    m2 = mat_mul(g, m, mod)
                    key = sub.coset_key(m2, p, k)
                    if key not in reps:
                        reps[key] = m2
                        order.append(key)
                        nxt.append(m2)
                        if len(reps) > cap:
                            raise ResourceCapError(
                                f"coset index exceeded cap {cap} for {sub.describe()}"
                            )
            frontier = nxt
        keys = sorted(reps)
        idx = {key: i for i, key in enumerate(keys)}
        rep_list = [reps[key] for key in keys]
        group_order = len(keys) if sub.kind == "principal" and sub.j == k else None

        def key_of(mat):
            return idx[sub.coset_key(mat, p, k)]

    else:
        # no invariant label: enumerate the whole image and canonicalise
        elements = _enumerate_group(hom, max(cap, ELEMENT_ENUM_CAP))
        group_order = len(elements)
        u_part = [m for m in elements if sub.member(m, p, k)]
        elem_coset: dict[tuple, int] = {}
        keys = []
        for m in elements:
            if m in elem_coset:
                continue
            coset = [mat_mul(m, u, mod) for u in u_part]
            key = min(coset)
            idx = len(keys)
            for x in coset:
                elem_coset[x] = idx
            keys.append(key)
        if len(keys) > cap:
            raise ResourceCapError(f"coset index {len(keys)} exceeds cap {cap}")
        order_idx = sorted(range(len(keys)), key=lambda i: keys[i])
        relabel = {old: new for new, old in enumerate(order_idx)}
        keys = [keys[i] for i in order_idx]
        rep_list = list(keys)  # the canonical smallest element represents its coset
        elem_coset = {m: relabel[c] for m, c in elem_coset.items()}

        def key_of(mat):
            return elem_coset[mat]

    dim = len(keys)
    perm = []
    for i in range(hom.n_generators):
        fwd = np.empty(dim, dtype=np.int64)
        inv = np.empty(dim, dtype=np.int64)
        for x, rep in enumerate(rep_list):
            fwd[x] = key_of(mat_mul(hom.images[i], rep, mod))
            inv[x] = key_of(mat_mul(hom.inv_images[i], rep, mod))
        perm.append((fwd, inv))
    meta = {
        "kind": "coset",
        "subgroup": sub.describe(),
        "spec": sub,
        "level": k,
        "p": p,
        "index": dim,
        "group_order": group_order,
        "reps": rep_list,
        "keys": keys,
        "elem_coset": None if sub.coset_key(MAT_ID, p, k) is not None else elem_coset,
    }
    return GammaModule(p, dim, perm=perm, meta=meta)


def _substitution_matrix(g, p, d):
    """Action of g on degree-d homogeneous polynomials.

    Realised by the variable substitution x -> a x - c y, y -> -b x + d y
    (the swap-conjugated inverse), which is a left action and matches the
    self-dual symmetric power of the standard representation.
    """
    a, b, c, dd = (x % p for x in g)
    alpha, beta = a, (-c) % p
    gamma, delta = (-b) % p, dd
    n = d + 1
    out = np.zeros((n, n), dtype=np.int64)
    for r in range(n):
        # expand (alpha x + beta y)^(d-r) (gamma x + delta y)^r
        u = np.zeros(d - r + 1, dtype=np.int64)
        for t in range(d - r + 1):
            u[t] = comb(d - r, t) * pow(alpha, d - r - t, p) * pow(beta, t, p) % p
        v = np.zeros(r + 1, dtype=np.int64)
        for t in range(r + 1):
            v[t] = comb(r, t) * pow(gamma, r - t, p) * pow(delta, t, p) % p
        coeffs = np.convolve(u, v) % p  # index s = exponent of y
        out[:, r] = coeffs
    return out


def sym_pairing(p: int, d: int) -> FpMatrix:
    """The invariant bilinear form on Sym^d: <x^i y^(d-i), x^j y^(d-j)> =
    delta(j, d-i) (-1)^i binom(d, i)^-1, in the basis x^(d-r) y^r."""
    entries = {}
    for r in range(d + 1):
        i = d - r
        entries[(r, d - r)] = ((-1) ** i * pow(comb(d, i) % p, -1, p)) % p
    return FpMatrix(p, d + 1, d + 1, entries)


def sym_module(p: int, d: int, hom: CongruenceMap) -> GammaModule:
    """Sym^d with the generator images of ``hom`` reduced mod p.

    Basis: monomials x^(d-r) y^r, r = 0..d.  Rejects d >= p, where the
    pairing denominators vanish (Lucas).
    """
    if not (0 <= d <= p - 1):
        raise ValidationError(f"sym_module needs 0 <= d <= p-1, got d={d}, p={p}")
    if hom.p != p:
        raise ValidationError("homomorphism modulus mismatch")
    mats = []
    for i in range(hom.n_generators):
        g = tuple(x % p for x in hom.images[i])
        m = FpMatrix.from_dense(p, _substitution_matrix(g, p, d))
        mi = FpMatrix.from_dense(p, _substitution_matrix(mat_inv_det1(g, p), p, d))
        mats.append((m, mi))
    pairing = sym_pairing(p, d) if d > 0 else None
    mod = GammaModule(
        p, d + 1, mats=mats, pairing=pairing,
        meta={"kind": "sym", "degree": d, "root": hom.root},
    )
    mod.check_invariants()
    return mod


def tensor_module(a: GammaModule, b: GammaModule) -> GammaModule:
    """Kronecker product module; dims and pairings multiply."""
    if a.p != b.p:
        raise ValidationError("modulus mismatch in tensor product")
    if a.n_generators != b.n_generators:
        raise ValidationError("generator count mismatch in tensor product")
    p = a.p
    dim = a.dim * b.dim
    perm = None
    mats = None
    if a.perm is not None and b.perm is not None:
        perm = []
        for i in range(a.n_generators):
            fa, ia = a.perm[i]
            fb, ib = b.perm[i]
            perm.append(
                (
                    (fa[:, None] * b.dim + fb[None, :]).reshape(-1),
                    (ia[:, None] * b.dim + ib[None, :]).reshape(-1),
                )
            )
    else:
        def kron(x: FpMatrix, y: FpMatrix) -> FpMatrix:
            entries = {}
            for (r1, c1), v1 in x.entries.items():
                for (r2, c2), v2 in y.entries.items():
                    entries[(r1 * y.rows + r2, c1 * y.cols + c2)] = v1 * v2 % p
            return FpMatrix(p, x.rows * y.rows, x.cols * y.cols, entries, _trusted=True)

        mats = [
            (kron(a.action(i, 1), b.action(i, 1)), kron(a.action(i, -1), b.action(i, -1)))
            for i in range(a.n_generators)
        ]
    pairing = None
    if a.pairing is not None or b.pairing is not None:
        pa = a.pairing_matrix()
        pb = b.pairing_matrix()
        entries = {}
        for (r1, c1), v1 in pa.entries.items():
            for (r2, c2), v2 in pb.entries.items():
                entries[(r1 * b.dim + r2, c1 * b.dim + c2)] = v1 * v2 % p
        pairing = FpMatrix(p, dim, dim, entries, _trusted=True)
    out = GammaModule(
        p, dim, mats=mats, pairing=pairing, perm=perm, tensor=(a, b),
        meta={"kind": "tensor"},
    )
    out.check_invariants()
    return out


def standard_principal_generators(p: int, j: int, m: int):
    """Topological generator images of the level-p^j principal subgroup,
    reduced mod p^m: elementary matrices at p^j and the diagonal 1 + p^j."""
    mod = p**m
    s = (1 + p**j) % mod
    return [
        (1, p**j % mod, 0, 1),
        (1, 0, p**j % mod, 1),
        (s, 0, 0, pow(s, -1, mod)),
    ]
