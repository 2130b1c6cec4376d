"""Cochain complexes from a presentation and a coefficient module.

From a presentation with n generators and m relators and a module A we
build the start of the standard free resolution and take Hom(-, A):

    C0 = A  --d0-->  C1 = A^n  --d1-->  C2 = A^m

with d0 block i equal to (I - rho(g_i)) and d1 block (i, j) the module
image of the free derivative of relator i by generator j.  Coboundary
adjoints use the module's invariant pairing; by invariance the adjoint of
rho(w) is rho(w^-1), so adjoints are assembled from inverse images and
never require transposing against an explicit Gram matrix.

Note on indexing: the harmonic operator (sum of 2 - g - g^-1) acts on the
0-cochain space C0 = A; we write delta0 for the dimension of its kernel.

h1 is computed as dim ker d1 - rank d0, never materialising the quotient;
omega1 (closed and coclosed 1-cochains) by explicit subspace intersection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ptower.congruence import CongruenceMap, GammaModule, SubgroupSpec, coset_module
from ptower.errors import InvariantViolationError, ResourceCapError, ValidationError
from ptower.fp_linalg import FpMatrix, Subspace, intersect
from ptower.group_core import (
    GroupPresentation,
    boundary_data,
    laplacian_element,
)

ORACLE_CANDIDATE_CAP = 10**7


@dataclass(frozen=True)
class ChainData:
    d0: FpMatrix          # (n dim) x dim
    d1: FpMatrix          # (m dim) x (n dim)
    adjoint_d0: FpMatrix  # dim x (n dim)
    laplacian0: FpMatrix  # dim x dim
    n_generators: int
    n_relators: int
    module_dim: int


@dataclass(frozen=True)
class CohomologyResult:
    h0: int
    h1: int
    omega1: int
    delta0: int

    def __post_init__(self):
        if abs(self.h1 - self.omega1) > self.delta0:
            raise InvariantViolationError(
                f"|h1 - omega1| = {abs(self.h1 - self.omega1)} exceeds delta0 = {self.delta0}"
            )

    def to_dict(self):
        return {"h0": self.h0, "h1": self.h1, "omega1": self.omega1, "delta0": self.delta0}


def build_chain(pres: GroupPresentation, mod: GammaModule, validate=True) -> ChainData:
    if pres.n_generators != mod.n_generators:
        raise ValidationError("presentation/module generator count mismatch")
    if validate:
        mod.check_invariants(pres)
    p, dim, n = mod.p, mod.dim, pres.n_generators
    ident = FpMatrix.identity(p, dim)
    d0 = FpMatrix.vstack([ident - mod.action(i, 1) for i in range(n)]) if n else FpMatrix.zeros(p, 0, dim)
    adjoint_d0 = (
        FpMatrix.hstack([ident - mod.action(i, -1) for i in range(n)])
        if n
        else FpMatrix.zeros(p, dim, 0)
    )
    _, d1_spec = boundary_data(pres)
    if pres.n_relators:
        d1 = FpMatrix.vstack(
            [FpMatrix.hstack([mod.ring_image(e) for e in row]) for row in d1_spec]
        )
    else:
        d1 = FpMatrix.zeros(p, 0, n * dim)
    lap = mod.ring_image(laplacian_element(pres))
    if lap != adjoint_d0 @ d0:
        raise InvariantViolationError("laplacian0 != adjoint_d0 . d0")
    if pres.n_relators and not (d1 @ d0).is_zero():
        raise InvariantViolationError("d1 . d0 != 0")
    return ChainData(d0, d1, adjoint_d0, lap, n, pres.n_relators, dim)


def cohomology_dims(pres: GroupPresentation, mod: GammaModule, validate=True) -> CohomologyResult:
    cd = build_chain(pres, mod, validate=validate)
    dim, n = cd.module_dim, cd.n_generators
    c1_dim = n * dim
    rank_d0 = cd.d0.rank()
    h0 = dim - rank_d0
    if cd.n_relators == 0:
        z1 = Subspace.full(mod.p, c1_dim)
    else:
        z1 = cd.d1.right_kernel()
    h1 = z1.dim - rank_d0
    delta0 = dim - cd.laplacian0.rank()
    coclosed = cd.adjoint_d0.right_kernel()
    omega1 = intersect(z1, coclosed).dim
    return CohomologyResult(h0=h0, h1=h1, omega1=omega1, delta0=delta0)


def h1_of_subgroup(
    pres: GroupPresentation,
    hom: CongruenceMap,
    sub: SubgroupSpec,
    cap: int | None = None,
) -> CohomologyResult:
    """dim H^1 of the preimage subgroup via the induction formula
    H^1(G', F_p) = H^1(G, F_p[G/G'])."""
    kwargs = {} if cap is None else {"cap": cap}
    mod = coset_module(hom, sub, **kwargs)
    return cohomology_dims(pres, mod)


# -- independent oracles ----------------------------------------------------


def _mixed_radix(count, digits, p):
    arr = np.arange(count, dtype=np.int64)
    out = np.empty((count, digits), dtype=np.int64)
    for i in range(digits):
        out[:, i] = arr % p
        arr //= p
    return out


def _dim_from_count(count: int, p: int) -> int:
    e = 0
    c = count
    while c > 1:
        if c % p:
            raise InvariantViolationError(f"solution count {count} is not a power of {p}")
        c //= p
        e += 1
    return e


def brute_force_h1_oracle(pres: GroupPresentation, mod: GammaModule, cap=ORACLE_CANDIDATE_CAP) -> int:
    """Exhaustive crossed-homomorphism count, no elimination anywhere.

    Enumerates every map {generators} -> A, checks each relator cocycle
    identity by direct word evaluation, counts solutions, then counts the
    distinct principal cocycles; both counts must be powers of p.
    """
    p, dim, n = mod.p, mod.dim, pres.n_generators
    if n == 0:
        return 0
    total = p ** (n * dim)
    if total > cap:
        raise ResourceCapError(f"{total} candidate maps exceed oracle cap {cap}")
    gens = [mod.action(i, 1).to_dense() for i in range(n)]
    gen_invs = [mod.action(i, -1).to_dense() for i in range(n)]

    if pres.n_relators == 0:
        dim_z1 = n * dim
    else:
        good = 0
        chunk = 1 << 14
        for start in range(0, total, chunk):
            stop = min(start + chunk, total)
            arr = np.arange(start, stop, dtype=np.int64)
            phi = np.empty((stop - start, n, dim), dtype=np.int64)
            for i in range(n * dim):
                phi[:, i // dim, i % dim] = arr % p
                arr = arr // p
            ok = np.ones(stop - start, dtype=bool)
            for r in pres.relators:
                val = np.zeros((stop - start, dim), dtype=np.int64)
                prefix = np.eye(dim, dtype=np.int64)
                for g, e in r.letters:
                    if e == 1:
                        val = (val + phi[:, g, :] @ prefix.T) % p
                        prefix = (prefix @ gens[g]) % p
                    else:
                        prefix = (prefix @ gen_invs[g]) % p
                        val = (val - phi[:, g, :] @ prefix.T) % p
                ok &= ~val.any(axis=1)
            good += int(ok.sum())
        dim_z1 = _dim_from_count(good, p)

    # principal cocycles a -> ((1 - g_i) a)_i
    if p**dim > cap:
        raise ResourceCapError("module too large for principal cocycle enumeration")
    avecs = _mixed_radix(p**dim, dim, p)
    cols = [(avecs - avecs @ g.T) % p for g in gens]
    princ = np.concatenate(cols, axis=1)
    n_principal = len(np.unique(princ, axis=0))
    dim_b1 = _dim_from_count(n_principal, p)
    return dim_z1 - dim_b1


def abelianization_h1_oracle(pres: GroupPresentation, p: int) -> int:
    """dim Hom(G, F_p) = n - rank_p(exponent matrix); self-contained elimination."""
    rows = [[x % p for x in row] for row in pres.exponent_matrix()]
    n = pres.n_generators
    rank = 0
    for col in range(n):
        piv = None
        for i in range(rank, len(rows)):
            if rows[i][col]:
                piv = i
                break
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        inv = pow(rows[rank][col], -1, p)
        rows[rank] = [(x * inv) % p for x in rows[rank]]
        for i in range(len(rows)):
            if i != rank and rows[i][col]:
                f = rows[i][col]
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return n - rank
