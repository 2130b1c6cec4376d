from math import comb

import numpy as np
import pytest

from ptower.algebra_trunc import (
    augmentation_filtration,
    lowest_degree_coverage,
    operator_elements,
    verify_weight_hypothesis,
    working_level,
)
from ptower.congruence import (
    CongruenceMap,
    SubgroupSpec,
    coset_module,
    standard_principal_generators,
    sym_module,
    tensor_module,
    trivial_module,
)
from ptower.corpus import entry_by_label, load_corpus
from ptower.errors import FiltrationError, ValidationError
from ptower.fp_linalg import FpMatrix
from ptower.group_core import FreeRingElement, GroupPresentation

S = (0, -1, 1, 0)
T = (1, 1, 0, 1)


def sl2_coset(p, k, cap=250_000):
    hom = CongruenceMap(p, k, [S, T])
    return coset_module(hom, SubgroupSpec.principal(k), cap=cap)


def test_trivial_module_filtration():
    fm = augmentation_filtration(trivial_module(3, 2), [FpMatrix.identity(3, 1)], 2)
    assert fm.filtration_dims == [1, 0, 0, 0]


def test_level9_coinvariants():
    m9 = sl2_coset(3, 2)
    fm = augmentation_filtration(m9, standard_principal_generators(3, 1, 2), 1)
    dims = fm.filtration_dims
    assert dims[0] == 648
    assert dims[0] - dims[1] == 24  # coinvariants = level-1 module


def test_monomial_count_identity_level27():
    m27 = sl2_coset(3, 3)
    fm = augmentation_filtration(m27, standard_principal_generators(3, 1, 3), 4)
    dims = fm.filtration_dims
    graded = [dims[i] - dims[i + 1] for i in range(5)]
    # 24 blocks, monomial counts in 3 variables per degree
    assert [g // 24 for g in graded] == [1, 3, 6, 10, 15]
    assert dims[0] - dims[5] == 24 * comb(4 + 3, 3)
    assert dims[0] - dims[5] == fm.quotient_dim
    # graded pieces sum telescopes to the truncation dimension
    assert sum(graded) == dims[0] - dims[5]


def test_filtration_subspaces_nested():
    m9 = sl2_coset(3, 2)
    fm = augmentation_filtration(m9, standard_principal_generators(3, 1, 2), 1)
    s0, s1, s2 = fm.subspace(0), fm.subspace(1), fm.subspace(2)
    assert s0.dim > s1.dim > s2.dim
    assert s0.contains(s1) and s1.contains(s2)


def test_generic_path_matches_fast_path():
    m9 = sl2_coset(3, 2)
    gens = standard_principal_generators(3, 1, 2)
    fast = augmentation_filtration(m9, gens, 1)
    # feed the same subgroup through explicit module matrices
    from ptower.algebra_trunc import _coset_left_perm

    mats = [
        FpMatrix.from_permutation(3, _coset_left_perm(m9, g, 3)) for g in gens
    ]
    generic = augmentation_filtration(m9, mats, 1)
    assert generic.structure == "generic"
    assert generic.filtration_dims == fast.filtration_dims
    for i in range(3):
        assert generic.subspace(i) == fast.subspace(i)


def test_tensor_filtration_rides_the_coset_factor():
    m9 = sl2_coset(3, 2)
    sym = sym_module(3, 2, CongruenceMap(3, 1, [S, T]))
    tens = tensor_module(m9, sym)
    fm = augmentation_filtration(tens, standard_principal_generators(3, 1, 2), 1)
    base = augmentation_filtration(m9, standard_principal_generators(3, 1, 2), 1)
    assert fm.filtration_dims == [3 * d for d in base.filtration_dims]


def test_coverage_identity_and_zero():
    m9 = sl2_coset(3, 2)
    fm = augmentation_filtration(m9, standard_principal_generators(3, 1, 2), 1)
    rep = lowest_degree_coverage(fm, FreeRingElement.one())
    assert rep.certified and rep.status == "certified"
    assert all(v == 0 for v in rep.witness_degree.values())
    rep0 = lowest_degree_coverage(fm, FreeRingElement.zero())
    assert rep0.status == "failed"
    assert len(rep0.uncovered) == len(rep0.labels)


def test_coverage_monotone_in_truncation():
    # witnesses found at truncation n persist at n + 1
    m27 = sl2_coset(3, 3)
    pres = GroupPresentation.from_strings(["a", "b"], [], label="F2")
    lap = operator_elements(pres)[0]
    gens = standard_principal_generators(3, 1, 3)
    w2 = lowest_degree_coverage(augmentation_filtration(m27, gens, 2), lap).witness_degree
    w3 = lowest_degree_coverage(augmentation_filtration(m27, gens, 3), lap).witness_degree
    for lab, deg in w2.items():
        if deg is not None:
            assert w3[lab] is not None and w3[lab] <= deg


def test_working_level():
    assert working_level(3, 4) == 3
    assert working_level(3, 2) == 2
    assert working_level(5, 4) == 2
    assert working_level(2, 1) == 2


def test_filtration_stall_detection():
    # a subgroup of order coprime to p stalls immediately: J^2 = J^1 != 0
    mod = sl2_coset(3, 1)
    from ptower.algebra_trunc import _coset_left_perm

    mat = FpMatrix.from_permutation(3, _coset_left_perm(mod, (0, -1, 1, 0), 3))
    with pytest.raises(FiltrationError):
        augmentation_filtration(mod, [mat], 3)


def test_verify_weight_hypothesis_shallow():
    entry = entry_by_label(load_corpus(), "bianchi_m2")
    pres = entry.presentation()
    hom_p = entry.hom(3, 2, root=1)
    hom_pbar = entry.hom(3, 1, root=2)
    rep = verify_weight_hypothesis(pres, hom_p, hom_pbar, n=2, degrees=(0, 1))
    assert rep["pass"]
    assert rep["dense_image"]
    # without the second prime the weight loop degrades to d = 0
    rep0 = verify_weight_hypothesis(pres, hom_p, None, n=2, degrees=(0, 1, 2))
    assert rep0["partial"] and rep0["skipped_degrees"] == [1, 2]
    assert not rep0["pass"]


def test_verify_weight_hypothesis_level_guard():
    entry = entry_by_label(load_corpus(), "bianchi_m2")
    with pytest.raises(ValidationError):
        verify_weight_hypothesis(entry.presentation(), entry.hom(3, 1, root=1), None, n=4)


def _coverage_by_min_coord(fm, rep):
    """Witness degrees keyed by (copy, min global coordinate of the block)."""
    sd = fm.sym_dim if fm.structure == "coset-free" else 1
    coord_of_label = {}
    for comp in fm.components:
        base = int(min(comp["coords"]))
        for s in range(sd):
            coord_of_label[(comp["label"], s)] = base * sd + s
    out = {}
    for (copy, lab, s), deg in rep.witness_degree.items():
        out[(copy, coord_of_label[(lab, s)])] = deg
    return out


def test_fast_path_matches_generic_on_real_operators():
    """The orbit-block class maps must agree with the plain matrix route,
    including the tensor factor, on the harmonic and stacked operators."""
    from ptower.algebra_trunc import _coset_left_perm

    entry = entry_by_label(load_corpus(), "bianchi_m2")
    pres = entry.presentation()
    m9 = coset_module(entry.hom(3, 2, root=1), SubgroupSpec.principal(2))
    sym = sym_module(3, 1, entry.hom(3, 1, root=2))
    gens = standard_principal_generators(3, 1, 2)
    lap, t_plus = operator_elements(pres)

    for module, tensorized in [(m9, False), (tensor_module(m9, sym), True)]:
        fast = augmentation_filtration(module, gens, 1)
        if tensorized:
            ident = FpMatrix.identity(3, sym.dim)
            mats = []
            for g in gens:
                perm = FpMatrix.from_permutation(3, _coset_left_perm(m9, g, 3))
                entries = {}
                for (r, c), v in perm.entries.items():
                    for s in range(sym.dim):
                        entries[(r * sym.dim + s, c * sym.dim + s)] = v
                mats.append(FpMatrix(3, module.dim, module.dim, entries, _trusted=True))
        else:
            mats = [
                FpMatrix.from_permutation(3, _coset_left_perm(m9, g, 3)) for g in gens
            ]
        generic = augmentation_filtration(module, mats, 1)
        assert fast.filtration_dims == generic.filtration_dims
        for op in (lap, t_plus):
            rf = lowest_degree_coverage(fast, op)
            rg = lowest_degree_coverage(generic, op)
            assert rf.image_rank == rg.image_rank
            assert rf.status == rg.status
            assert _coverage_by_min_coord(fast, rf) == _coverage_by_min_coord(generic, rg)
