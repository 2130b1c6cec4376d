import numpy as np
import pytest

from ptower.errors import ValidationError
from ptower.rep_weights import (
    ASSUMPTION_FLAGS,
    GaloisData,
    admissible_weights,
    bn_decomposition,
    expected_h1_profile,
    lattice_reduction,
    predict_gamma_p_h1,
)


@pytest.mark.parametrize("p", [5, 7, 11, 13, 17])
def test_bn_decomposition_dimension_identity(p):
    dec = bn_decomposition(p)
    assert dec.total_dim == p * (p * p - 1) // 2
    for comp in dec.components:
        if comp.name.startswith("V_"):
            assert sum(f + 1 for f in comp.factors) == 2 * p
            assert comp.multiplicity == comp.factors[0] + 1


def test_bn_small_cases():
    dec5 = bn_decomposition(5)
    by_name = {c.name: c for c in dec5.components}
    assert by_name["SymTop"].multiplicity == 5 and by_name["SymTop"].dim == 5
    assert by_name["W"].dim == 5
    assert by_name["V_2"].multiplicity == 3 and by_name["V_2"].dim == 10
    assert bn_decomposition(7).total_dim == 168
    assert bn_decomposition(13).total_dim == 1092
    with pytest.raises(ValidationError):
        bn_decomposition(3)


@pytest.mark.parametrize("p", [5, 7, 13])
def test_expected_profile(p):
    prof = expected_h1_profile(p)
    assert prof[p - 3] == 1
    assert all(v == 0 for d, v in prof.items() if d != p - 3)
    assert set(prof) == set(range(p - 1))


def test_predictor_contract():
    measured = {d: (1 if d == 4 else 0) for d in range(6)}
    out = predict_gamma_p_h1(7, measured)
    assert out["predicted"] == 3
    assert out["flags"] == list(ASSUMPTION_FLAGS)
    # an extra class blocks the prediction
    noisy = dict(measured)
    noisy[2] = 1
    out = predict_gamma_p_h1(7, noisy)
    assert out["predicted"] is None and not out["flags"]
    # all-zero measurements contradict the expected nonvanishing
    out = predict_gamma_p_h1(7, {d: 0 for d in range(6)})
    assert out["predicted"] is None and out["anomaly"]


@pytest.mark.parametrize("p,d,k", [(3, 1, 1), (3, 2, 1), (3, 3, 1), (5, 4, 1)])
def test_lattice_reduction_invariance(p, d, k):
    mod, cert = lattice_reduction(p, d, k)
    assert cert["invariance_certified"]
    assert cert["borel_coset_containment"]
    assert cert["m"] == k + 2
    assert mod.dim == min(d + 1, p)
    mod.check_invariants()


def test_lattice_reduction_dim_formula():
    mod, _ = lattice_reduction(3, 2, 1)
    assert mod.dim == 3  # d + 1 for d <= p - 1
    mod, _ = lattice_reduction(3, 3, 1)
    assert mod.dim == 3  # capped by the function count at d >= p


def test_lattice_reduction_rejections():
    with pytest.raises(ValidationError):
        lattice_reduction(3, 4, 1)  # p^k < d
    with pytest.raises(ValidationError):
        lattice_reduction(3, 0, 1, m=2)  # m < k + 2
    mod, _ = lattice_reduction(3, 0, 1)
    assert mod.dim == 1


def test_admissible_weights_imaginary_quadratic():
    gd = GaloisData(labels=["s", "sbar"], conjugation={"s": "sbar", "sbar": "s"})
    ok, part = admissible_weights(gd, {"s": 4, "sbar": 4})
    assert ok and part == [["s", "sbar"]]
    ok, _ = admissible_weights(gd, {"s": 4, "sbar": 2})
    assert not ok


def test_admissible_weights_transitive_quartic():
    # cyclic translates conjugate the involution around all four labels
    cyc = {0: 1, 1: 2, 2: 3, 3: 0}
    group = [{x: x for x in range(4)}]
    g = dict(cyc)
    for _ in range(3):
        group.append(dict(g))
        g = {x: cyc[g[x]] for x in range(4)}
    gd = GaloisData(labels=[0, 1, 2, 3], conjugation={0: 1, 1: 0, 2: 3, 3: 2}, group_elements=group)
    ok, part = admissible_weights(gd, {x: 5 for x in range(4)})
    assert ok and part == [[0, 1, 2, 3]]
    ok, _ = admissible_weights(gd, {0: 5, 1: 5, 2: 6, 3: 6})
    assert not ok


def test_admissible_weights_cm_quartic():
    gd = GaloisData(
        labels=["s1", "s1b", "s2", "s2b"],
        conjugation={"s1": "s1b", "s1b": "s1", "s2": "s2b", "s2b": "s2"},
        group_elements=[
            {"s1": "s1", "s1b": "s1b", "s2": "s2", "s2b": "s2b"},
            {"s1": "s2", "s2": "s1", "s1b": "s2b", "s2b": "s1b"},
        ],
    )
    ok, part = admissible_weights(gd, {"s1": 2, "s1b": 2, "s2": 5, "s2b": 5})
    assert ok and part == [["s1", "s1b"], ["s2", "s2b"]]


def test_constant_weights_always_admissible():
    rng = np.random.default_rng(3)
    labels = list(range(6))
    perm = [1, 0, 3, 2, 5, 4]
    gd = GaloisData(
        labels=labels,
        conjugation={i: perm[i] for i in labels},
        group_elements=[{i: i for i in labels}],
    )
    ok, _ = admissible_weights(gd, {i: 9 for i in labels})
    assert ok


def test_galois_data_validation():
    with pytest.raises(ValidationError):
        GaloisData(labels=[0, 1], conjugation={0: 1, 1: 1})
    with pytest.raises(ValidationError):
        GaloisData(labels=[0, 1], conjugation={0: 1, 1: 0}, group_elements=[{0: 0, 1: 0}])
    with pytest.raises(ValidationError):
        # not closed under composition
        GaloisData(
            labels=[0, 1, 2],
            conjugation={0: 1, 1: 0, 2: 2},
            group_elements=[{0: 1, 1: 2, 2: 0}],
        )
