from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from lcm_ident.errors import DegenerateError, InvariantViolation, ModelError
from lcm_ident.ident import IdentClass, IdentConfig
from lcm_ident.ioeq import trial_point
from lcm_ident.mammillary import (
    FAMILIES,
    FamilyId,
    alternate_point_M12,
    big_sum_check,
    classification_table,
    classify_family,
    conjecture_probe_M23,
    detect_mammillary,
    esp_matrix,
    expected_class,
    family_coefficients,
    family_report,
    h_polynomial,
    incoming,
    k12_witness,
    lhs_structure,
    make,
    min_n,
    outgoing,
    proof_regime_point,
    recover,
    reduce_to_family,
    registry_for_model,
    rhs_identities,
    top_d_coefficient,
    vandermonde_check,
)
from lcm_ident.model import Permutation
from lcm_ident.polyalg import MultiPoly, real_roots

FAST = IdentConfig(use_fiber=False)
POINT4 = {"k12": 2, "k13": 5, "k14": 7, "k21": 3, "k31": 1, "k41": 4}


def fam(n, pair):
    return FamilyId(n, *pair)


def all_cells(n_max=7):
    return [fam(n, p) for p in FAMILIES for n in range(min_n(p), n_max + 1)]


# -- construction and relabelling -----------------------------------------------------------

def test_make_star():
    m = make(4, 1, 2)
    assert m.parameters == ("k21", "k31", "k41", "k12", "k13", "k14")
    assert m.inputs == {1} and m.outputs == {2} and not m.leaks


def test_make_too_small():
    with pytest.raises(ModelError, match="n >= 3"):
        make(2, 1, 1)


def test_family_min_sizes():
    with pytest.raises(ValueError):
        FamilyId(3, 1, 2)
    with pytest.raises(ValueError):
        FamilyId(5, 3, 2)
    assert str(FamilyId(5, 2, 3)) == "M5(2,3)"


def test_reduce_input_peripheral_output_centre():
    red = reduce_to_family(4, 3, 1)
    assert red.family.pair == (2, 1)
    assert red.sigma(3) == 2 and red.sigma(1) == 1


@pytest.mark.parametrize("i,j,pair", [(1, 1, (1, 1)), (1, 3, (1, 2)), (4, 1, (2, 1)),
                                      (3, 3, (2, 2)), (2, 4, (2, 3))])
def test_reduction_pairs(i, j, pair):
    assert reduce_to_family(5, i, j).family.pair == pair


def test_detect_other_centre():
    m = make(5, 1, 2).relabel(Permutation([3, 2, 1, 4, 5]))
    red = detect_mammillary(m)
    assert red.family.pair == (1, 2)
    assert registry_for_model(m)["k23"].cls is IdentClass.GLOBAL


def test_detect_non_mammillary():
    from lcm_ident.model import Model
    assert detect_mammillary(Model.build(3, [(1, 2), (2, 3), (3, 1)], [1], [1])) is None


# -- left-hand side structure --------------------------------------------------------------

def test_lhs_four_compartments():
    lhs = lhs_structure(4)
    assert lhs.g[1].serialize() == "1*k13 + 1*k14 + 1*k31 + 1*k41"
    assert lhs.g[2].serialize() == "1*k13*k14 + 1*k13*k41 + 1*k14*k31"
    assert [[p.serialize() for p in row] for row in lhs.m] == [["1", "1"], ["1*k14", "1*k13"]]


@pytest.mark.parametrize("n", range(3, 9))
def test_lhs_checks_hold(n):
    assert all(lhs_structure(n).checks.values())


def test_esp_matrix_shape():
    m = esp_matrix(5)
    assert len(m) == 3 and all(len(r) == 3 for r in m)


# -- right-hand side identities ------------------------------------------------------------

@pytest.mark.parametrize("f", all_cells(), ids=str)
def test_rhs_identities_hold(f):
    assert all(rhs_identities(f).values())


@pytest.mark.parametrize("f", all_cells(), ids=str)
def test_top_d_coefficient(f):
    expected = 1 if f.input == f.output else 0
    assert top_d_coefficient(f) == MultiPoly.const(expected)


@pytest.mark.parametrize("n", range(4, 8))
def test_vandermonde(n):
    res = vandermonde_check(n)
    assert res and res.sign == 1


def test_vandermonde_small_n():
    with pytest.raises(ModelError):
        vandermonde_check(3)


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_alternating_sum_identity(n):
    m = make(n, 1, 2)
    for t in range(10):
        assert big_sum_check(n, trial_point(m.parameters, 5, t)) == 0
    x = dict(trial_point(m.parameters, 5, 99), k12=0)
    assert big_sum_check(n, x) == 0


# -- recovery ----------------------------------------------------------------------------------

def test_recover_12_example():
    f = fam(4, (1, 2))
    rec = recover(f, *family_coefficients(f, POINT4))
    assert rec.values["k21"] == 3
    assert rec.multisets["k13..k1n"] == pytest.approx([5, 7])
    assert min(abs(r - 2) for r in rec.candidates["k12"]) < 1e-9


def test_h_roots_contain_true_k12():
    f = fam(5, (1, 2))
    x = trial_point(make(5, 1, 2).parameters, 3, 0)
    rec = recover(f, *family_coefficients(f, x))
    assert any(abs(r - x["k12"]) < 1e-6 * x["k12"] for r in rec.candidates["k12"])


def test_h_polynomial_monic():
    h = h_polynomial(4, 3, [1, 12, 35, 0], [0, 229, 132, 22])
    assert h.degree == 3 and h.coeffs[-1] == 1
    assert real_roots(h)[0] == pytest.approx(2)


@pytest.mark.parametrize("f", all_cells(6), ids=str)
def test_recovery_roundtrip(f):
    x = trial_point(make(f.n, *f.pair).parameters, 21, 0)
    rec = recover(f, *family_coefficients(f, x))
    for p, v in rec.values.items():
        assert v == x[p]
        assert isinstance(v, (int, Fraction))
    if f.pair == (2, 3):
        assert rec.products["k12*k31"] == x["k12"] * x["k31"]
        assert rec.multisets["k14..k1n"] == pytest.approx(sorted(x[s] for s in incoming(f.n)[1:]))
    elif f.pair == (1, 1):
        assert rec.multisets["k12..k1n"] == pytest.approx(
            sorted(x[s] for s in ["k12"] + incoming(f.n)))


def test_recover_22_exact():
    f = fam(5, (2, 2))
    x = trial_point(make(5, 2, 2).parameters, 1, 0)
    rec = recover(f, *family_coefficients(f, x))
    assert rec.values == {"k12": x["k12"], "k21": x["k21"]}


@pytest.mark.parametrize("k12", [0, 5])
def test_recover_degenerate(k12):
    f = fam(4, (2, 1))
    x = dict(POINT4, k12=k12)
    with pytest.raises(DegenerateError):
        recover(f, *family_coefficients(f, x))


@given(st.integers(0, 5000))
def test_recover_21_property(seed):
    f = fam(5, (2, 1))
    x = trial_point(make(5, 2, 1).parameters, seed, 0)
    # the k21 solve divides by prod(k12 - k1j)
    assume(all(x["k12"] != x[s] for s in incoming(5)))
    rec = recover(f, *family_coefficients(f, x))
    assert rec.values["k12"] == x["k12"] and rec.values["k21"] == x["k21"]


# -- alternate fiber point -------------------------------------------------------------------

@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_alternate_point_every_root(n):
    base = proof_regime_point(n, 0)
    for choice in range(n - 2):
        alt = alternate_point_M12(n, base, root_choice=choice)
        assert alt.coefficient_error < 1e-9
        assert alt.k12_gap > 1e-6
        assert alt.point["k21"] == base["k21"]
        assert all(alt.point[s] == base[s] for s in incoming(n))


def test_alternate_point_generic_base():
    base = {p: float(v) for p, v in trial_point(make(5, 1, 2).parameters, 8, 0).items()}
    scale = max(base.values())
    base = {p: v / scale + (0.0 if p in outgoing(5) else 1.0 + 0.3 * i)
            for i, (p, v) in enumerate(base.items())}
    try:
        alt = alternate_point_M12(5, base)
    except DegenerateError:
        pytest.skip("non-real roots at this base point")
    assert alt.coefficient_error < 1e-9


def test_alternate_point_literal_shift_breaks_match():
    base = proof_regime_point(5, 0)
    good = alternate_point_M12(5, base)
    bad = alternate_point_M12(5, base, shift_with_base_k12=True)
    assert good.coefficient_error < 1e-9 < 1e-3 < bad.coefficient_error


def test_alternate_point_needs_distinct_incoming():
    base = dict(proof_regime_point(5, 0))
    base["k14"] = base["k13"]
    with pytest.raises(DegenerateError, match="singular"):
        alternate_point_M12(5, base)


def test_alternate_point_bad_choice():
    with pytest.raises(ValueError):
        alternate_point_M12(4, proof_regime_point(4, 0), root_choice=2)


def test_alternate_point_small_n():
    with pytest.raises(ModelError):
        alternate_point_M12(3, {})


def test_k12_witness():
    w = k12_witness(6, 42)
    assert w["relative_coefficient_error"] <= 1e-9 and w["k12_gap"] >= 1e-6


# -- registry and table -----------------------------------------------------------------------

def test_expected_classes():
    assert expected_class(fam(5, (1, 2)), "k21") == (IdentClass.GLOBAL, False)
    assert expected_class(fam(5, (2, 1)), "k21") == (IdentClass.GENERIC_GLOBAL, False)
    assert expected_class(fam(4, (2, 3)), "k14") == (IdentClass.GENERIC_GLOBAL, False)
    assert expected_class(fam(4, (2, 3)), "k12") == (IdentClass.UNIDENTIFIABLE, False)
    assert expected_class(fam(6, (2, 3)), "k15") == (IdentClass.SLING, False)
    assert expected_class(fam(6, (2, 3)), "k61") == (IdentClass.UNIDENTIFIABLE, True)


@pytest.mark.parametrize("f", all_cells(6), ids=str)
def test_family_classification_matches(f):
    rows = classify_family(f, FAST)
    assert all(r.match for r in rows), [r.to_dict() for r in rows if not r.match]


def test_table_rows():
    rows = classification_table(5, FAST)
    assert len(rows) == sum(len(make(f.n, 1, 1).parameters) for f in all_cells(5))
    assert set(rows[0].to_dict()) == {"family", "n", "parameter", "class", "label",
                                      "expected", "match", "evidence"}


def test_table_needs_n5():
    with pytest.raises(ModelError):
        classification_table(4)


@pytest.mark.parametrize("n", [5, 6, 7])
def test_conjecture_probe(n):
    probe = conjecture_probe_M23(n)
    assert probe.agrees and probe.d_top_zero and probe.d_product
    assert sorted(probe.unidentifiable) == sorted(["k12", "k21", "k13"] + outgoing(n))


def test_conjecture_probe_small_n():
    with pytest.raises(ModelError):
        conjecture_probe_M23(4)


# -- report ------------------------------------------------------------------------------------

def test_family_report_relabelled():
    rep = family_report(4, 3, 1)
    assert rep["family"] == [2, 1]
    assert all(rep["identities"].values())


def test_family_report_deterministic():
    assert family_report(5, 1, 2, 7) == family_report(5, 1, 2, 7)


def test_family_report_rejects_bad_family():
    with pytest.raises((ModelError, ValueError)):
        family_report(3, 1, 2)


def test_proof_regime_point_has_small_outgoing():
    p = proof_regime_point(6, 1)
    assert all(0 <= p[s] <= 0.05 for s in outgoing(6))
    assert np.min(np.diff(sorted([p["k12"]] + [p[s] for s in incoming(6)]))) > 0.2
