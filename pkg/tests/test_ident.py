import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lcm_ident.errors import InapplicableError
from lcm_ident.ident import (
    Evidence,
    IdentClass,
    IdentConfig,
    ModelAnalyzer,
    classify_model,
    classify_parameter,
    fiber_sample,
    jacobian,
    model_identifiability,
    parameter_local_identifiability,
    rank_analysis,
    symmetry_sling_witness,
)
from lcm_ident.ioeq import coefficient_map, trial_point
from lcm_ident.mammillary import make
from lcm_ident.model import Model, Permutation

FAST = IdentConfig(use_fiber=False)


# -- Jacobian ------------------------------------------------------------------------

def test_jacobian_row_of_linear_coefficient_is_unit():
    cm = coefficient_map(make(4, 1, 2))
    x = trial_point(cm.symbols, 1, 0)
    row = jacobian(cm, x)[cm.names.index("d2")]
    assert row == [1 if s == "k21" else 0 for s in cm.symbols]


def test_jacobian_row_of_cubic_coefficient():
    cm = coefficient_map(make(4, 1, 2))
    x = dict.fromkeys(cm.symbols, 1) | {"k13": 2, "k14": 3, "k21": 4}
    row = dict(zip(cm.symbols, jacobian(cm, x)[cm.names.index("d0")]))
    assert (row["k13"], row["k14"], row["k21"]) == (12, 8, 6)
    assert row["k12"] == row["k31"] == row["k41"] == 0


def test_jacobian_zero_column():
    cm = coefficient_map(make(4, 1, 2))
    j = jacobian(cm, trial_point(cm.symbols, 2, 0))
    col = cm.symbols.index("k12")
    assert all(j[r][col] == 0 for r in range(3, 6))  # the d row never involves k12


def test_jacobian_missing_symbol():
    cm = coefficient_map(make(4, 1, 2))
    with pytest.raises(KeyError):
        jacobian(cm, {"k12": 1})


# -- rank tests ------------------------------------------------------------------------

def test_example_identifiable():
    ra = rank_analysis(make(4, 1, 2))
    assert ra.generic_rank == 6 and ra.model_identifiable and ra.stable
    assert all(ra.local.values())


def test_23_unidentifiable_rank():
    m = make(5, 2, 3)
    ra = rank_analysis(m)
    cm = coefficient_map(m)
    vec = np.array([float(v) for v in trial_point(cm.symbols, 0, 0).values()])
    assert ra.generic_rank == np.linalg.matrix_rank(cm.jacobian_float(vec)) == 7
    assert ra.n_params == 8  # eight rate constants, not ten
    assert model_identifiability(m) == "unidentifiable"


@pytest.mark.parametrize("n", range(3, 9))
def test_11_identifiable(n):
    assert model_identifiability(make(n, 1, 1)) == "identifiable"


def test_parameter_local_identifiability():
    m = make(5, 2, 3)
    assert parameter_local_identifiability(m, "k14")
    assert not parameter_local_identifiability(m, "k12")
    with pytest.raises(KeyError):
        parameter_local_identifiability(m, "k99")


def test_rank_requires_strong_connectivity():
    with pytest.raises(InapplicableError):
        rank_analysis(Model.build(3, [(1, 2), (2, 3)], [1], [3]))


def test_rank_reproducible():
    a = rank_analysis(make(5, 1, 2), seed=9)
    b = rank_analysis(make(5, 1, 2), seed=9)
    assert a.points == b.points and a.ranks == b.ranks


# -- symmetry -------------------------------------------------------------------------

@pytest.mark.parametrize("n", [3, 4, 5])
def test_symmetry_witness_star(n):
    w = symmetry_sling_witness(make(n, 1, 1), "k12")
    assert w is not None and w.image == "k13" and w.coefficients_equal
    assert w.point["k12"] != w.permuted_point["k12"]


def test_symmetry_witness_swaps_leaves():
    w = symmetry_sling_witness(make(4, 1, 2), "k13")
    assert w.sigma == Permutation.transposition(4, 3, 4) and w.image == "k14"


def test_no_symmetry_witness_for_fixed_edge():
    assert symmetry_sling_witness(make(4, 1, 2), "k21") is None


# -- fiber sampling -----------------------------------------------------------------------

def test_fiber_example_star():
    rep = fiber_sample(make(4, 1, 2), starts=60, seed=42)
    assert rep.distinct_counts["k21"] == 1
    assert rep.distinct_counts["k12"] == 3
    assert rep.distinct_counts["k13"] >= 2
    assert rep.max_residual < 1e-9


def test_fiber_22():
    rep = fiber_sample(make(4, 2, 2), starts=60, seed=42)
    assert rep.distinct_counts["k12"] == rep.distinct_counts["k21"] == 1
    assert rep.distinct_counts["k13"] >= 2


def test_fiber_23_positive_dimension():
    rep = fiber_sample(make(4, 2, 3), starts=30, seed=42)
    assert rep.distinct_counts["k14"] == 1
    assert rep.distinct_counts["k12"] > 10


def test_fiber_base_point_is_a_solution():
    m = make(4, 1, 2)
    base = dict.fromkeys(m.parameters, 1.5) | {"k13": 0.7, "k14": 2.2}
    rep = fiber_sample(m, base, starts=1)
    assert rep.converged == 1
    assert rep.solutions[0] == pytest.approx([base[p] for p in rep.parameters])


def test_fiber_thread_count_invariant(monkeypatch):
    m = make(4, 1, 1)
    monkeypatch.setenv("LCM_IDENT_THREADS", "1")
    one = fiber_sample(m, starts=20, seed=7).to_dict()
    monkeypatch.setenv("LCM_IDENT_THREADS", "4")
    four = fiber_sample(m, starts=20, seed=7).to_dict()
    assert one == four


# -- classification ---------------------------------------------------------------------

def test_evidence_kind_validated():
    with pytest.raises(ValueError):
        Evidence("hunch", {})


def test_classify_closed_form_first():
    v = classify_parameter(make(4, 1, 2), "k21", FAST)
    assert v.cls is IdentClass.GLOBAL
    assert [e.kind for e in v.evidence] == ["closed-form", "paper-theorem"]
    assert not v.empirical


def test_classify_symmetry_sling():
    v = classify_parameter(make(5, 1, 1), "k31", FAST)
    assert v.cls is IdentClass.SLING
    assert "symmetry-witness" in [e.kind for e in v.evidence]


def test_classify_constructive_witness():
    v = classify_parameter(make(4, 1, 2), "k12", FAST)
    assert v.cls is IdentClass.SLING
    assert [e.kind for e in v.evidence] == ["rank-test", "closed-form", "paper-theorem"]


def test_classify_conjecture_label():
    v = classify_parameter(make(5, 2, 3), "k12", FAST)
    assert v.cls is IdentClass.UNIDENTIFIABLE
    assert v.label == "Unidentifiable (conjecture-supported)"
    assert v.to_dict()["class"] == "Unidentifiable"


def test_classify_unresolved_without_fiber():
    m = Model.build(3, [(1, 2), (2, 1), (2, 3), (3, 1)], [1], [2], [3])
    verdicts = classify_model(m, FAST)
    assert {v.cls for v in verdicts} == {IdentClass.UNRESOLVED}


def test_classify_fiber_fallback_is_empirical():
    m = Model.build(3, [(1, 2), (2, 1), (2, 3), (3, 1)], [1], [2], [3])
    v = classify_parameter(m, "k21", IdentConfig(starts=30, fiber_base_points=1))
    assert v.empirical and "fiber-sample" in [e.kind for e in v.evidence]
    assert v.cls in (IdentClass.GENERIC_GLOBAL, IdentClass.SLING)


def test_verdict_dict_schema():
    d = classify_parameter(make(4, 1, 2), "k21", FAST).to_dict()
    assert set(d) == {"parameter", "class", "label", "empirical", "evidence", "seeds", "config"}


def test_global_verdict_has_single_fiber_value():
    m = make(4, 1, 2)
    rep = fiber_sample(m, starts=40, seed=3)
    for v in classify_model(m, FAST):
        if v.cls is IdentClass.GLOBAL:
            assert rep.distinct_counts[v.parameter] == 1


@settings(max_examples=15)
@given(st.sampled_from([(1, 1), (1, 2), (2, 1), (2, 2), (2, 3)]), st.integers(4, 6),
       st.permutations(range(1, 7)))
def test_classification_invariant_under_relabelling(pair, n, perm):
    images = [v for v in perm if v <= n]
    sigma = Permutation(images)
    m = make(n, *pair)
    img = m.relabel(sigma)
    ren = sigma.rename_map(m)
    base = {v.parameter: v.label for v in classify_model(m, FAST)}
    moved = {v.parameter: v.label for v in classify_model(img, FAST)}
    assert {ren[p]: lab for p, lab in base.items()} == moved


def test_analyzer_caches_rank():
    an = ModelAnalyzer(make(4, 1, 2), FAST)
    assert an.rank is an.rank
