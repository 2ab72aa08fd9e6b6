import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from musielak_kit.errors import DominationViolated, EmptyFamily, NonmonotoneQuotient, SpecError
from musielak_kit.nfunc import (
    CallableFunction,
    ExprFunction,
    FunctionFamily,
    Grid,
    TDomain,
    Verdict,
    catalog,
    classify,
    delta2_check,
    lim_inf,
    lim_sup,
    p_plus,
    pointwise_inf,
    pointwise_sup,
    representation_defect,
    scale,
    sum_,
    verify_axioms,
)
from musielak_kit.nfunc.axioms import ae_holds

N_CATALOG = ["power_tu2", "exp_abs"]


@pytest.fixture(scope="module")
def increasing_family():
    return FunctionFamily.from_expr("(1-1/n)*(t*u)^2", index="n", start=1, tail=64)


# -- evaluate --------------------------------------------------------------------


def test_evaluate_catalog():
    assert catalog("power_tu2")(1.0, 2.0) == 4.0


@pytest.mark.parametrize("name", N_CATALOG + ["geo_minus_one", "affine_slope"])
def test_zero_at_zero(name):
    m = catalog(name)
    ts = m.tdomain.sample(33)
    np.testing.assert_array_equal(m(ts, 0.0), 0.0)


def test_sup_of_family_brute_force(increasing_family):
    brute = max((1 - 1 / n) * 1.0 for n in range(1, 65))
    assert pointwise_sup(increasing_family)(1.0, 1.0) == brute == 63 / 64


def test_exp_abs_literal_is_not_zero_at_zero():
    m = catalog("exp_abs_literal")
    assert m(0.0, 0.0) == 1.0
    assert classify(m) == Verdict.NEITHER


# -- p_plus ----------------------------------------------------------------------


def test_p_plus_square():
    m = catalog("power_tu2")
    assert p_plus(m, 1.0, 1.0) == pytest.approx(2.0, abs=1e-6)
    assert p_plus(m, 1.0, 0.0) == pytest.approx(0.0, abs=1e-6)


def test_p_plus_exp():
    assert p_plus(catalog("exp_abs"), 0.0, 1.0) == pytest.approx(math.e - 1, abs=1e-5)


@pytest.mark.parametrize("t", [-1.0, -0.3, 0.0, 0.5, 1.0])
def test_p_plus_against_analytic(t):
    u = np.linspace(0, 4, 41)
    np.testing.assert_allclose(p_plus(catalog("power_tu2"), t, u), 2 * t * t * u, atol=1e-8)
    np.testing.assert_allclose(p_plus(catalog("exp_abs"), t, u), math.exp(abs(t)) * (np.exp(u) - 1),
                               rtol=1e-8, atol=1e-9)


def test_p_plus_kink_is_right_derivative():
    m = ExprFunction("max(abs(u) - 1, 0)^1", tdomain=TDomain.of(0, 0))
    assert p_plus(m, 0.0, 1.0) == pytest.approx(1.0, abs=1e-9)
    assert p_plus(m, 0.0, 0.5) == pytest.approx(0.0, abs=1e-9)


def test_p_plus_rejects_concave():
    with pytest.raises(NonmonotoneQuotient):
        p_plus(ExprFunction("-(u^2)"), 0.0, 1.0)


@pytest.mark.parametrize("name", N_CATALOG)
def test_p_plus_nondecreasing(name):
    m = catalog(name)
    u = np.linspace(0, 5, 200)
    for t in m.tdomain.sample(9):
        assert np.all(np.diff(p_plus(m, t, u)) >= -1e-9)


# -- representation ----------------------------------------------------------------


def test_representation_square():
    d = representation_defect(catalog("power_tu2"), np.linspace(-1, 1, 33), np.linspace(-4, 4, 33))
    assert d <= 1e-6


def test_representation_zero_function():
    assert representation_defect(ExprFunction("0*u"), [0.0, 1.0], [-1.0, 2.0]) == 0.0


def test_representation_exp():
    d = representation_defect(catalog("exp_abs"), np.linspace(-1, 1, 33), np.linspace(-3, 3, 25), 2001)
    assert d <= 1e-4


def test_representation_detects_missing_zero():
    # M(t,0) = 1 cannot be an integral from 0
    assert representation_defect(catalog("exp_abs_literal"), [0.0], [1.0]) > 0.5


# -- axioms and classification ---------------------------------------------------------


@pytest.mark.parametrize("name", N_CATALOG)
def test_n_functions_pass(name):
    r = verify_axioms(catalog(name))
    assert all(r.verdicts[k] for k in ("axiom1", "axiom2", "axiom3", "axiom4"))
    assert r.verdicts["axiom5"] == "by-construction"
    assert r.classification == Verdict.MUSIELAK_N


def test_affine_slope_fails_limits():
    m = catalog("affine_slope")
    r = verify_axioms(m, Grid.build(m, t=[1.0]))
    assert not r.verdicts["axiom3"] and not r.verdicts["axiom4"]
    assert r.limit0_estimate == pytest.approx(4.0, rel=1e-9)
    assert r.limit_inf_slope == pytest.approx(4.0, rel=1e-9)
    assert r.growth_trend == [False]
    assert r.classification == Verdict.MUSIELAK_ORLICZ_ONLY


def test_geo_minus_one_limit_estimates():
    m = catalog("geo_minus_one", a=math.e)
    r = verify_axioms(m, Grid.build(m, t=[1.0, 2.0]))
    assert r.classification == Verdict.MUSIELAK_ORLICZ_ONLY
    for t, est in zip([1.0, 2.0], r.limit0_per_t):
        assert est == pytest.approx(t * math.log(math.e), rel=1e-3)


def test_geo_minus_one_other_base():
    m = catalog("geo_minus_one", a=3.0)
    r = verify_axioms(m, Grid.build(m, t=[0.5]))
    assert r.limit0_per_t[0] == pytest.approx(0.5 * math.log(3.0), rel=1e-3)


def test_shifted_square_is_neither():
    assert classify(ExprFunction("(t*u)^2 + 1")) == Verdict.NEITHER


def test_nonconvex_is_neither():
    # passes both limits but is not convex
    m = ExprFunction("min(u^2, abs(u)) + max(abs(u) - 2, 0)^2")
    r = verify_axioms(m)
    assert not r.verdicts["convex_nonneg"]
    assert r.classification == Verdict.NEITHER


def test_degenerate_member_is_neither(increasing_family):
    assert classify(increasing_family.member(1)) == Verdict.NEITHER


def test_sum_of_catalog_members():
    assert classify(sum_(catalog("power_tu2"), catalog("exp_abs"))) == Verdict.MUSIELAK_N


def test_isolated_null_failure_is_excused():
    # (tu)^2 vanishes at t = 0 only
    r = verify_axioms(catalog("power_tu2"))
    assert r.excused["axiom2"] == [0.0]
    # on a point set nothing is excused
    m = catalog("power_tu2")
    r = verify_axioms(m, Grid.build(m, t=[0.0, 1.0]))
    assert not r.verdicts["axiom2"]


def test_ae_holds_rules():
    assert ae_holds([True, False, True], True) == (True, [1])
    assert ae_holds([True, False, False, True], True)[0] is False
    assert ae_holds([True, False, True], False)[0] is False
    assert ae_holds([False], True)[0] is False


def test_domain_errors_become_evidence():
    r = verify_axioms(ExprFunction("u^2*log(abs(u))"))
    assert r.classification == Verdict.NEITHER


def test_report_serialises():
    d = verify_axioms(catalog("exp_abs")).to_dict()
    text = json.dumps(d)
    assert "even_defect" in text and "classification" in text


@pytest.mark.parametrize("name", N_CATALOG)
def test_evenness_invariant(name):
    r = verify_axioms(catalog(name))
    assert r.even_defect <= 1e-12


@pytest.mark.parametrize("name", N_CATALOG)
def test_midpoint_convexity_invariant(name):
    m = catalog(name)
    u = np.linspace(-8, 8, 65)
    for t in m.tdomain.sample(9):
        vals = m(t, u)
        mid = m(t, 0.5 * (u[:, None] + u[None, :]))
        assert np.all(mid <= 0.5 * (vals[:, None] + vals[None, :]) + 1e-10 * np.maximum(1, vals[:, None]))


@pytest.mark.parametrize("a, b", list(itertools.combinations_with_replacement(N_CATALOG, 2)))
def test_sum_closure(a, b):
    assert classify(sum_(catalog(a), catalog(b))) == Verdict.MUSIELAK_N


@pytest.mark.parametrize("name", N_CATALOG)
@pytest.mark.parametrize("r", [0.5, 1, 3])
def test_scale_closure(name, r):
    assert classify(scale(r, catalog(name))) == Verdict.MUSIELAK_N


def test_node_agreement_gives_identical_reports():
    m1 = catalog("power_tu2")
    grid = Grid.build(m1)
    nodes = grid.t

    def impostor(t, u):
        on_grid = np.isin(t, nodes)
        return np.where(on_grid, (t * u) ** 2, 5 * (t * u) ** 2 + np.sin(t) ** 2)

    m2 = CallableFunction(impostor, m1.tdomain, name=m1.describe())
    assert verify_axioms(m1, grid).to_dict() == verify_axioms(m2, grid).to_dict()
    assert classify(m1, grid) == classify(m2, grid)


# -- delta 2 ------------------------------------------------------------------------


def test_delta2_square():
    r = delta2_check(catalog("power_tu2"), u0=0.5)
    assert r.K_estimate == pytest.approx(4.0, abs=1e-9)
    assert r.bounded
    assert r.skipped_t == [0.0]


def test_delta2_exp_unbounded():
    r = delta2_check(catalog("exp_abs"), u0=1.0, u_top=30.0)
    assert not r.bounded
    assert r.K_estimate > 1e6


def test_delta2_affine():
    r = delta2_check(catalog("affine_slope"), u0=0.1, grid=Grid.build(catalog("affine_slope"), t=[1.0]))
    assert r.K_estimate == pytest.approx(2.0, abs=1e-12)
    assert r.bounded


def test_delta2_closure_under_sum():
    m1 = catalog("power_tu2")
    m2 = ExprFunction("abs(u)^3 + 0*t")
    r1, r2 = delta2_check(m1), delta2_check(m2)
    assert r1.bounded and r2.bounded
    rs = delta2_check(sum_(m1, m2))
    assert rs.K_estimate <= max(r1.K_estimate, r2.K_estimate) + 1e-9


def test_delta2_needs_positive_u0():
    with pytest.raises(SpecError):
        delta2_check(catalog("power_tu2"), u0=0.0)


# -- combinators -------------------------------------------------------------------------


def test_scale_value():
    assert scale(3, catalog("power_tu2"))(1.0, 1.0) == 3.0
    with pytest.raises(SpecError):
        scale(0, catalog("power_tu2"))
    with pytest.raises(SpecError):
        scale(-1, catalog("power_tu2"))


def test_inf_of_increasing_family(increasing_family):
    inf = pointwise_inf(increasing_family)
    t, u = np.meshgrid(np.linspace(-1, 1, 9), np.linspace(-3, 3, 9))
    np.testing.assert_array_equal(inf(t, u), 0.0)


def test_limsup_tail_window(increasing_family):
    assert lim_sup(increasing_family)(1.0, 1.0) == 63 / 64
    # liminf of the window is the member at its midpoint, n = 32
    assert lim_inf(increasing_family)(1.0, 1.0) == 31 / 32


def test_limsup_liminf_oscillating():
    fam = FunctionFamily([ExprFunction("(t*u)^2"), ExprFunction("2*(t*u)^2")] * 5)
    assert lim_sup(fam)(1.0, 1.0) == 2.0
    assert lim_inf(fam)(1.0, 1.0) == 1.0


def test_empty_family():
    with pytest.raises(EmptyFamily):
        FunctionFamily([])
    with pytest.raises(EmptyFamily):
        FunctionFamily.from_expr("n*u^2", start=5, tail=3)


def test_domination_checked():
    g = catalog("power_tu2")
    fam = FunctionFamily.from_expr("(1+1/n)*(t*u)^2", tail=4, dominator=g)
    with pytest.raises(DominationViolated) as info:
        fam.check_domination(np.linspace(0.5, 1, 3)[:, None], np.linspace(0, 2, 5)[None, :])
    assert info.value.witness["n"] == 1


@given(st.floats(-1, 1), st.floats(-4, 4), st.integers(1, 64), st.integers(1, 64))
@settings(max_examples=1000, deadline=None)
def test_family_combinators_match_brute_force(t, u, a, b):
    lo, hi = min(a, b), max(a, b)
    fam = FunctionFamily.from_expr("(1 + (-1)^n/n)*(t*u)^2 + abs(u)/n", start=lo, tail=hi)
    vals = [m(t, u) for m in fam.members]
    assert pointwise_sup(fam)(t, u) == max(vals)
    assert pointwise_inf(fam)(t, u) == min(vals)
    half = (len(vals) - 1) // 2
    assert lim_sup(fam)(t, u) == min(max(vals[k:]) for k in range(half + 1))
    assert lim_inf(fam)(t, u) == max(min(vals[k:]) for k in range(half + 1))


@pytest.mark.parametrize("kind", [pointwise_sup, pointwise_inf, lim_sup, lim_inf])
def test_family_combinators_of_n_functions_classify(kind):
    fam = FunctionFamily.from_expr("(1+1/n)*(t*u)^2 + abs(u)^3/n", start=1, tail=16,
                                   tdomain=TDomain.of(-1, 1))
    assert classify(kind(fam)) == Verdict.MUSIELAK_N


def test_catalog_errors():
    with pytest.raises(SpecError):
        catalog("nope")
    with pytest.raises(SpecError):
        catalog("geo_minus_one", a=0.5)
    with pytest.raises(SpecError):
        catalog("power_tu2", a=2)
