import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from musielak_kit.errors import BracketFailure, HypothesisViolated, MonotonicityViolated
from musielak_kit.measure import MeasureSpace, QuadratureRule, ScalarField, lebesgue01
from musielak_kit.nfunc import CallableFunction, FunctionFamily, TDomain, catalog, scale, sum_
from musielak_kit.space import embedding_check, family_norm_check, luxemburg_norm, modular

SQRT3 = math.sqrt(3.0)
SPACE = lebesgue01()
POWER = catalog("power_tu2")


def random_fields(n, seed, size=SPACE.size):
    rng = np.random.default_rng(seed)
    t = SPACE.nodes
    out = []
    for _ in range(n):
        a, b, c = rng.uniform(0.1, 3), rng.uniform(-2, 2), rng.uniform(0, 1)
        out.append(np.abs(a * np.exp(b * t) + c * np.sin(7 * rng.uniform() * t)) + rng.uniform(0, 0.5, size))
    return out


def test_modular_examples():
    assert modular(ScalarField.constant(1), POWER, SPACE).value == pytest.approx(1 / 3, abs=1e-9)
    assert modular(ScalarField.constant(0), POWER, SPACE).value == 0.0
    point = MeasureSpace.discrete([(1.0, 1.0)])
    assert modular(np.array([2.0]), POWER, point).value == 4.0


def test_modular_overflow_flag():
    exp = catalog("exp_abs")
    r = modular(ScalarField.constant(800), exp, SPACE)
    assert r.overflow and r.exceeds_one()


@pytest.mark.parametrize("c, want", [(1.0, 1 / SQRT3), (0.0, 0.0), (2.0, 2 / SQRT3)])
def test_norm_examples(c, want):
    res = luxemburg_norm(ScalarField.constant(c), POWER, SPACE, rel_tol=1e-8)
    assert res.norm == pytest.approx(want, abs=1e-6)
    if c == 0:
        assert res.iterations == 0


def test_norm_bracket_and_certificate():
    rel = 1e-6
    for v in random_fields(20, 1):
        res = luxemburg_norm(v, POWER, SPACE, rel)
        lo, hi = res.bracket
        assert hi - lo <= rel * hi
        assert res.modular_at_norm <= 1.0
        assert modular(v, POWER, SPACE, res.norm * (1 - 10 * rel)).value > 1.0


def test_modular_monotone_in_lambda():
    for v in random_fields(20, 2):
        lams = np.geomspace(1e-3, 1e3, 40)
        vals = [modular(v, POWER, SPACE, lam).value for lam in lams]
        assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_definiteness():
    sp = MeasureSpace.discrete([(0.5, 1.0), (1.0, 0.0)])
    # nonzero only where the weight vanishes
    assert luxemburg_norm(np.array([0.0, 5.0]), POWER, sp).norm == 0.0
    assert luxemburg_norm(np.array([1e-3, 0.0]), POWER, sp).norm > 0.0


def test_homogeneity_and_triangle():
    rel = 1e-8
    fields = random_fields(200, 3)
    for g in fields:
        base = luxemburg_norm(g, POWER, SPACE, rel).norm
        for alpha in (-2.0, -1.0, 0.5, 3.0):
            # field values are norms of the vector values, so |alpha f| = |alpha| f
            got = luxemburg_norm(np.abs(alpha * g), POWER, SPACE, rel).norm
            assert abs(got - abs(alpha) * base) <= 2 * rel * abs(alpha) * base
    for f, g in zip(fields, fields[1:] + fields[:1]):
        nf, ng = (luxemburg_norm(x, POWER, SPACE, rel).norm for x in (f, g))
        assert luxemburg_norm(f + g, POWER, SPACE, rel).norm <= nf + ng + 2 * rel * (nf + ng)


@pytest.mark.parametrize("r", [1.0, 2.0, 5.0])
def test_scale_sandwich(r):
    for v in random_fields(50, 4):
        n = luxemburg_norm(v, POWER, SPACE).norm
        nr = luxemburg_norm(v, scale(r, POWER), SPACE).norm
        assert n - 1e-6 <= nr <= r * n + 1e-6


def test_sum_additivity_is_exact():
    exp = catalog("exp_abs")
    for v in random_fields(30, 5):
        v = np.minimum(v, 5.0)
        both = modular(v, sum_(POWER, exp), SPACE).value
        assert both == math.fsum([modular(v, POWER, SPACE).value, modular(v, exp, SPACE).value])


def test_node_agreement_is_bit_identical():
    # differs from (tu)^2 only away from [0, 1], where the space has no nodes
    impostor = CallableFunction(lambda t, u: np.where(t > 1.5, 7.0 * u * u, (t * u) ** 2),
                                TDomain.of(0.0, 2.0))
    for v in random_fields(10, 6):
        a = luxemburg_norm(v, POWER, SPACE)
        b = luxemburg_norm(v, impostor, SPACE)
        assert a.norm.hex() == b.norm.hex()
        assert modular(v, POWER, SPACE).value.hex() == modular(v, impostor, SPACE).value.hex()


def test_bracket_failure_on_degenerate_function():
    zero = CallableFunction(lambda t, u: 0.0 * u)
    with pytest.raises(BracketFailure):
        luxemburg_norm(ScalarField.constant(1), zero, SPACE)


# -- embeddings -----------------------------------------------------------------


def test_embedding_half_scale():
    fields = [v + 0.1 for v in random_fields(50, 7)]
    rep = embedding_check(POWER, scale(0.5, POWER), 1.0, 0.1, SPACE, test_fields=fields)
    assert rep.hypothesis_holds and rep.modular_inequality_holds
    assert rep.fields_checked == 50


def test_embedding_exp_violates():
    rep = embedding_check(POWER, catalog("exp_abs"), 1.0, 0.1, SPACE)
    assert not rep.holds
    assert rep.witness["M2"] > rep.witness["r*M1"]
    with pytest.raises(HypothesisViolated) as info:
        embedding_check(POWER, catalog("exp_abs"), 1.0, 0.1, SPACE, strict=True)
    assert "t" in info.value.witness and "u" in info.value.witness


def test_embedding_equality_both_ways():
    rep = embedding_check(POWER, catalog("power_tu2"), 1.0, 0.1, SPACE, r_reverse=1.0,
                          test_fields=[v + 0.1 for v in random_fields(5, 8)])
    assert rep.holds and rep.reverse is not None and rep.reverse.holds


# -- families -------------------------------------------------------------------


def increasing(start=2, tail=64):
    return FunctionFamily.from_expr("(1 - 1/n)*(t*u)^2", start=start, tail=tail)


def test_monotone_family_identity():
    rep = family_norm_check(increasing(), ScalarField.constant(1), SPACE)
    for n, x in zip(rep.indices, rep.member_norms):
        assert x == pytest.approx(math.sqrt((1 - 1 / n) / 3), abs=1e-6)
    assert rep.combinator_norms["sup"] == pytest.approx(1 / SQRT3, abs=2e-2)
    assert rep.combinator_norms["inf"] == pytest.approx(rep.member_norms[0], abs=1e-6)
    assert rep.passed


def test_degenerate_member_excluded():
    rep = family_norm_check(increasing(start=1, tail=8), ScalarField.constant(1), SPACE)
    assert rep.excluded == [1]
    assert rep.aggregates["min_member"] == pytest.approx(math.sqrt(0.5 / 3), abs=1e-6)


def test_constant_family():
    fam = FunctionFamily([POWER] * 5)
    rep = family_norm_check(fam, ScalarField.constant(1), SPACE)
    assert len(set(rep.member_norms)) == 1
    assert rep.combinator_norms["sup"] == rep.member_norms[0]


def test_nonmonotone_family_rejected():
    fam = FunctionFamily.from_expr("(1 + 1/n)*(t*u)^2", tail=8)
    with pytest.raises(MonotonicityViolated) as info:
        family_norm_check(fam, ScalarField.constant(1), SPACE)
    assert {"n", "t", "u"} <= set(info.value.witness)


def test_dominated_family():
    fam = FunctionFamily.from_expr("(t*u)^2/(1 + 1/n)", tail=64, dominator=POWER)
    rep = family_norm_check(fam, ScalarField.constant(1), SPACE, variant="dominated")
    assert rep.combinator_norms["limit"] == pytest.approx(1 / SQRT3, abs=2e-2)
    assert rep.passed
    seq = rep.gaps["sequence"]
    assert seq[-1] < seq[0]


def test_dominated_family_with_explicit_limit():
    fam = FunctionFamily.from_expr("(t*u)^2/(1 + 1/n)", tail=64, dominator=POWER, limit=POWER)
    rep = family_norm_check(fam, ScalarField.constant(1), SPACE, variant="dominated")
    assert rep.combinator_norms["limit"] == pytest.approx(1 / SQRT3, abs=1e-7)
    assert rep.passed


@given(st.floats(0.05, 20), st.floats(0.05, 20))
@settings(max_examples=100, deadline=None)
def test_constant_fields_closed_form(c, d):
    # on [0, 1] with M = d (tu)^2 and f = c the norm is c sqrt(d/3)
    sp = MeasureSpace.interval(0, 1, rule=QuadratureRule("simpson", 101))
    got = luxemburg_norm(ScalarField.constant(c), scale(d, POWER), sp, 1e-10).norm
    assert got == pytest.approx(c * math.sqrt(d / 3), rel=1e-8)
