import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from controlplan.expr import Add, Const, Mul, Sub, UnboundControlVariable, Var, evaluate
from controlplan.interval import Interval, dom_of, iv_add, iv_mul, iv_sub

small = st.fractions(min_value=-20, max_value=20, max_denominator=12)


@st.composite
def intervals(draw):
    a, b = draw(small), draw(small)
    return Interval(min(a, b), max(a, b))


def endpoint_oracle(op, a, b):
    values = [op(x, y) for x in (a.lo, a.hi) for y in (b.lo, b.hi)]
    return min(values), max(values)


OPS = [
    (iv_add, lambda x, y: x + y),
    (iv_sub, lambda x, y: x - y),
    (iv_mul, lambda x, y: x * y),
]


def test_golden_linear_combination():
    doms = {"u1": Interval(1, 2), "u2": Interval(0, 3)}
    assert dom_of(Add(Mul(Const(3), Var("u1")), Var("u2")), doms) == Interval(3, 9)


def test_example_effect_domains():
    doms = {"u1": Interval(0, 4), "u2": Interval(3, 5)}
    assert dom_of(Add(Mul(Const(2), Var("u1")), Var("u2")), doms) == Interval(3, 13)
    assert dom_of(Sub(Var("u1"), Mul(Const(3), Var("u2"))), doms) == Interval(-15, -5)


def test_mul_mixed_signs():
    assert iv_mul(Interval(-2, 3), Interval(-5, 1)) == Interval(-15, 10)
    assert Interval(-1, 1) * Interval(-1, 1) == Interval(-1, 1)


def test_repeated_variable_is_over_approximated():
    u = Var("u")
    assert dom_of(Sub(u, u), {"u": Interval(0, 2)}) == Interval(-2, 2)


def test_endpoints_are_exact_rationals():
    r = dom_of(Mul(Const(Fraction(1, 3)), Var("u")), {"u": Interval(0, 1)})
    assert r.hi == Fraction(1, 3) and isinstance(r.hi, Fraction)


def test_rejects_empty_and_float():
    with pytest.raises(ValueError):
        Interval(2, 1)
    with pytest.raises(TypeError):
        Interval(0.5, 1)


def test_unbound_variable():
    with pytest.raises(UnboundControlVariable):
        dom_of(Var("w"), {"u": Interval(0, 1)})


def test_point_and_membership():
    p = Interval.point(3)
    assert p.is_point and p.width == 0 and 3 in p and 4 not in p


@settings(max_examples=1000, deadline=None)
@given(intervals(), intervals(), st.sampled_from(OPS))
def test_matches_endpoint_enumeration(a, b, ops):
    fn, op = ops
    r = fn(a, b)
    assert (r.lo, r.hi) == endpoint_oracle(op, a, b)


@settings(max_examples=1000, deadline=None)
@given(intervals(), intervals(), st.sampled_from(OPS), st.data())
def test_sound_for_interior_points(a, b, ops, data):
    fn, op = ops
    x = a.lo + a.width * data.draw(st.fractions(0, 1, max_denominator=16))
    y = b.lo + b.width * data.draw(st.fractions(0, 1, max_denominator=16))
    assert op(x, y) in fn(a, b)


@st.composite
def linear_control_exprs(draw):
    names = ["u1", "u2", "u3"]
    terms = [Mul(Const(draw(st.integers(-4, 4))), Var(n)) for n in names if draw(st.booleans())]
    node = Const(draw(st.integers(-5, 5)))
    for t in terms:
        node = Add(node, t)
    return node


@settings(max_examples=300, deadline=None)
@given(linear_control_exprs(), st.lists(intervals(), min_size=3, max_size=3))
def test_linear_expression_endpoints_attained_at_corners(expr, ivs):
    doms = dict(zip(["u1", "u2", "u3"], ivs))
    r = dom_of(expr, doms)
    corners = [
        evaluate(expr, dict(zip(doms, c))) for c in itertools.product(*((d.lo, d.hi) for d in ivs))
    ]
    # each variable occurs once, so interval evaluation is tight
    assert r.lo == min(corners) and r.hi == max(corners)
