import pytest
from hypothesis import given

from spintempo.opcore import (
    DEFAULT_RULES,
    NO_RULES,
    DSLError,
    RewriteRuleSet,
    apply_rewrites,
    field,
    field_op,
    matrix_op,
    parse_operator,
    reduce_symbol,
    to_dsl,
)
from strategies import exprs


# -- DSL -------------------------------------------------------------------------

@given(exprs)
def test_print_parse_round_trip(e):
    text = to_dsl(e)
    again = parse_operator(text)
    assert again == e
    assert to_dsl(again) == text


def test_symmetric_metric_and_sorted_derivatives():
    assert parse_operator("h21") == parse_operator("h12")
    assert parse_operator("D(1,D(2,phi))") == parse_operator("D(2,D(1,phi))")
    assert field("h31", 2, 1) == field("h13", 1, 2)


def test_indexed_forms_and_sums():
    assert parse_operator("sum[j](alpha(j)*p(j))") == parse_operator("alpha1*p1 + alpha2*p2 + alpha3*p3")
    assert parse_operator("sum[i,j](delta(i,j)*d(i)*d(j))") == parse_operator("d1^2 + d2^2 + d3^2")
    assert parse_operator("sum[i,j,k](eps(i,j,k)*alpha(i)*alpha(j)*sigma(k))") != 0


def test_comments_and_bindings():
    assert parse_operator("beta # mass term\n + 0") == matrix_op("beta")
    assert parse_operator("g(j)", bindings={"j": 2}) == field_op("g2")


@pytest.mark.parametrize(
    "text, line, col",
    [
        ("phi + foo", 1, 7),
        ("beta\n  * m^-3", 2, 6),
        ("phi*h12*d1", 1, 4),
        ("(phi + beta", 1, 12),
        ("phi ++ * d1", 1, 8),
    ],
)
def test_errors_carry_position(text, line, col):
    with pytest.raises(DSLError) as info:
        parse_operator(text)
    assert (info.value.line, info.value.col) == (line, col)
    assert f"line {line}" in str(info.value)


def test_error_messages_name_the_problem():
    with pytest.raises(DSLError, match="unknown"):
        parse_operator("psi")
    with pytest.raises(DSLError, match="window|m-power|truncat"):
        parse_operator("m^2")
    with pytest.raises(DSLError):
        parse_operator("phi*h12*d1")


def test_unbound_index_rejected():
    with pytest.raises(DSLError):
        parse_operator("alpha(j)")


# -- rewrites ----------------------------------------------------------------------

def test_laplacian_rule():
    assert apply_rewrites(parse_operator("D(1,D(1,phi)) + D(2,D(2,phi)) + D(3,D(3,phi))")) == 0


def test_divergence_rule():
    assert apply_rewrites(parse_operator("sum[j](D(j,g(j)))*beta")) == 0


def test_trace_rule():
    lhs = apply_rewrites(parse_operator("sum[j](D(j,h(1,j)))*d1"))
    assert lhs == apply_rewrites(parse_operator("-(1/2)*D(1,h)*d1"))


def test_no_rules_is_identity():
    e = parse_operator("D(1,D(1,phi)) + D(2,D(2,phi))*beta")
    assert apply_rewrites(e, NO_RULES) == e


def test_rules_are_independently_switchable():
    lap = parse_operator("D(1,D(1,phi)) + D(2,D(2,phi)) + D(3,D(3,phi))")
    assert apply_rewrites(lap, RewriteRuleSet(laplacian=False)) != 0
    div = parse_operator("sum[j](D(j,g(j)))")
    assert apply_rewrites(div, RewriteRuleSet(divergence=False)) != 0


def test_trace_definition_rule_off_by_default():
    e = parse_operator("h*beta")
    assert apply_rewrites(e) == e
    rules = RewriteRuleSet(trace_definition=True)
    reduced = apply_rewrites(e, rules)
    assert reduced != e
    assert apply_rewrites(parse_operator("(2*phi - h11 - h22 - h33)*beta"), rules) == reduced


@given(exprs)
def test_rewrite_idempotent(e):
    once = apply_rewrites(e, DEFAULT_RULES)
    assert apply_rewrites(once, DEFAULT_RULES) == once


@given(exprs, exprs)
def test_rewrite_is_linear(a, b):
    assert apply_rewrites(a + b) == apply_rewrites(a) + apply_rewrites(b)


def test_reduced_symbols_are_fixed_points():
    for base in ("phi", "g1", "h12", "h"):
        for axes in ((), (1,), (1, 2), (1, 1), (2, 3, 3), (1, 1, 1)):
            f = field(base, *axes)
            for g in reduce_symbol(f):
                assert reduce_symbol(g) == {g: 1}
