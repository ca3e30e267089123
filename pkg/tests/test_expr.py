from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from quonlab.expr import (
    SU2,
    Annihilation,
    Comm,
    Creation,
    ExpressionSyntaxError,
    Product,
    QMut,
    QSymbol,
    Relation,
    Scalar,
    Sum,
    Transition,
    evaluate_identity,
    evaluate_operator,
    parse_expression,
    parse_operator,
    to_text,
)
from quonlab.fock import FockSpace
from quonlab.report import ERROR, FAIL, PASS


def test_parse_examples():
    e = parse_expression("qmut[b(1), bd(1)] == 1")
    assert e == Relation(QMut(Annihilation(2), Creation(2)), Scalar(Fraction(1)))
    e = parse_expression("comm[Jp, Jm] == 2*J0")
    assert e == Relation(Comm(SU2("Jp"), SU2("Jm")), Product((Scalar(Fraction(2)), SU2("J0"))))
    e = parse_expression("comm[N(1,0), bd(0)] == bd(1)")
    assert e.lhs == Comm(Transition(2, 0), Creation(0))


def test_half_integer_and_signed_modes():
    e = parse_operator("bd(-3/2) * b(+1/2) - N(1/2,-1/2)")
    assert e == Sum(((1, Product((Creation(-3), Annihilation(1)))), (-1, Transition(1, -1))))


def test_decimal_scalars_are_exact():
    assert parse_operator("0.25") == Scalar(Fraction(1, 4))


@pytest.mark.parametrize(
    "text,line,col",
    [
        ("comm[J0, bd(1) == 1", 1, 16),
        ("bd(1) ==", 1, 9),
        ("bd(1) $ b(1) == 0", 1, 7),
        ("bd(1)\n  == b(x)", 2, 8),
        ("qmut[b(1) bd(1)] == 0", 1, 11),
    ],
)
def test_syntax_error_positions(text, line, col):
    with pytest.raises(ExpressionSyntaxError) as info:
        parse_expression(text)
    assert (info.value.line, info.value.column) == (line, col)
    assert f"line {line}, column {col}" in str(info.value)


def test_mode_out_of_range_for_level():
    with pytest.raises(ExpressionSyntaxError, match="outside"):
        parse_expression("bd(2) == 0", twice_j=2)
    with pytest.raises(ExpressionSyntaxError):
        parse_expression("bd(1/2) == 0", twice_j=2)


@pytest.mark.parametrize(
    "text",
    [
        "qmut[b(1), bd(2)] == 0",
        "qmut[b(1), bd(1)] == 1",
        "comm[J0, bd(1)] == 1*bd(1)",
        "comm[N(1,0), N(0,1)] == N(1,1) - N(0,0)",
        "comm[Jp, Jm] == 2*J0",
        "comm[J0, Jp] == Jp",
        "comm[N(1,0), bd(0)] == bd(1)",
        "comm[N(1,0), b(1)] == -b(0)",
        "b(0)*bd(0) - q*bd(0)*b(0) == 1",
        "(bd(1) + bd(0))*(b(1) - 1/2*b(0)) == bd(1)*b(1) - 0.5*bd(1)*b(0) + bd(0)*b(1) - 1/2*bd(0)*b(0)",
    ],
)
@pytest.mark.parametrize("q", ["1/2", "0.9", "-0.9"])
def test_true_identities_pass(text, q):
    space = FockSpace(4, q, 3)
    assert evaluate_identity(text, space).status == PASS


def test_identities_on_j1():
    space = FockSpace(2, Fraction(1, 3), 3)
    assert evaluate_identity("qmut[b(1), bd(2)] == 0", FockSpace(4, 0.5, 2)).status == PASS
    assert evaluate_identity("comm[J0, bd(1)] == 1*bd(1)", space).status == PASS


def test_false_identity_fails():
    rec = evaluate_identity("comm[Jp, Jm] == J0", FockSpace(2, 0.5, 3))
    assert rec.status == FAIL and rec.residual > 0 and "sector" in rec.detail


def test_truncation_overflow_is_reported():
    rec = evaluate_identity("bd(1)*bd(1)*bd(1) == bd(1)*bd(1)*bd(1)", FockSpace(2, 0.5, 2))
    assert rec.status == ERROR and "truncation" in rec.detail


def test_sectors_that_overflow_are_skipped():
    rec = evaluate_identity("qmut[b(1), bd(1)] == 1", FockSpace(2, 0.5, 3))
    assert rec.status == PASS and rec.params["sectors"] == [0, 1, 2]


def test_evaluate_operator_blocks():
    space = FockSpace(2, Fraction(1, 2), 2)
    blocks = evaluate_operator(parse_operator("bd(1)*b(1)"), space, 1)
    assert list(blocks) == [1]


# -- round trip ---------------------------------------------------------------

modes = st.sampled_from([-2, 0, 2, -1, 1, 3])
leaves = st.one_of(
    st.fractions(min_value=0, max_value=10, max_denominator=8).map(Scalar),
    st.just(QSymbol()),
    modes.map(Creation),
    modes.map(Annihilation),
    st.tuples(modes, modes).map(lambda t: Transition(*t)),
    st.sampled_from(["J0", "Jp", "Jm"]).map(SU2),
)


def _extend(children):
    return st.one_of(
        st.tuples(children, children).map(lambda t: Comm(*t)),
        st.tuples(children, children).map(lambda t: QMut(*t)),
        st.lists(children, min_size=2, max_size=3).map(lambda xs: Product(tuple(xs))),
        st.lists(st.tuples(st.sampled_from([1, -1]), children), min_size=1, max_size=3)
        .filter(lambda ts: len(ts) > 1 or ts[0][0] == -1)
        .map(lambda ts: Sum(tuple(ts))),
    )


nodes = st.recursive(leaves, _extend, max_leaves=10)


@given(nodes, nodes)
def test_print_parse_round_trip(lhs, rhs):
    rel = Relation(lhs, rhs)
    text = to_text(rel)
    again = parse_expression(text)
    assert to_text(again) == text
    assert parse_expression(to_text(again)) == again


@given(nodes)
def test_parse_inverts_print(node):
    assert parse_operator(to_text(node)) == node
