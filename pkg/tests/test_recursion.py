from __future__ import annotations

import pytest

from qtorus.recursion import (
    OP_NAMES,
    RecursionError,
    SequenceTable,
    compare_after_substitution,
    forward_solve,
    forward_solve_basis,
    framing_transform,
    op_apply,
    sequence_rep,
    solved_window,
    twist,
)
from qtorus.syntax import parse, parse_scalar as S
from qtorus.torus import TorusElement

UNKNOT = "1 - l - m + Q*l*m"


def op(text):
    return parse(text, names=OP_NAMES)


def test_operator_action():
    f = SequenceTable([S("1"), S("2"), S("3")])
    assert op_apply(op("M"), f).values == (S("1"), S("2*q"), S("3*q^2"))
    assert op_apply(op("L"), f).values == (S("2"), S("3"))
    assert op_apply(op("L^-1"), f).values == (S("0"), S("1"), S("2"))


def test_window_too_small():
    with pytest.raises(RecursionError, match="window too small"):
        op_apply(op("L^3"), [S("1"), S("1")])


def test_sequence_rep():
    assert sequence_rep(parse("l")) == op("L^-1")
    assert sequence_rep(parse("m*l")) == op("M") * op("L^-1")
    with pytest.raises(RecursionError, match="negative l-exponent"):
        sequence_rep(parse("l^-1"))


def test_unknot_first_value():
    table = forward_solve(parse(UNKNOT), [1], 4)
    assert table[1] == S("(Q - 1)/(q - 1)")
    assert table[2] == S("(Q - 1)*(q*Q - 1)/((q - 1)*(q^2 - 1))")
    assert op_apply(parse(UNKNOT), table).is_zero()


def test_forward_solve_errors():
    with pytest.raises(RecursionError, match="zero operator"):
        forward_solve(op("0*L"), [1], 3)
    with pytest.raises(RecursionError, match="leading coefficient vanishes at n=1"):
        forward_solve(op("(M - q)*L - 1"), [1], 4)


def test_symbolic_initial_values_by_basis():
    P = op("L^2 - L - 1")
    b0, b1 = forward_solve_basis(P, 2, 6)
    assert [int(v.constant_value()) for v in b0.values] == [1, 0, 1, 1, 2, 3, 5]
    assert [int(v.constant_value()) for v in b1.values] == [0, 1, 1, 2, 3, 5, 8]
    assert solved_window(P, 2) == 0


def test_table_text_roundtrip():
    t = forward_solve(parse(UNKNOT), [1], 3)
    assert SequenceTable.from_text(t.to_text()) == t
    with pytest.raises(RecursionError):
        SequenceTable.from_text("0: 1\n2: 3\n")


def test_framing_transform_single_terms():
    # framing change by f': l^i -> q^(-f' i^2/2) m^(f' i) l^i
    assert framing_transform(parse("l"), 1) == parse("q^(-1/2)*m*l")
    assert framing_transform(parse("m^2"), 5) == parse("m^2")
    assert framing_transform(framing_transform(parse(UNKNOT), 2), -2) == parse(UNKNOT)


def test_twist_conjugation_on_unknot():
    P = parse(UNKNOT)
    f = forward_solve(P, [1], 6)
    for fp in (-2, -1, 1, 3):
        assert op_apply(framing_transform(P, fp), twist(f, fp)).is_zero()
        # the opposite sign does not annihilate
        assert not op_apply(framing_transform(P, fp), twist(f, -fp)).is_zero()


def test_compare_after_substitution():
    P = op("L - M")
    images = {0: parse("m"), 1: parse("l")}
    # l m = q^-1 m l, so q must go to q^-1 for the check to pass
    assert compare_after_substitution(P, images, parse("l - m")) is None
    images["q"] = S("q^-1")
    assert compare_after_substitution(P, images, parse("l - m")) == TorusElement.scalar(S("1"), 1, ("l", "m"))
