from __future__ import annotations

import re

import pytest
from hypothesis import given

from qtorus.chord import ChordElement
from qtorus.syntax import ParseError, infer_layout, parse, parse_commutative, to_text, tokenize
from qtorus.torus import TorusElement

from strategies import chord_elements, torus_elements


def test_mul_normalizes():
    assert to_text(parse("m * l")) == "q * l * m"


@pytest.mark.parametrize(
    "text, column, message",
    [
        ("l ^^ 2", 3, "malformed exponent"),
        ("l +", 4, "unexpected end of input"),
        ("foo", 1, "unknown name 'foo'"),
        ("(l", 3, "expected ')'"),
        ("1/(l+m)", 2, "division by a non-scalar"),
    ],
)
def test_errors_report_column(text, column, message):
    with pytest.raises(ParseError, match=re.escape(message)) as info:
        parse(text)
    assert info.value.column == column
    assert f"column {column}" in str(info.value)


def test_layout_inference():
    assert infer_layout({"l", "m"}) == (1, ("l", "m"))
    assert infer_layout({"l1", "m2"}) == (2, ("l1", "m1", "l2", "m2"))
    assert infer_layout({"l1"}) == (1, ("l1", "m1"))
    assert infer_layout({"M", "L"})[1] == ("M", "L")
    with pytest.raises(ValueError):
        infer_layout({"l", "l1"})


def test_fractional_and_negative_exponents():
    assert parse("l^(1/2)*l^(1/2)") == parse("l")
    assert parse("q^(-1/4)") * parse("q^(1/4)") == parse("1")


def test_big_o_and_chords():
    e = parse("d12*a12 + O(a^2)")
    assert isinstance(e, ChordElement)
    assert e.trunc == 2
    assert to_text(parse("O(a)")) == "O(a)"


def test_environment_bindings():
    a = parse("x^2")
    assert parse("a^2*q", env={"a": a}) == parse("x^4*q")


def test_commutative_parse():
    import sympy

    l, m = sympy.symbols("l m")
    assert parse_commutative("m*l - l*m") == 0
    with pytest.raises(ParseError, match="dual operators"):
        parse_commutative("d12")


def test_tokenizer_columns():
    toks = tokenize("q^(1/2) * l")
    assert [t.col for t in toks if t.value == "l"] == [11]


@given(torus_elements())
def test_torus_roundtrip(a):
    back = parse(to_text(a), names=a.names)
    if not isinstance(back, TorusElement):
        back = TorusElement.scalar(back, 1, a.names)
    assert back == a


@given(chord_elements())
def test_chord_roundtrip(e):
    back = parse(to_text(e), names=e.names)
    if not isinstance(back, ChordElement):
        if not isinstance(back, TorusElement):
            back = TorusElement.scalar(back, 1, e.names)
        back = ChordElement.from_torus(back)
    assert back == e
