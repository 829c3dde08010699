from __future__ import annotations

import pytest
import sympy

from qtorus.chord import ChordElement, ChordError, chord_classical, chord_commutative, chord_glue, chord_mul
from qtorus.syntax import parse
from qtorus.torus import TorusElement


def C(text):
    v = parse(text, names=("l", "m"))
    if isinstance(v, ChordElement):
        return v
    if not isinstance(v, TorusElement):
        v = TorusElement.scalar(v, 1, ("l", "m"))
    return ChordElement.from_torus(v)


def test_dual_acts_as_derivative():
    assert C("d12") * C("a12") == C("1 + a12*d12")
    assert C("d12^2") * C("a12^3") == C("6*a12 + 6*a12^2*d12 + a12^3*d12^2")


def test_different_names_commute():
    assert C("d12") * C("a21") == C("a21*d12")
    assert C("a12") * C("a21") == C("a21") * C("a12")


def test_torus_coefficients_commute_with_chords():
    assert C("d12*m") * C("l*a12") == C("q*l*m + q*l*m*a12*d12")


def test_truncation_of_products():
    x = C("d21")
    y = C("a21 + O(a^2)")
    prod = x * y
    assert prod.trunc == 1
    assert prod == C("1 + O(a)")
    # an exact left factor keeps the right truncation minus its dual degree
    assert (C("a12") * C("1 + O(a)")).trunc == 1
    assert (C("1 + O(a^3)") * C("a12")).trunc == 3


def test_terms_beyond_truncation_are_dropped():
    e = C("1 + a12 + a12*a21 + O(a^2)")
    assert e == C("1 + a12 + O(a^2)")
    assert str(e) == "1 + a12 + O(a^2)"


def test_glue_reweights_listed_contributions():
    e = C("(Q - m^2)*d12 + l + O(a)")
    target = C("l*d21")
    out = chord_glue(e, "d12", target, [(parse("-m^2"), parse("q^-1"))])
    assert out == C("l + (Q - q^-1*m^2)*l*d21 + O(a)")


def test_glue_rejects_nonlinear_source():
    with pytest.raises(ChordError):
        chord_glue(C("d12^2"), "d12", C("d21"))


def test_classical_image():
    e = C("Q*d12*d21 + (q - 1)*a12*l + m + O(a)")
    a12, a21, Q, m = sympy.symbols("a12 a21 Q m")
    assert chord_classical(e) == Q * a12 * a21 + m


def test_commutative_image_requires_no_duals():
    a12, a21, Q, m = sympy.symbols("a12 a21 Q m")
    assert chord_commutative(C("Q*a12*a21 + m")) == Q * a12 * a21 + m
    with pytest.raises(ChordError):
        chord_commutative(C("d12"))


def test_component_mismatch():
    x = ChordElement.generator("a12", 1)
    y = ChordElement.generator("a12", 2)
    with pytest.raises(Exception):
        chord_mul(x, y)
