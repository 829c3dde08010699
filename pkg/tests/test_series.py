from __future__ import annotations

from fractions import Fraction

import pytest
import sympy
from hypothesis import given
from hypothesis import strategies as st

from qtorus import pipelines as pl
from qtorus.recursion import forward_solve
from qtorus.scalars import ONE, Scalar
from qtorus.series import (
    BranchFunction,
    MultiSeries,
    SeriesError,
    WKBError,
    annulus_both_ways,
    annulus_string_side,
    g_expansion,
    log_wave_coefficients,
    polynomial,
    sft_chain_factor,
    unknot_branch,
    wkb_solve,
    wkb_vs_recursion,
)
from qtorus.syntax import parse

from strategies import rational_scalars


def _series(draw_terms, order=4):
    return MultiSeries(2, order, 1, draw_terms)


small_series = st.dictionaries(
    st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 1)),
    rational_scalars(),
    max_size=5,
).map(_series)


@given(small_series, small_series, small_series)
def test_ring_axioms(a, b, c):
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a * b == b * a


@given(small_series)
def test_log_exp_inverse(a):
    a = a - MultiSeries.constant(a.constant_term(), 2, 4, 1)
    assert a.exp().log() == a
    one = MultiSeries.constant(ONE, 2, 4, 1)
    assert (one + a).log().exp() == one + a


@given(small_series)
def test_inverse_and_derivations(a):
    one = MultiSeries.constant(ONE, 2, 4, 1)
    b = one + a - MultiSeries.constant(a.constant_term(), 2, 4, 1)
    assert (b * b.inverse()) == one
    assert a.d(0).d(1) == a.d(1).d(0)


def test_derivative_is_euler_operator():
    s = polynomial(1, 5, 0, {(3,): 2})
    assert s.d(0) == polynomial(1, 5, 0, {(3,): 6})
    assert s.d(0).integrate(0) == s
    with pytest.raises(SeriesError):
        polynomial(1, 5, 0, {(0,): 1}).integrate(0)


def test_series_errors():
    with pytest.raises(SeriesError, match="entries"):
        MultiSeries(2, 3, 0, {(1, 0): 1})
    with pytest.raises(SeriesError, match="negative"):
        MultiSeries(1, 3, 0, {(-1, 0): 1})
    with pytest.raises(SeriesError, match="not invertible"):
        MultiSeries.variable(0, 1, 3).inverse()
    with pytest.raises(SeriesError, match="log"):
        MultiSeries.variable(0, 1, 3).log()
    with pytest.raises(SeriesError, match="denominator"):
        BranchFunction({(0,): 1}, {(1,): 1})
    with pytest.raises(SeriesError, match="at least 2"):
        annulus_both_ways(1)


def test_to_text_format():
    s = polynomial(2, 3, 0, {(1, 0): parse("Q"), (0, 2): 3})
    assert s.to_text() == "(0,2,0): 3\n(1,0,0): Q\n"


def test_unknot_branch_expansion():
    b = unknot_branch().expand(4)
    # (1 - u)/(1 - Q u) = 1 + (Q - 1)(u + Q u^2 + Q^2 u^3 + ...)
    for n in range(1, 5):
        assert b.coefficient((n, 0)) == parse(f"(Q - 1)*Q^{n - 1}")


def _sympy_annulus(order: int) -> dict:
    u1, u2, Q = sympy.symbols("u1 u2 Q")
    f = sympy.log(1 - u1 - u2 + Q * u1 * u2)
    amp = u1 * u2 * sympy.diff(f, u1, u2)
    t = sympy.Symbol("t")
    ser = sympy.series(amp.subs({u1: t * u1, u2: t * u2}), t, 0, order + 1).removeO()
    poly = sympy.Poly(sympy.expand(ser.subs(t, 1)), u1, u2)
    return {m: sympy.factor(c) for m, c in zip(poly.monoms(), poly.coeffs())}


def _to_sympy(c: Scalar):
    return sympy.sympify(str(c).replace("^", "**"), locals={"Q": sympy.Symbol("Q")})


@pytest.mark.parametrize("order", [2, 3, 5, 7, 10])
def test_annulus_both_sides(order):
    res = annulus_both_ways(order)
    assert res.equal and res.first_difference() is None
    if order <= 5:
        want = _sympy_annulus(order)
        got = res.string_side
        for (i, j), c in want.items():
            assert sympy.expand(_to_sympy(got.coefficient((i, j, 0))) - c) == 0
        assert len(got.terms) == len(want)


def test_annulus_order_is_inclusive():
    s = annulus_string_side(4)
    assert max(sum(k[:-1]) for k in s.terms) == 4


def test_sft_chain_factor():
    ratio, ok = sft_chain_factor()
    assert ratio == -1
    assert ok


def test_g_expansion():
    assert g_expansion(parse("q - 1"), 3) == (1, [ONE, Scalar(Fraction(1, 2)), Scalar(Fraction(1, 6))])
    v, c = g_expansion(parse("(q - 1)^-1"), 3)
    assert v == -1 and c == [ONE, Scalar(Fraction(-1, 2)), Scalar(Fraction(1, 12))]
    v, c = g_expansion(parse("q^(1/2)*Q"), 2)
    assert v == 0 and c == [parse("Q"), parse("Q/2")]


def test_log_wave_coefficients():
    L = log_wave_coefficients([ONE, Scalar(2), Scalar(3)])
    # log(1 + 2u + 3u^2) = 2u + (3 - 2) u^2
    assert L[1] == Scalar(2) and L[2] == Scalar(1)


def test_unknot_wkb_and_cross_check():
    U = pl.load_relations("unknot.rel")["U"]
    res = wkb_solve(U, unknot_branch(), 5, 2)
    assert res.ok
    table = forward_solve(U, [1], 5)
    assert wkb_vs_recursion(res, table.values).agree
    bad = list(table.values)
    bad[3] = bad[3] + ONE
    check = wkb_vs_recursion(res, bad)
    assert not check.agree and check.mismatches[0][0] == 3


def test_wkb_rejects_bad_input():
    one = BranchFunction({(0,): 1}, {(0,): 1})
    with pytest.raises(WKBError, match="degenerate"):
        wkb_solve(parse("1 - 2*m + m^2"), one, 3, 1)
    with pytest.raises(WKBError, match="classical branch"):
        wkb_solve(parse("1 - l - m + Q*l*m"), one, 3, 1)
    with pytest.raises(WKBError, match="x_order"):
        wkb_solve(parse("1 - m"), one, 0, 1)
    assert wkb_solve(parse("1 - m"), one, 3, 1).ok
