"""Hypothesis strategies shared by the property tests."""

from __future__ import annotations

from fractions import Fraction

from hypothesis import strategies as st

from qtorus.chord import ChordElement
from qtorus.scalars import Scalar, pack
from qtorus.torus import TorusElement

small_int = st.integers(min_value=-3, max_value=3)
nonzero_int = small_int.filter(bool)


@st.composite
def laurent_scalars(draw, max_terms: int = 3, quarter: bool = True):
    """Laurent polynomials in q (quarter steps when ``quarter``) and Q."""
    n = draw(st.integers(min_value=0, max_value=max_terms))
    out = Scalar(0)
    for _ in range(n):
        qe = draw(st.integers(min_value=-8, max_value=8)) if quarter else 4 * draw(small_int)
        Qe = 2 * draw(st.integers(min_value=-2, max_value=2))
        c = Fraction(draw(nonzero_int), draw(st.integers(min_value=1, max_value=3)))
        out = out + Scalar.monomial(pack((qe, Qe, 0, 0)), c)
    return out


@st.composite
def rational_scalars(draw):
    num = draw(laurent_scalars())
    den = draw(laurent_scalars(max_terms=2).filter(lambda s: not s.is_zero()))
    return num / den


@st.composite
def torus_elements(draw, ncomp: int = 1, max_terms: int = 3, half: bool = True, lo: int = -2, hi: int = 2,
                   names=None, integral_scalars: bool = False):
    n = draw(st.integers(min_value=0, max_value=max_terms))
    step = 1 if half else 2
    exps = st.integers(min_value=lo * 2 // step, max_value=hi * 2 // step).map(lambda e: e * step)
    terms = {}
    for _ in range(n):
        k = tuple(draw(exps) for _ in range(2 * ncomp))
        terms[k] = draw(laurent_scalars(quarter=not integral_scalars).filter(lambda s: not s.is_zero()))
    return TorusElement(ncomp, terms, names)


@st.composite
def sequence_operators(draw, max_terms: int = 3):
    """Elements in l, m with l-exponents in 0..2 and integer m-exponents."""
    n = draw(st.integers(min_value=1, max_value=max_terms))
    terms = {}
    for _ in range(n):
        k = (2 * draw(st.integers(min_value=0, max_value=2)), 2 * draw(small_int))
        terms[k] = draw(laurent_scalars(quarter=False).filter(lambda s: not s.is_zero()))
    return TorusElement(1, terms, ("l", "m"))


@st.composite
def chord_elements(draw, max_terms: int = 3, max_deg: int = 2, scalar_coefficients: bool = False):
    n = draw(st.integers(min_value=0, max_value=max_terms))
    deg = st.integers(min_value=0, max_value=max_deg)
    terms = {}
    for _ in range(n):
        key = ((draw(deg), draw(deg)), (draw(deg), draw(deg)))
        if scalar_coefficients:
            t = TorusElement.scalar(draw(laurent_scalars(max_terms=2).filter(lambda s: not s.is_zero())))
        else:
            t = draw(torus_elements(max_terms=2).filter(lambda t: not t.is_zero()))
        terms[key] = t
    return ChordElement(1, terms, None, ("l", "m"))
