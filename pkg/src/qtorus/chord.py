"""Chord operator algebra: torus coefficients times words in a_ij and d_ij.

A term is ``t * a12^i a21^j * d12^k d21^l`` with ``t`` a torus element.
Chords of degree 0 are even: a's commute with each other, with the torus
and with duals of the other name; the only nontrivial relation is
``d_x a_x = a_x d_x + 1``.

``trunc`` records how far an element is known: ``trunc = N`` means the
element is correct modulo terms of total a-degree >= N. ``None`` means
exact.
"""

from __future__ import annotations

from math import comb, factorial, perm
from typing import Iterable, Mapping

from qtorus.scalars import ONE, Scalar, as_scalar
from qtorus.torus import TorusElement, TorusError

CHORDS = ("a12", "a21")
DUALS = ("d12", "d21")
_EMPTY = (0, 0)


class ChordError(ValueError):
    pass


def _min_trunc(a: int | None, b: int | None) -> int | None:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


def _word(names: tuple, counts: tuple) -> list[str]:
    out = []
    for n, c in zip(names, counts):
        if c == 1:
            out.append(n)
        elif c > 1:
            out.append(f"{n}^{c}")
    return out


class ChordElement:
    """Sum of ``torus * a-word * d-word`` with a truncation order."""

    __slots__ = ("ncomp", "names", "terms", "trunc")

    def __init__(
        self,
        ncomp: int,
        terms: Mapping[tuple, TorusElement] | None = None,
        trunc: int | None = None,
        names: Iterable[str] | None = None,
    ):
        if trunc is not None and trunc < 0:
            raise ChordError("truncation order must be non-negative")
        self.ncomp = ncomp
        self.trunc = trunc
        self.names = tuple(names) if names is not None else TorusElement.zero(ncomp).names
        self.terms = {}
        for (aw, dw), t in (terms or {}).items():
            if t.ncomp != ncomp:
                raise TorusError("component-count mismatch in chord coefficient")
            if trunc is not None and sum(aw) >= trunc:
                continue
            if not t.is_zero():
                self.terms[(tuple(aw), tuple(dw))] = t.with_names(self.names)

    @classmethod
    def _raw(cls, ncomp, terms, trunc, names) -> "ChordElement":
        obj = cls.__new__(cls)
        obj.ncomp = ncomp
        obj.terms = terms
        obj.trunc = trunc
        obj.names = names
        return obj

    @classmethod
    def from_torus(cls, t: TorusElement, trunc: int | None = None) -> "ChordElement":
        return cls(t.ncomp, {(_EMPTY, _EMPTY): t}, trunc, t.names)

    @classmethod
    def generator(cls, name: str, ncomp: int = 1, names=None) -> "ChordElement":
        one = TorusElement.scalar(ONE, ncomp, names)
        if name in CHORDS:
            aw = tuple(1 if n == name else 0 for n in CHORDS)
            return cls(ncomp, {(aw, _EMPTY): one}, None, one.names)
        if name in DUALS:
            dw = tuple(1 if n == name else 0 for n in DUALS)
            return cls(ncomp, {(_EMPTY, dw): one}, None, one.names)
        raise ChordError(f"unknown chord generator {name!r}")

    @classmethod
    def truncation(cls, order: int, ncomp: int = 1, names=None) -> "ChordElement":
        """The bare ``O(a^order)`` marker: zero known up to that order."""
        return cls(ncomp, {}, order, names)

    # inspection --------------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def max_dual_degree(self) -> int:
        return max((sum(dw) for _, dw in self.terms), default=0)

    def max_chord_degree(self) -> int:
        return max((sum(aw) for aw, _ in self.terms), default=0)

    def torus_part(self) -> TorusElement:
        """The coefficient of the empty word."""
        return self.terms.get((_EMPTY, _EMPTY), TorusElement.zero(self.ncomp, self.names))

    def coefficient(self, aw=_EMPTY, dw=_EMPTY) -> TorusElement:
        return self.terms.get((tuple(aw), tuple(dw)), TorusElement.zero(self.ncomp, self.names))

    def is_torus(self) -> bool:
        return all(k == (_EMPTY, _EMPTY) for k in self.terms)

    # arithmetic ---------------------------------------------------------------------
    def _lift(self, other) -> "ChordElement":
        if isinstance(other, ChordElement):
            if other.ncomp != self.ncomp:
                raise TorusError(f"component-count mismatch: {self.ncomp} vs {other.ncomp}")
            return other
        if isinstance(other, TorusElement):
            return ChordElement.from_torus(other)
        s = as_scalar(other)
        if s is NotImplemented:
            return NotImplemented
        return ChordElement.from_torus(TorusElement.scalar(s, self.ncomp, self.names))

    def __add__(self, other) -> "ChordElement":
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        trunc = _min_trunc(self.trunc, other.trunc)
        out = {}
        for src in (self.terms, other.terms):
            for k, t in src.items():
                if trunc is not None and sum(k[0]) >= trunc:
                    continue
                cur = out.get(k)
                v = t if cur is None else cur + t
                if v.is_zero():
                    out.pop(k, None)
                else:
                    out[k] = v
        return ChordElement._raw(self.ncomp, out, trunc, self.names)

    __radd__ = __add__

    def __neg__(self) -> "ChordElement":
        return ChordElement._raw(self.ncomp, {k: -t for k, t in self.terms.items()}, self.trunc, self.names)

    def __sub__(self, other) -> "ChordElement":
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "ChordElement":
        return (-self) + other

    def __mul__(self, other) -> "ChordElement":
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return chord_mul(self, other)

    def __rmul__(self, other) -> "ChordElement":
        other = self._lift(other)
        if other is NotImplemented:
            return NotImplemented
        return chord_mul(other, self)

    def __pow__(self, n: int) -> "ChordElement":
        if n < 0:
            raise ChordError("negative powers of chord elements are undefined")
        out = ChordElement.from_torus(TorusElement.scalar(ONE, self.ncomp, self.names))
        for _ in range(n):
            out = out * self
        return out

    def truncate(self, order: int | None) -> "ChordElement":
        """Forget everything at a-degree >= order (order only decreases)."""
        trunc = _min_trunc(self.trunc, order)
        return ChordElement(self.ncomp, self.terms, trunc, self.names)

    def map_torus(self, fn) -> "ChordElement":
        out = {}
        for k, t in self.terms.items():
            v = fn(t)
            if not v.is_zero():
                out[k] = v
        return ChordElement._raw(self.ncomp, out, self.trunc, self.names)

    def __eq__(self, other) -> bool:
        if isinstance(other, ChordElement):
            return self.ncomp == other.ncomp and self.trunc == other.trunc and self.terms == other.terms
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.ncomp, self.trunc, frozenset(self.terms.items())))

    def equal_mod_trunc(self, other: "ChordElement") -> bool:
        """Equality modulo the coarser of the two truncation orders."""
        return (self - self._lift(other)).is_zero()

    def __str__(self) -> str:
        return format_chord(self)

    def __repr__(self) -> str:
        return f"ChordElement({self})"


def format_chord(e: ChordElement) -> str:
    pieces = []
    keys = sorted(e.terms, key=lambda k: (sum(k[0]), k[0], sum(k[1]), k[1]))
    for k in keys:
        t = e.terms[k]
        word = _word(CHORDS, k[0]) + _word(DUALS, k[1])
        if not word:
            s = str(t)
            neg = s.startswith("-")
            body = s[1:] if neg else s
            if len(t.terms) > 1 and pieces:
                neg, body = False, f"({s})"
        elif len(t.terms) == 1:
            s = str(t)
            neg = s.startswith("-")
            s = s[1:] if neg else s
            body = " * ".join(([] if s == "1" else [s]) + word)
        else:
            neg, body = False, " * ".join([f"({t})"] + word)
        if not pieces:
            pieces.append(("-" if neg else "") + body)
        else:
            pieces.append((" - " if neg else " + ") + body)
    if e.trunc is not None:
        marker = "O(a)" if e.trunc == 1 else f"O(a^{e.trunc})"
        pieces.append(marker if not pieces else f" + {marker}")
    return "".join(pieces) if pieces else "0"


def _pair(b: int, c: int) -> list[tuple[int, int]]:
    """d^b a^c = sum_k weight * a^(c-k) d^(b-k); returns (k, weight)."""
    return [(k, comb(b, k) * perm(c, k)) for k in range(min(b, c) + 1)]


def chord_mul(x: ChordElement, y: ChordElement) -> ChordElement:
    if x.ncomp != y.ncomp:
        raise TorusError(f"component-count mismatch: {x.ncomp} vs {y.ncomp}")
    trunc = x.trunc
    if y.trunc is not None:
        trunc = _min_trunc(trunc, max(y.trunc - x.max_dual_degree(), 0))
    out: dict = {}
    for (a1, d1), t1 in x.terms.items():
        for (a2, d2), t2 in y.terms.items():
            t = t1 * t2
            if t.is_zero():
                continue
            for k0, w0 in _pair(d1[0], a2[0]):
                for k1, w1 in _pair(d1[1], a2[1]):
                    aw = (a1[0] + a2[0] - k0, a1[1] + a2[1] - k1)
                    if trunc is not None and aw[0] + aw[1] >= trunc:
                        continue
                    dw = (d1[0] - k0 + d2[0], d1[1] - k1 + d2[1])
                    v = t if w0 * w1 == 1 else t.scale(w0 * w1)
                    key = (aw, dw)
                    cur = out.get(key)
                    v = v if cur is None else cur + v
                    if v.is_zero():
                        out.pop(key, None)
                    else:
                        out[key] = v
    return ChordElement._raw(x.ncomp, out, trunc, x.names)


def chord_glue(
    e: ChordElement,
    source: str,
    target: ChordElement,
    twists: Iterable[tuple[TorusElement, Scalar]] = (),
) -> ChordElement:
    """Replace ``c * d_source`` by ``(c') * target``.

    ``target`` is a single term ``t * d_y``. The coefficient ``c`` of the
    bare ``d_source`` word is reweighted first: each listed contribution
    ``p`` with twist ``w`` is counted as ``w * p`` instead of ``p``, i.e.
    ``c' = c + sum (w - 1) * p``. Contributions are not checked for
    visibility in ``c``; a pattern may cancel against another term of the
    collected coefficient and still carry its own twist.
    """
    if source not in DUALS:
        raise ChordError(f"unknown dual {source!r}")
    j = DUALS.index(source)
    single = tuple(1 if i == j else 0 for i in range(2))
    if len(target.terms) != 1:
        raise ChordError("glue target must be a single term")
    ((taw, tdw), tcoef), = target.terms.items()
    if any(taw):
        raise ChordError("glue target must not contain chord generators")
    out = ChordElement._raw(e.ncomp, {}, e.trunc, e.names)
    moved = {}
    for (aw, dw), t in e.terms.items():
        if dw[j] >= 2:
            raise ChordError("glue requires linearity in the source dual")
        if dw == single:
            moved[aw] = t
        else:
            out = out + ChordElement._raw(e.ncomp, {(aw, dw): t}, e.trunc, e.names)
    twists = list(twists)
    for aw, c in moved.items():
        if not any(aw):
            for pattern, w in twists:
                c = c + pattern.scale(as_scalar(w) - 1)
        newdw = tdw
        term = ChordElement._raw(e.ncomp, {(aw, newdw): c * tcoef}, e.trunc, e.names)
        out = out + term
    return out


# --- commutative images ---------------------------------------------------------------


def scalar_to_sympy(s: Scalar):
    import sympy

    from qtorus.scalars import SCALE, VARS, unpack

    syms = [sympy.Symbol(n) for n in VARS]

    def lau(p):
        total = sympy.Integer(0)
        for k, c in p.terms.items():
            term = sympy.Rational(c.numerator, c.denominator) if hasattr(c, "denominator") else sympy.Integer(c)
            for sym, e, sc in zip(syms, unpack(k), SCALE):
                if e:
                    term *= sym ** sympy.Rational(e, sc)
            total += term
        return total

    return lau(s.num) / lau(s.den)


def torus_to_sympy(t: TorusElement, q_to_one: bool = True):
    """Commutative image; with ``q_to_one`` the torus is abelianized at q = 1."""
    import sympy

    gens = [sympy.Symbol(n) for n in t.names]
    total = sympy.Integer(0)
    for k, c in t.terms.items():
        term = scalar_to_sympy(c)
        if q_to_one:
            term = term.subs(sympy.Symbol("q"), 1)
        for g, e in zip(gens, k):
            if e:
                term *= g ** sympy.Rational(e, 2)
        total += term
    return sympy.expand(total)


def chord_classical(e: ChordElement):
    """q -> 1, drop a-dependent terms, and send each d_x to a commuting a_x."""
    import sympy

    chords = [sympy.Symbol(n) for n in CHORDS]
    total = sympy.Integer(0)
    for (aw, dw), t in e.terms.items():
        if any(aw):
            continue
        term = torus_to_sympy(t)
        for sym, n in zip(chords, dw):
            term *= sym ** n
        total += term
    return sympy.expand(total)


def chord_commutative(e: ChordElement):
    """Commutative image at q = 1 of an element with chord generators only."""
    import sympy

    if any(any(dw) for _, dw in e.terms):
        raise ChordError("element contains dual operators")
    chords = [sympy.Symbol(n) for n in CHORDS]
    total = sympy.Integer(0)
    for (aw, _), t in e.terms.items():
        term = torus_to_sympy(t)
        for sym, n in zip(chords, aw):
            term *= sym ** n
        total += term
    return sympy.expand(total)


def pairing_count(dw: tuple, aw: tuple) -> int:
    """Number of complete name-respecting matchings of duals to chords."""
    if tuple(dw) != tuple(aw):
        return 0
    out = 1
    for n in dw:
        out *= factorial(n)
    return out
