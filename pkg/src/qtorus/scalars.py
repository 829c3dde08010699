"""Exact coefficient field: rational functions in q, Q, x, gamma.

Exponents are stored as scaled integers: q in quarter powers, the other
variables in half powers. A monomial is packed into a single Python int
(one 64-bit biased field per variable, q most significant), so monomial
multiplication is integer addition and the natural int order on keys is
a fixed lexicographic monomial order.

``Laurent`` is a sparse Laurent polynomial with ``int``/``Fraction``
coefficients; ``Scalar`` is a reduced fraction of two of them.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Iterable, Mapping

from qtorus._kernels import poly_add, poly_mul

VARS = ("q", "Q", "x", "gamma")
SCALE = (4, 2, 2, 2)
_IDX = {name: i for i, name in enumerate(VARS)}

_W = 64
_FIELD_BIAS = 1 << 62
_MASK = (1 << _W) - 1
# field i holds VARS[3 - i]; q sits in the top field
BIAS = sum(_FIELD_BIAS << (_W * i) for i in range(4))
ONE_KEY = BIAS


class ScalarError(ArithmeticError):
    pass


def pack(exps: Iterable[int]) -> int:
    """Pack scaled exponents ``(q4, Q2, x2, gamma2)`` into a key."""
    key = 0
    for i, e in enumerate(reversed(tuple(exps))):
        key |= (int(e) + _FIELD_BIAS) << (_W * i)
    return key


def unpack(key: int) -> tuple[int, int, int, int]:
    return tuple(((key >> (_W * i)) & _MASK) - _FIELD_BIAS for i in (3, 2, 1, 0))


def var_key(name: str, scaled_exp: int = None) -> int:
    """Key of a single variable; ``scaled_exp`` defaults to exponent 1."""
    i = _IDX[name]
    e = [0, 0, 0, 0]
    e[i] = SCALE[i] if scaled_exp is None else scaled_exp
    return pack(e)


def _norm_coeff(c):
    if isinstance(c, Fraction) and c.denominator == 1:
        return int(c.numerator)
    return c


def _fmt_exp(scaled: int, scale: int) -> str:
    v = Fraction(scaled, scale)
    if v.denominator == 1:
        return str(v.numerator)
    return f"({v.numerator}/{v.denominator})"


def format_monomial(key: int) -> list[str]:
    parts = []
    for name, e, s in zip(VARS, unpack(key), SCALE):
        if e == 0:
            continue
        parts.append(name if e == s else f"{name}^{_fmt_exp(e, s)}")
    return parts


def _fmt_rational(c) -> str:
    c = Fraction(c)
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


class Laurent:
    """Sparse Laurent polynomial in q^(1/4), Q^(1/2), x^(1/2), gamma^(1/2)."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[int, object] | None = None):
        self.terms = {} if terms is None else {k: _norm_coeff(c) for k, c in terms.items() if c}
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> "Laurent":
        obj = cls.__new__(cls)
        obj.terms = terms
        obj._hash = None
        return obj

    @classmethod
    def const(cls, c) -> "Laurent":
        return cls._raw({ONE_KEY: _norm_coeff(c)} if c else {})

    @classmethod
    def monomial(cls, key: int, c=1) -> "Laurent":
        return cls._raw({key: _norm_coeff(c)} if c else {})

    def is_zero(self) -> bool:
        return not self.terms

    def is_one(self) -> bool:
        return len(self.terms) == 1 and self.terms.get(ONE_KEY) == 1

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def __add__(self, other: "Laurent") -> "Laurent":
        return Laurent._raw(poly_add(self.terms, other.terms, 1))

    def __sub__(self, other: "Laurent") -> "Laurent":
        return Laurent._raw(poly_add(self.terms, other.terms, -1))

    def __neg__(self) -> "Laurent":
        return Laurent._raw({k: -c for k, c in self.terms.items()})

    def __mul__(self, other: "Laurent") -> "Laurent":
        return Laurent._raw(poly_mul(self.terms, other.terms, BIAS))

    def scale(self, c) -> "Laurent":
        if not c:
            return Laurent()
        return Laurent._raw({k: _norm_coeff(v * c) for k, v in self.terms.items()})

    def shift(self, key: int) -> "Laurent":
        """Multiply by the monomial ``key``."""
        d = key - BIAS
        return Laurent._raw({k + d: c for k, c in self.terms.items()})

    def __pow__(self, n: int) -> "Laurent":
        if n < 0:
            if not self.is_monomial():
                raise ScalarError("negative power of a non-monomial Laurent polynomial")
            (k, c), = self.terms.items()
            return Laurent.monomial(pack([x * n for x in unpack(k)]), Fraction(1) / Fraction(c) ** (-n))
        out = Laurent.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, Laurent):
            return self.terms == other.terms
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def leading(self) -> tuple[int, object]:
        k = max(self.terms)
        return k, self.terms[k]

    def min_exponents(self) -> tuple[int, ...]:
        exps = [unpack(k) for k in self.terms]
        return tuple(min(col) for col in zip(*exps))

    def evaluate(self, values: Mapping[str, Fraction]) -> Fraction:
        total = Fraction(0)
        for k, c in self.terms.items():
            total += c * _eval_monomial(k, values)
        return total

    def __str__(self) -> str:
        return format_laurent(self)

    __repr__ = __str__


def format_laurent(p: Laurent) -> str:
    if p.is_zero():
        return "0"
    out = []
    for i, k in enumerate(sorted(p.terms, reverse=True)):
        c = Fraction(p.terms[k])
        neg = c < 0
        mag = -c if neg else c
        factors = format_monomial(k)
        if mag != 1 or not factors:
            factors = [_fmt_rational(mag)] + factors
        body = " * ".join(factors)
        if i == 0:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


def _root_of(value: Fraction, n: int) -> Fraction:
    """Exact n-th root of a rational, or raise."""
    if n == 1:
        return value
    if value < 0 and n % 2 == 0:
        raise ScalarError(f"no real {n}-th root of {value}")
    value = Fraction(value)
    sign = -1 if value < 0 else 1
    num, den = abs(value.numerator), value.denominator
    rn, rd = _iroot(num, n), _iroot(den, n)
    if rn ** n != num or rd ** n != den:
        raise ScalarError(f"{value} has no rational {n}-th root")
    return sign * Fraction(rn, rd)


def _iroot(v: int, n: int) -> int:
    from sympy import integer_nthroot

    return int(integer_nthroot(v, n)[0])


def _eval_monomial(key: int, values: Mapping[str, Fraction]) -> Fraction:
    out = Fraction(1)
    for name, e, s in zip(VARS, unpack(key), SCALE):
        if e == 0:
            continue
        out *= _power_of(name, Fraction(e, s), values)
    return out


def _power_of(name: str, exp: Fraction, values: Mapping[str, Fraction]) -> Fraction:
    # accept either the variable itself or one of its roots
    for root in (1, 2, 4):
        key = name if root == 1 else f"{name}^(1/{root})"
        if key in values and (exp * root).denominator == 1:
            base = Fraction(values[key])
            k = int(exp * root)
            if base == 0 and k < 0:
                raise ScalarError("pole at evaluation point")
            return base ** k
    if name in values:
        base = Fraction(values[name])
        root = _root_of(base, exp.denominator)
        k = exp.numerator
        if root == 0 and k < 0:
            raise ScalarError("pole at evaluation point")
        return root ** k
    raise ScalarError(f"missing assignment for {name}")


# --- gcd via sympy's sparse polynomial rings ------------------------------

_RING = None


def _ring():
    global _RING
    if _RING is None:
        from sympy import QQ
        from sympy.polys.rings import ring

        _RING = ring("q4,Q2,x2,g2", QQ)[0]
    return _RING


def _to_ring(p: Laurent, shift: tuple[int, ...]):
    R = _ring()
    QQ = R.domain
    d = {}
    for k, c in p.terms.items():
        e = tuple(a - b for a, b in zip(unpack(k), shift))
        c = Fraction(c)
        d[e] = QQ(c.numerator, c.denominator)
    return R(d)


def _from_ring(f) -> Laurent:
    terms = {}
    for e, c in f.items():
        terms[pack(e)] = Fraction(int(c.numerator), int(c.denominator))
    return Laurent(terms)


def laurent_gcd_cofactors(a: Laurent, b: Laurent) -> tuple[Laurent, Laurent, Laurent]:
    """gcd of two Laurent polynomials (up to units) with both cofactors."""
    sa, sb = a.min_exponents(), b.min_exponents()
    fa, fb = _to_ring(a, sa), _to_ring(b, sb)
    g, ca, cb = fa.cofactors(fb)
    return _from_ring(g), _from_ring(ca).shift(pack(sa)), _from_ring(cb).shift(pack(sb))


# --- the field ---------------------------------------------------------------

_LONE = Laurent.const(1)


class Scalar:
    """Reduced fraction ``num/den`` of Laurent polynomials.

    Canonical form: ``den`` is a polynomial with no monomial factor, its
    leading coefficient (largest key) is 1, and it is coprime to ``num``.
    A monomial denominator is folded into ``num``, so Laurent scalars have
    ``den == 1``.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Laurent | int | Fraction = 0, den: Laurent | int | Fraction | None = None):
        if not isinstance(num, Laurent):
            num = Laurent.const(num)
        if den is None:
            den = _LONE
        elif not isinstance(den, Laurent):
            den = Laurent.const(den)
        n, d = _normalize(num, den)
        self.num = n
        self.den = d
        self._hash = None

    @classmethod
    def _raw(cls, num: Laurent, den: Laurent) -> "Scalar":
        obj = cls.__new__(cls)
        obj.num = num
        obj.den = den
        obj._hash = None
        return obj

    @classmethod
    def from_laurent(cls, p: Laurent) -> "Scalar":
        return cls._raw(p, _LONE)

    @classmethod
    def monomial(cls, key: int, c=1) -> "Scalar":
        return cls._raw(Laurent.monomial(key, c), _LONE)

    @classmethod
    def var(cls, name: str, exp: Fraction | int = 1) -> "Scalar":
        i = _IDX[name]
        scaled = Fraction(exp) * SCALE[i]
        if scaled.denominator != 1:
            raise ScalarError(f"exponent {exp} of {name} is off the 1/{SCALE[i]} lattice")
        return cls.monomial(var_key(name, int(scaled)))

    # predicates --------------------------------------------------------------
    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.num.is_one() and self.den.is_one()

    def is_laurent(self) -> bool:
        return self.den.is_one()

    def is_monomial(self) -> bool:
        return self.den.is_one() and self.num.is_monomial()

    def is_constant(self) -> bool:
        return self.den.is_one() and (self.num.is_zero() or set(self.num.terms) == {ONE_KEY})

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ScalarError(f"{self} is not a rational constant")
        return Fraction(self.num.terms.get(ONE_KEY, 0))

    # arithmetic --------------------------------------------------------------
    def __add__(self, other) -> "Scalar":
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        if self.den.is_one() and other.den.is_one():
            return Scalar._raw(self.num + other.num, _LONE)
        if self.den == other.den:
            return Scalar(self.num + other.num, self.den)
        return Scalar(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "Scalar":
        return Scalar._raw(-self.num, self.den)

    def __sub__(self, other) -> "Scalar":
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Scalar":
        return as_scalar(other) - self

    def __mul__(self, other) -> "Scalar":
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        if self.den.is_one() and other.den.is_one():
            return Scalar._raw(self.num * other.num, _LONE)
        return Scalar(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def inverse(self) -> "Scalar":
        if self.is_zero():
            raise ZeroDivisionError("division by zero")
        return Scalar(self.den, self.num)

    def __truediv__(self, other) -> "Scalar":
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        if other.is_zero():
            raise ZeroDivisionError(f"division by zero: ({self}) / 0")
        return self * other.inverse()

    def __rtruediv__(self, other) -> "Scalar":
        return as_scalar(other) / self

    def __pow__(self, n) -> "Scalar":
        n = Fraction(n)
        if n.denominator != 1:
            return self.monomial_power(n)
        n = int(n)
        if n < 0:
            return self.inverse() ** (-n)
        if self.den.is_one():
            if self.num.is_monomial():
                return self.monomial_power(Fraction(n))
            return Scalar._raw(self.num ** n, _LONE)
        return Scalar._raw(self.num ** n, self.den ** n)

    def monomial_power(self, r: Fraction) -> "Scalar":
        """``(c*m)^r`` for a monomial scalar; rational r allowed when exact."""
        if self.is_zero():
            if r <= 0:
                raise ZeroDivisionError("division by zero")
            return self
        if not self.is_monomial():
            raise ScalarError(f"fractional power of non-monomial {self}")
        (k, c), = self.num.terms.items()
        r = Fraction(r)
        exps = []
        for e in unpack(k):
            v = e * r
            if v.denominator != 1:
                raise ScalarError(f"power {r} of {self} leaves the exponent lattice")
            exps.append(int(v))
        c = Fraction(c)
        cr = _root_of(c, r.denominator) ** r.numerator
        return Scalar.monomial(pack(exps), cr)

    # comparison ---------------------------------------------------------------
    def __eq__(self, other) -> bool:
        other = as_scalar(other)
        if other is NotImplemented:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def __bool__(self) -> bool:
        return not self.is_zero()

    # evaluation and substitution ---------------------------------------------------
    def evaluate(self, values: Mapping[str, Fraction]) -> Fraction:
        """Exact value at a rational point.

        Keys are variable names, or roots such as ``"q^(1/4)"`` when the
        scalar contains fractional powers.
        """
        d = self.den.evaluate(values)
        if d == 0:
            raise ScalarError("pole at evaluation point")
        return self.num.evaluate(values) / d

    def substitute(self, images: Mapping[str, "Scalar"]) -> "Scalar":
        """Replace variables by monomial scalars (``c * monomial``)."""
        if not images:
            return self
        return _subst_laurent(self.num, images) / _subst_laurent(self.den, images)

    def variables(self) -> set[str]:
        out = set()
        for p in (self.num, self.den):
            for k in p.terms:
                for name, e in zip(VARS, unpack(k)):
                    if e:
                        out.add(name)
        return out

    def __str__(self) -> str:
        if self.den.is_one():
            return format_laurent(self.num)
        n = format_laurent(self.num)
        d = format_laurent(self.den)
        if len(self.num.terms) > 1:
            n = f"({n})"
        if len(self.den.terms) > 1:
            d = f"({d})"
        return f"{n}/{d}"

    def __repr__(self) -> str:
        return f"Scalar({self})"


ZERO = Scalar._raw(Laurent(), _LONE)
ONE = Scalar._raw(_LONE, _LONE)


def as_scalar(v):
    if isinstance(v, Scalar):
        return v
    if isinstance(v, (int, Fraction)):
        return Scalar._raw(Laurent.const(v), _LONE)
    if isinstance(v, Laurent):
        return Scalar._raw(v, _LONE)
    return NotImplemented


def q_power(scaled_q4: int) -> Scalar:
    """``q^(scaled_q4/4)``."""
    return Scalar.monomial(pack((scaled_q4, 0, 0, 0)))


def _normalize(num: Laurent, den: Laurent) -> tuple[Laurent, Laurent]:
    if den.is_zero():
        raise ZeroDivisionError("division by zero")
    if num.is_zero():
        return Laurent(), _LONE
    if den.is_monomial():
        (k, c), = den.terms.items()
        inv = pack([-e for e in unpack(k)])
        return num.shift(inv).scale(Fraction(1) / Fraction(c)), _LONE
    # strip monomial content of den into num
    dmin = den.min_exponents()
    if any(dmin):
        inv = pack([-e for e in dmin])
        den = den.shift(inv)
        num = num.shift(inv)
    g, num_c, den_c = laurent_gcd_cofactors(num, den)
    if not g.is_monomial():
        num, den = num_c, den_c
        dmin = den.min_exponents()
        if any(dmin):
            inv = pack([-e for e in dmin])
            den = den.shift(inv)
            num = num.shift(inv)
    if den.is_monomial():
        return _normalize(num, den)
    _, lc = den.leading()
    if lc != 1:
        inv = Fraction(1) / Fraction(lc)
        num, den = num.scale(inv), den.scale(inv)
    return num, den


def _subst_laurent(p: Laurent, images: Mapping[str, Scalar]) -> Scalar:
    if all(img.is_monomial() for img in images.values()):
        return Scalar.from_laurent(_subst_laurent_monomial(p, images))
    total = ZERO
    for k, c in p.terms.items():
        term = Scalar(c)
        for name, e, s in zip(VARS, unpack(k), SCALE):
            if e == 0:
                continue
            if name in images:
                term = term * _int_power(images[name], Fraction(e, s))
            else:
                term = term * Scalar.monomial(var_key(name, e))
        total = total + term
    return total


def _subst_laurent_monomial(p: Laurent, images: Mapping[str, Scalar]) -> Laurent:
    imgs = []
    for name in VARS:
        img = images.get(name)
        if img is None:
            imgs.append(None)
        else:
            (k, c), = img.num.terms.items()
            imgs.append((Fraction(c), unpack(k)))
    out: dict = {}
    for k, c in p.terms.items():
        coeff = Fraction(c)
        exps = [0, 0, 0, 0]
        for i, (e, s) in enumerate(zip(unpack(k), SCALE)):
            if e == 0:
                continue
            if imgs[i] is None:
                exps[i] += e
                continue
            r = Fraction(e, s)
            ic, ie = imgs[i]
            if ic != 1:
                coeff *= _root_of(ic, r.denominator) ** r.numerator
            for j in range(4):
                v = ie[j] * r
                if v.denominator != 1:
                    raise ScalarError(f"substituted exponent of {VARS[j]} leaves the lattice")
                exps[j] += int(v)
        nk = pack(exps)
        v = out.get(nk, 0) + coeff
        if v:
            out[nk] = v
        else:
            out.pop(nk, None)
    return Laurent(out)


def _int_power(s: Scalar, r: Fraction) -> Scalar:
    if r.denominator != 1:
        raise ScalarError(f"fractional power {r} of non-monomial image {s}")
    return s ** int(r)


def scalar_sum(items: Iterable[Scalar]) -> Scalar:
    return reduce(lambda a, b: a + b, items, ZERO)


def lcm_int(a: int, b: int) -> int:
    return a * b // gcd(a, b)
