"""Multi-component quantum torus over the exact scalar field.

Generators come in pairs (l_i, m_i) with m_i l_i = q l_i m_i; different
pairs commute. A monomial is stored in the normal order
l_1^a m_1^b l_2^c m_2^d ... as a tuple of doubled exponents, so half
powers are exact. The q-factor from reordering two doubled exponents
lands directly on the quarter-power lattice of q.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

from qtorus._kernels import twisted_mul
from qtorus.scalars import (
    BIAS,
    ONE,
    ZERO,
    Scalar,
    ScalarError,
    as_scalar,
    pack,
    q_power,
)

QUNIT = pack((1, 0, 0, 0)) - BIAS  # key increment of one quarter power of q


class TorusError(ValueError):
    pass


class SubstitutionError(TorusError):
    pass


def default_names(ncomp: int) -> tuple[str, ...]:
    if ncomp == 1:
        return ("l", "m")
    out = []
    for i in range(1, ncomp + 1):
        out += [f"l{i}", f"m{i}"]
    return tuple(out)


def _fmt_half(e2: int) -> str:
    if e2 % 2 == 0:
        return str(e2 // 2)
    return f"({e2}/2)"


def format_coefficient(c: Scalar) -> tuple[bool, str]:
    """Return (negative, text) for a coefficient printed in front of a monomial."""
    if c.is_laurent() and len(c.num.terms) == 1:
        s = str(c)
        if s.startswith("-"):
            return True, s[1:]
        return False, s
    return False, f"({c})"


class TorusElement:
    """Finite sum of scalar multiples of normal-ordered torus monomials."""

    __slots__ = ("ncomp", "terms", "names", "_hash")

    def __init__(self, ncomp: int, terms: Mapping[tuple, Scalar] | None = None, names: Iterable[str] | None = None):
        self.ncomp = ncomp
        self.terms = {}
        if terms:
            for k, c in terms.items():
                c = as_scalar(c)
                if len(k) != 2 * ncomp:
                    raise TorusError(f"monomial {k} does not have {2 * ncomp} exponents")
                if not c.is_zero():
                    self.terms[tuple(k)] = c
        self.names = tuple(names) if names is not None else default_names(ncomp)
        self._hash = None

    @classmethod
    def _raw(cls, ncomp: int, terms: dict, names: tuple) -> "TorusElement":
        obj = cls.__new__(cls)
        obj.ncomp = ncomp
        obj.terms = terms
        obj.names = names
        obj._hash = None
        return obj

    # constructors ---------------------------------------------------------------
    @classmethod
    def zero(cls, ncomp: int = 1, names=None) -> "TorusElement":
        return cls(ncomp, {}, names)

    @classmethod
    def scalar(cls, c, ncomp: int = 1, names=None) -> "TorusElement":
        return cls(ncomp, {(0,) * (2 * ncomp): as_scalar(c)}, names)

    @classmethod
    def monomial(cls, exps2: Iterable[int], c=ONE, ncomp: int | None = None, names=None) -> "TorusElement":
        """Monomial from *doubled* exponents ``(2a, 2b, ...)``."""
        exps2 = tuple(exps2)
        if ncomp is None:
            ncomp = len(exps2) // 2
        return cls(ncomp, {exps2: as_scalar(c)}, names)

    @classmethod
    def generator(cls, index: int, ncomp: int = 1, power: Fraction | int = 1, names=None) -> "TorusElement":
        """``l_i`` (index 2i) or ``m_i`` (index 2i+1) raised to ``power``."""
        e = [0] * (2 * ncomp)
        p2 = Fraction(power) * 2
        if p2.denominator != 1:
            raise TorusError("torus exponents must be multiples of 1/2")
        e[index] = int(p2)
        return cls(ncomp, {tuple(e): ONE}, names)

    def with_names(self, names: Iterable[str]) -> "TorusElement":
        return TorusElement._raw(self.ncomp, self.terms, tuple(names))

    # predicates -----------------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_scalar(self) -> bool:
        return all(not any(k) for k in self.terms)

    def scalar_part(self) -> Scalar:
        return self.terms.get((0,) * (2 * self.ncomp), ZERO)

    def leading(self) -> tuple[tuple, Scalar]:
        k = max(self.terms)
        return k, self.terms[k]

    # arithmetic -------------------------------------------------------------------
    def _check(self, other: "TorusElement") -> None:
        if other.ncomp != self.ncomp:
            raise TorusError(f"component-count mismatch: {self.ncomp} vs {other.ncomp}")

    def _coerce(self, other) -> "TorusElement":
        if isinstance(other, TorusElement):
            self._check(other)
            return other
        s = as_scalar(other)
        if s is NotImplemented:
            return NotImplemented
        return TorusElement.scalar(s, self.ncomp, self.names)

    def __add__(self, other) -> "TorusElement":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        out = dict(self.terms)
        for k, c in other.terms.items():
            v = out.get(k)
            v = c if v is None else v + c
            if v.is_zero():
                out.pop(k, None)
            else:
                out[k] = v
        return TorusElement._raw(self.ncomp, out, self.names)

    def __radd__(self, other) -> "TorusElement":
        return self + other

    def __neg__(self) -> "TorusElement":
        return TorusElement._raw(self.ncomp, {k: -c for k, c in self.terms.items()}, self.names)

    def __sub__(self, other) -> "TorusElement":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "TorusElement":
        return (-self) + other

    def scale(self, c) -> "TorusElement":
        c = as_scalar(c)
        if c.is_zero():
            return TorusElement._raw(self.ncomp, {}, self.names)
        return TorusElement._raw(self.ncomp, {k: v * c for k, v in self.terms.items()}, self.names)

    def __mul__(self, other) -> "TorusElement":
        if not isinstance(other, TorusElement):
            s = as_scalar(other)
            if s is NotImplemented:
                return NotImplemented
            return self.scale(s)
        self._check(other)
        return torus_mul(self, other)

    def __rmul__(self, other) -> "TorusElement":
        s = as_scalar(other)
        if s is NotImplemented:
            return NotImplemented
        return self.scale(s)

    def __pow__(self, n: int) -> "TorusElement":
        if n < 0:
            if len(self.terms) != 1:
                raise TorusError("only monomials can be inverted")
            return self.monomial_power(Fraction(n))
        out = TorusElement.scalar(ONE, self.ncomp, self.names)
        for _ in range(n):
            out = out * self
        return out

    def monomial_power(self, r: Fraction) -> "TorusElement":
        """``(c * X)^r`` for a single term, any rational r on the lattice.

        For a normal-ordered monomial X = prod l_i^a_i m_i^b_i one has
        X^n = q^(sum a_i b_i * n(n-1)/2) * l^(n a) m^(n b), which is the
        formula used here for every rational n.
        """
        if len(self.terms) != 1:
            raise TorusError("power of a non-monomial element")
        (k, c), = self.terms.items()
        r = Fraction(r)
        new = []
        for e in k:
            v = e * r
            if v.denominator != 1:
                raise TorusError(f"power {r} leaves the half-integer exponent lattice")
            new.append(int(v))
        ab4 = sum(k[2 * i] * k[2 * i + 1] for i in range(self.ncomp))  # 4 * sum a_i b_i
        qexp4 = ab4 * r * (r - 1) / 2
        if qexp4.denominator != 1:
            raise TorusError(f"power {r} leaves the quarter-integer q lattice")
        coeff = c ** r if r.denominator == 1 else c.monomial_power(r)
        return TorusElement._raw(self.ncomp, {tuple(new): coeff * q_power(int(qexp4))}, self.names)

    # comparison -----------------------------------------------------------------
    def __eq__(self, other) -> bool:
        if isinstance(other, TorusElement):
            return self.ncomp == other.ncomp and self.terms == other.terms
        s = as_scalar(other)
        if s is NotImplemented:
            return NotImplemented
        return self == TorusElement.scalar(s, self.ncomp)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.ncomp, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self.terms)

    # transformations ------------------------------------------------------------
    def map_coefficients(self, fn) -> "TorusElement":
        out = {}
        for k, c in self.terms.items():
            v = fn(c)
            if not v.is_zero():
                out[k] = v
        return TorusElement._raw(self.ncomp, out, self.names)

    def at_q1(self) -> "TorusElement":
        """Classical specialization q = 1 (coefficients only)."""
        return self.map_coefficients(lambda c: c.substitute({"q": ONE}))

    def variables(self) -> set[str]:
        out = set()
        for k, c in self.terms.items():
            out |= c.variables()
            out |= {self.names[i] for i, e in enumerate(k) if e}
        return out

    def __str__(self) -> str:
        return format_torus(self)

    def __repr__(self) -> str:
        return f"TorusElement({self})"


def format_monomial(k: tuple, names: tuple) -> list[str]:
    out = []
    for name, e in zip(names, k):
        if e == 0:
            continue
        out.append(name if e == 2 else f"{name}^{_fmt_half(e)}")
    return out


def _print_key(k: tuple):
    return (sum(abs(e) for e in k), tuple(-e for e in k))


def format_torus(t: TorusElement) -> str:
    if not t.terms:
        return "0"
    pieces = []
    for i, k in enumerate(sorted(t.terms, key=_print_key)):
        c = t.terms[k]
        mono = format_monomial(k, t.names)
        if not mono:
            if c.is_laurent() and len(c.num.terms) == 1:
                s = str(c)
                neg, body = (True, s[1:]) if s.startswith("-") else (False, s)
            else:
                neg, body = False, f"({c})"
        else:
            neg, cs = format_coefficient(c)
            body = " * ".join(([] if cs == "1" else [cs]) + mono)
        if i == 0:
            pieces.append(("-" if neg else "") + body)
        else:
            pieces.append((" - " if neg else " + ") + body)
    return "".join(pieces)


# --- multiplication ---------------------------------------------------------------


def torus_mul(a: TorusElement, b: TorusElement) -> TorusElement:
    if a.ncomp != b.ncomp:
        raise TorusError(f"component-count mismatch: {a.ncomp} vs {b.ncomp}")
    if not a.terms or not b.terms:
        return TorusElement._raw(a.ncomp, {}, a.names)
    n = a.ncomp
    if all(c.is_laurent() for c in a.terms.values()) and all(c.is_laurent() for c in b.terms.values()):
        raw = twisted_mul(
            {k: c.num.terms for k, c in a.terms.items()},
            {k: c.num.terms for k, c in b.terms.items()},
            n,
            QUNIT,
            BIAS,
        )
        from qtorus.scalars import Laurent

        return TorusElement._raw(n, {k: Scalar.from_laurent(Laurent._raw(v)) for k, v in raw.items()}, a.names)
    out: dict = {}
    for ka, ca in a.terms.items():
        for kb, cb in b.terms.items():
            twist = 0
            for i in range(n):
                twist += ka[2 * i + 1] * kb[2 * i]
            key = tuple(x + y for x, y in zip(ka, kb))
            v = ca * cb * q_power(twist)
            cur = out.get(key)
            v = v if cur is None else cur + v
            if v.is_zero():
                out.pop(key, None)
            else:
                out[key] = v
    return TorusElement._raw(n, out, a.names)


# --- substitution --------------------------------------------------------------------


def torus_substitute(
    a: TorusElement,
    images: Mapping[object, TorusElement | Scalar],
    check: bool = True,
    target_ncomp: int | None = None,
    target_names: Iterable[str] | None = None,
) -> TorusElement:
    """Rewrite ``a`` under a substitution of generators and scalar variables.

    ``images`` maps generator slots (an int index, or a generator name of
    ``a``) to single-term torus elements, and scalar variables ``q``,
    ``Q``, ``x``, ``gamma`` to monomial scalars. Every normal-ordered term
    c * g_1^e_1 * g_2^e_2 ... becomes c' * img(g_1)^e_1 * img(g_2)^e_2 ...,
    multiplied left to right. With ``check`` the images must satisfy the
    defining relations with q replaced by its image.
    """
    if target_ncomp is None:
        target_ncomp = a.ncomp
    names_out = tuple(target_names) if target_names is not None else (a.names if target_ncomp == a.ncomp else None)
    slot_images: dict[int, TorusElement] = {}
    scalar_images: dict[str, Scalar] = {}
    for key, img in images.items():
        if isinstance(key, int):
            slot_images[key] = img
        elif key in ("q", "Q", "x", "gamma"):
            scalar_images[key] = as_scalar(img)
        elif key in a.names:
            slot_images[a.names.index(key)] = img
        else:
            raise SubstitutionError(f"unknown variable {key!r} in substitution")
    for i in range(2 * a.ncomp):
        if i not in slot_images:
            if target_ncomp != a.ncomp:
                raise SubstitutionError(f"no image for generator {a.names[i]}")
            slot_images[i] = TorusElement.generator(i, a.ncomp, names=names_out)
        img = slot_images[i]
        if not isinstance(img, TorusElement) or len(img.terms) != 1 or img.ncomp != target_ncomp:
            raise SubstitutionError(f"image of {a.names[i]} must be a single term with {target_ncomp} components")
    for name, img in scalar_images.items():
        if not img.is_monomial():
            raise SubstitutionError(f"image of {name} must be a monomial scalar")
    qimg = scalar_images.get("q", Scalar.var("q"))
    if check:
        _check_algebra_map(a.ncomp, slot_images, qimg)

    def sub_scalar(c: Scalar) -> Scalar:
        return c.substitute(scalar_images) if scalar_images else c

    one = TorusElement.scalar(ONE, target_ncomp, names_out)
    out = TorusElement.zero(target_ncomp, names_out)
    cache: dict = {}
    for k, c in a.terms.items():
        term = one.scale(sub_scalar(c))
        for i, e in enumerate(k):
            if e == 0:
                continue
            pk = (i, e)
            p = cache.get(pk)
            if p is None:
                p = cache[pk] = slot_images[i].monomial_power(Fraction(e, 2))
            term = term * p
        out = out + term
    if names_out is not None:
        out = out.with_names(names_out)
    return out


def _check_algebra_map(ncomp: int, imgs: Mapping[int, TorusElement], qimg: Scalar) -> None:
    for i in range(ncomp):
        lam, mu = imgs[2 * i], imgs[2 * i + 1]
        if mu * lam != (lam * mu).scale(qimg):
            raise SubstitutionError("substitution is not an algebra map")
    slots = sorted(imgs)
    for s in slots:
        for t in slots:
            if s // 2 == t // 2:
                continue
            if imgs[s] * imgs[t] != imgs[t] * imgs[s]:
                raise SubstitutionError("substitution is not an algebra map")


def torus_equal_up_to_left_unit(a: TorusElement, b: TorusElement) -> TorusElement | None:
    """The single term u with a = u * b, or None."""
    if a.is_zero() or b.is_zero():
        raise TorusError("unit comparison needs nonzero elements")
    if a.ncomp != b.ncomp:
        return None
    ka, ca = a.leading()
    kb, cb = b.leading()
    # normal-ordered leading terms multiply to the leading term
    mono = tuple(x - y for x, y in zip(ka, kb))
    twist = sum(mono[2 * i + 1] * kb[2 * i] for i in range(a.ncomp))
    coeff = ca / (cb * q_power(twist))
    u = TorusElement._raw(a.ncomp, {mono: coeff}, a.names)
    if u * b == a:
        return u
    return None


def commutes(a: TorusElement, b: TorusElement) -> bool:
    return a * b == b * a


__all__ = [
    "ScalarError",
    "SubstitutionError",
    "TorusElement",
    "TorusError",
    "commutes",
    "default_names",
    "torus_equal_up_to_left_unit",
    "torus_mul",
    "torus_substitute",
]
