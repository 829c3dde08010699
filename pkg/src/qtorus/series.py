"""Truncated power series in u_j = e^(x_j) and g (= g_s), with exact coefficients.

A ``MultiSeries`` keeps the terms u^n g^k with total u-degree at most
``order`` and g-degree at most ``g_order`` (both bounds inclusive).
Coefficients are Scalars free of q (they may contain Q).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Iterable, Mapping

from qtorus.scalars import ONE, ZERO, Scalar, as_scalar, unpack, VARS, SCALE
from qtorus.torus import TorusElement


class SeriesError(ValueError):
    pass


class WKBError(SeriesError):
    pass


class MultiSeries:
    __slots__ = ("nvars", "order", "g_order", "terms")

    def __init__(self, nvars: int, order: int, g_order: int = 0, terms: Mapping[tuple, object] | None = None):
        self.nvars = nvars
        self.order = order
        self.g_order = g_order
        self.terms: dict[tuple, Scalar] = {}
        for k, c in (terms or {}).items():
            k = tuple(k)
            if len(k) != nvars + 1:
                raise SeriesError(f"exponent tuple {k} needs {nvars + 1} entries")
            if min(k) < 0:
                raise SeriesError("negative exponents are not allowed in a power series")
            c = as_scalar(c)
            if self._keeps(k) and not c.is_zero():
                self.terms[k] = c

    # construction

    def _keeps(self, k: tuple) -> bool:
        return sum(k[:-1]) <= self.order and k[-1] <= self.g_order

    def _new(self, terms: dict) -> "MultiSeries":
        out = MultiSeries.__new__(MultiSeries)
        out.nvars, out.order, out.g_order = self.nvars, self.order, self.g_order
        out.terms = terms
        return out

    def like(self, terms: Mapping[tuple, object]) -> "MultiSeries":
        return MultiSeries(self.nvars, self.order, self.g_order, terms)

    @classmethod
    def constant(cls, c, nvars: int, order: int, g_order: int = 0) -> "MultiSeries":
        return cls(nvars, order, g_order, {(0,) * (nvars + 1): c})

    @classmethod
    def variable(cls, j: int, nvars: int, order: int, g_order: int = 0) -> "MultiSeries":
        k = [0] * (nvars + 1)
        k[j] = 1
        return cls(nvars, order, g_order, {tuple(k): ONE})

    @classmethod
    def gvar(cls, nvars: int, order: int, g_order: int) -> "MultiSeries":
        return cls(nvars, order, g_order, {(0,) * nvars + (1,): ONE})

    # inspection

    def coefficient(self, key: Iterable[int]) -> Scalar:
        return self.terms.get(tuple(key), ZERO)

    def constant_term(self) -> Scalar:
        return self.coefficient((0,) * (self.nvars + 1))

    def is_zero(self) -> bool:
        return not self.terms

    def g_coefficient(self, k: int) -> "MultiSeries":
        """The coefficient of g^k, as a series with g_order 0."""
        return MultiSeries(
            self.nvars, self.order, 0, {key[:-1] + (0,): c for key, c in self.terms.items() if key[-1] == k}
        )

    def lowest_g(self) -> int | None:
        return min((k[-1] for k in self.terms), default=None)

    def __eq__(self, other) -> bool:
        if not isinstance(other, MultiSeries):
            return NotImplemented
        return self.nvars == other.nvars and self.terms == other.terms

    def __hash__(self) -> int:
        return hash(frozenset(self.terms.items()))

    # arithmetic

    def _check(self, other: "MultiSeries") -> None:
        if self.nvars != other.nvars:
            raise SeriesError("series have different numbers of variables")

    def _meet(self, other: "MultiSeries") -> tuple[int, int]:
        return min(self.order, other.order), min(self.g_order, other.g_order)

    def _coerce(self, other) -> "MultiSeries":
        if isinstance(other, MultiSeries):
            self._check(other)
            return other
        return MultiSeries.constant(other, self.nvars, self.order, self.g_order)

    def __add__(self, other) -> "MultiSeries":
        other = self._coerce(other)
        order, g_order = self._meet(other)
        out = MultiSeries(self.nvars, order, g_order)
        terms = {k: c for k, c in self.terms.items() if out._keeps(k)}
        for k, c in other.terms.items():
            if not out._keeps(k):
                continue
            s = terms.get(k)
            s = c if s is None else s + c
            if s.is_zero():
                terms.pop(k, None)
            else:
                terms[k] = s
        out.terms = terms
        return out

    __radd__ = __add__

    def __neg__(self) -> "MultiSeries":
        return self._new({k: -c for k, c in self.terms.items()})

    def __sub__(self, other) -> "MultiSeries":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "MultiSeries":
        return self._coerce(other) - self

    def scale(self, c) -> "MultiSeries":
        c = as_scalar(c)
        if c.is_zero():
            return self._new({})
        return self._new({k: v * c for k, v in self.terms.items()})

    def __mul__(self, other) -> "MultiSeries":
        if not isinstance(other, MultiSeries):
            return self.scale(other)
        self._check(other)
        order, g_order = self._meet(other)
        out = MultiSeries(self.nvars, order, g_order)
        acc: dict[tuple, Scalar] = {}
        for ka, ca in self.terms.items():
            da = sum(ka[:-1])
            for kb, cb in other.terms.items():
                if da + sum(kb[:-1]) > order or ka[-1] + kb[-1] > g_order:
                    continue
                k = tuple(x + y for x, y in zip(ka, kb))
                v = ca * cb
                s = acc.get(k)
                acc[k] = v if s is None else s + v
        out.terms = {k: v for k, v in acc.items() if not v.is_zero()}
        return out

    def __rmul__(self, other) -> "MultiSeries":
        return self.scale(other)

    def __pow__(self, n: int) -> "MultiSeries":
        if n < 0:
            return self.inverse() ** (-n)
        out = MultiSeries.constant(ONE, self.nvars, self.order, self.g_order)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def _span(self) -> int:
        # a constant-free series raised to a power above this vanishes
        return self.order + self.g_order

    def inverse(self) -> "MultiSeries":
        c0 = self.constant_term()
        if c0.is_zero():
            raise SeriesError("series with zero constant term is not invertible")
        inv0 = c0.inverse()
        h = (self - c0).scale(-inv0)
        out = MultiSeries.constant(ONE, self.nvars, self.order, self.g_order)
        term = out
        for _ in range(self._span()):
            term = term * h
            if term.is_zero():
                break
            out = out + term
        return out.scale(inv0)

    def __truediv__(self, other) -> "MultiSeries":
        if isinstance(other, MultiSeries):
            return self * other.inverse()
        return self.scale(as_scalar(other).inverse())

    def exp(self) -> "MultiSeries":
        if not self.constant_term().is_zero():
            raise SeriesError("exp needs a zero constant term")
        out = MultiSeries.constant(ONE, self.nvars, self.order, self.g_order)
        term = out
        for k in range(1, self._span() + 1):
            term = (term * self).scale(Fraction(1, k))
            if term.is_zero():
                break
            out = out + term
        return out

    def log(self) -> "MultiSeries":
        if not self.constant_term().is_one():
            raise SeriesError("log needs constant term 1")
        h = self - ONE
        out = MultiSeries(self.nvars, self.order, self.g_order)
        term = MultiSeries.constant(ONE, self.nvars, self.order, self.g_order)
        for k in range(1, self._span() + 1):
            term = term * h
            if term.is_zero():
                break
            out = out + term.scale(Fraction((-1) ** (k + 1), k))
        return out

    def d(self, j: int) -> "MultiSeries":
        """d/dx_j with u_j = e^(x_j): multiplies the u_j^n coefficient by n."""
        if not 0 <= j < self.nvars:
            raise SeriesError(f"no variable x{j + 1}")
        return self._new({k: c * k[j] for k, c in self.terms.items() if k[j]})

    def integrate(self, j: int) -> "MultiSeries":
        """Antiderivative in x_j with zero u_j-free part; the u_j-free input terms must vanish."""
        if any(k[j] == 0 for k in self.terms):
            raise SeriesError("antiderivative would contain a term linear in x")
        return self._new({k: c * Fraction(1, k[j]) for k, c in self.terms.items()})

    def truncate(self, order: int | None = None, g_order: int | None = None) -> "MultiSeries":
        order = self.order if order is None else min(order, self.order)
        g_order = self.g_order if g_order is None else min(g_order, self.g_order)
        return MultiSeries(self.nvars, order, g_order, self.terms)

    def with_g(self, g_order: int) -> "MultiSeries":
        """Same terms, read in a series ring with the given g truncation."""
        return MultiSeries(self.nvars, self.order, g_order, self.terms)

    # output

    def to_text(self) -> str:
        return "".join(f"({','.join(map(str, k))}): {self.terms[k]}\n" for k in sorted(self.terms))

    def __str__(self) -> str:
        return self.to_text().rstrip("\n") or "0"

    def __repr__(self) -> str:
        return f"MultiSeries(nvars={self.nvars}, order={self.order}, g_order={self.g_order}, {len(self.terms)} terms)"


def polynomial(nvars: int, order: int, g_order: int, terms: Mapping[tuple, object]) -> MultiSeries:
    """A series from u-exponent tuples (without the g slot)."""
    return MultiSeries(nvars, order, g_order, {tuple(k) + (0,): c for k, c in terms.items()})


@dataclass(frozen=True)
class BranchFunction:
    """num/den with num, den polynomials in u_1..u_n; den(0) must be nonzero."""

    nvars: int
    num: tuple
    den: tuple

    def __init__(self, num: Mapping[tuple, object], den: Mapping[tuple, object], nvars: int = 1):
        object.__setattr__(self, "nvars", nvars)
        object.__setattr__(self, "num", tuple(sorted((tuple(k), as_scalar(c)) for k, c in num.items())))
        object.__setattr__(self, "den", tuple(sorted((tuple(k), as_scalar(c)) for k, c in den.items())))
        if dict(self.den).get((0,) * nvars, ZERO).is_zero():
            raise SeriesError("branch denominator must have a nonzero constant term")

    def expand(self, order: int, g_order: int = 0) -> MultiSeries:
        n = polynomial(self.nvars, order, g_order, dict(self.num))
        d = polynomial(self.nvars, order, g_order, dict(self.den))
        return n * d.inverse()


def unknot_branch(var: int = 0, nvars: int = 1, inverted: bool = False) -> BranchFunction:
    """(1 - u)/(1 - Q u) in u = u_var, the disk branch of 1 - l - m + Q l m = 0."""
    Q = Scalar.var("Q")
    one = [0] * nvars
    u = list(one)
    u[var] = 1
    top = {tuple(one): ONE, tuple(u): -ONE}
    bottom = {tuple(one): ONE, tuple(u): -Q}
    return BranchFunction(bottom, top, nvars) if inverted else BranchFunction(top, bottom, nvars)


# --- the Hopf annulus -----------------------------------------------------------------------------------


def annulus_string_side(order: int) -> MultiSeries:
    """d^2/dx1 dx2 log(1 - u1 - u2 + Q u1 u2)."""
    Q = Scalar.var("Q")
    f = polynomial(2, order, 0, {(0, 0): 1, (1, 0): -1, (0, 1): -1, (1, 1): Q})
    return f.log().d(0).d(1)


def annulus_sft_side(order: int) -> MultiSeries:
    """From dF/dx1 = t/(1 - t), t = u1 e^(-p2), with e^(p2) on the unknot branch.

    The amplitude is d^2/dx1 dx2 log(1 - t) = -d/dx2 (t/(1 - t)).
    """
    w = unknot_branch(var=1, nvars=2, inverted=True).expand(order)
    t = MultiSeries.variable(0, 2, order) * w
    dF1 = t * (MultiSeries.constant(ONE, 2, order) - t).inverse()
    return -dF1.d(1)


@dataclass
class AnnulusResult:
    string_side: MultiSeries
    sft_side: MultiSeries

    @property
    def equal(self) -> bool:
        return self.string_side == self.sft_side

    def first_difference(self) -> tuple | None:
        diff = self.string_side - self.sft_side
        return min(diff.terms) if diff.terms else None


def annulus_both_ways(order: int) -> AnnulusResult:
    if order < 2:
        raise SeriesError("annulus order must be at least 2")
    return AnnulusResult(annulus_string_side(order), annulus_sft_side(order))


def sft_chain_factor():
    """The disk-amplitude simplification, checked with sympy.

    Returns (r, ok) where r = [1/(Q u1 e^p1 - e^p1)] * [(1 - u1) w/(Q u1 - w)]
    divided by w/(Q u1 - w) on the branch e^p1 = (1 - u1)/(1 - Q u1), and ok
    says whether w/(Q u1 - w) equals Q^-1 u1^-1 w / (1 - Q^-1 u1^-1 w).
    """
    import sympy

    u1, w, Q = sympy.symbols("u1 w Q")
    ep1 = (1 - u1) / (1 - Q * u1)
    lhs = 1 / (Q * u1 * ep1 - ep1) * (1 - u1) * w / (Q * u1 - w)
    mid = w / (Q * u1 - w)
    rhs = (w / (Q * u1)) / (1 - w / (Q * u1))
    return sympy.simplify(lhs / mid), sympy.simplify(mid - rhs) == 0


# --- g-expansion of scalars ---------------------------------------------------------------------------


def _laurent_g_series(p, n_terms: int) -> list[Scalar]:
    """Coefficients of g^0..g^(n_terms-1) of p(q = e^g)."""
    out = [ZERO] * n_terms
    for key, c in p.terms.items():
        exps = unpack(key)
        s = Fraction(exps[0], SCALE[0])
        rest = {VARS[i]: Fraction(exps[i], SCALE[i]) for i in range(1, 4) if exps[i]}
        mono = Scalar(c)
        for name, e in rest.items():
            mono = mono * Scalar.var(name, e)
        for m in range(n_terms):
            coef = s ** m / factorial(m)
            if coef:
                out[m] = out[m] + mono * coef
    return out


def g_expansion(s, n_terms: int, max_pole: int = 64) -> tuple[int, list[Scalar]]:
    """s(q = e^g) = g^v * (c_0 + c_1 g + ...); returns v and c_0..c_(n_terms-1)."""
    s = as_scalar(s)
    if s.is_zero():
        return 0, [ZERO] * n_terms
    den = _laurent_g_series(s.den, max_pole + 1)
    vd = next((i for i, c in enumerate(den) if not c.is_zero()), None)
    if vd is None:
        raise SeriesError("denominator vanishes to high order at q = 1")
    num = _laurent_g_series(s.num, max_pole + n_terms + 1)
    vn = next((i for i, c in enumerate(num) if not c.is_zero()), None)
    if vn is None:
        raise SeriesError("numerator vanishes to high order at q = 1")
    den = _laurent_g_series(s.den, vd + n_terms)[vd:]
    num = num[vn : vn + n_terms]
    inv0 = den[0].inverse()
    out: list[Scalar] = []
    for m in range(n_terms):
        acc = num[m]
        for i in range(1, m + 1):
            if i < len(den):
                acc = acc - den[i] * out[m - i]
        out.append(acc * inv0)
    return vn - vd, out


# --- WKB ----------------------------------------------------------------------------------------------------


@dataclass
class WKBResult:
    derivatives: list  # dF_j/dx, j = 0..g_order
    potentials: list  # F_j with zero constant term
    residual: MultiSeries
    x_order: int
    g_order: int

    @property
    def ok(self) -> bool:
        return self.residual.is_zero()


def _operator_terms(A: TorusElement) -> list[tuple[int, int, Scalar]]:
    if A.ncomp != 1:
        raise WKBError("WKB expects a one-component operator")
    out = []
    for (a2, b2), c in A.terms.items():
        if a2 % 2 or b2 % 2:
            raise WKBError("half-integer powers of l or m are not supported")
        if a2 < 0:
            raise WKBError("negative powers of l are not supported")
        if "x" in c.variables() or "gamma" in c.variables():
            raise WKBError("coefficients may involve only q and Q")
        out.append((a2 // 2, b2 // 2, c))
    return out


def _coefficient_series(c: Scalar, order: int, g_order: int) -> MultiSeries:
    v, coeffs = g_expansion(c, g_order + 1)
    if v < 0:
        raise WKBError("operator coefficient has a pole at q = 1")
    return MultiSeries(1, order, g_order, {(0, v + m): coeffs[m] for m in range(g_order + 1 - v)} if v <= g_order else {})


def _u_power(a: int, order: int, g_order: int) -> MultiSeries:
    return MultiSeries(1, order, g_order, {(a, 0): ONE})


class _WKB:
    def __init__(self, A: TorusElement, branch: BranchFunction, x_order: int, g_order: int):
        if A.is_zero():
            raise WKBError("degenerate: zero operator")
        self.N, self.G = x_order, g_order
        self.ops = _operator_terms(A)
        y = branch.expand(x_order, g_order)
        if not y.constant_term().is_one():
            raise WKBError("branch must equal 1 at u = 0")
        self.y = y
        self.yinv = y.inverse()
        self.F0p = y.log()
        self.classical = self._classical_check()
        self.D = self._linear_coefficient()

    def ypow(self, b: int) -> MultiSeries:
        return self.y ** b if b >= 0 else self.yinv ** (-b)

    def _classical_check(self) -> MultiSeries:
        total = MultiSeries(1, self.N, 0)
        for a, b, c in self.ops:
            c1 = c.substitute({"q": ONE})
            total = total + (_u_power(a, self.N, 0) * self.ypow(b).with_g(0)).scale(c1)
        if not total.is_zero():
            raise WKBError("classical branch check fails: A(u, y, Q) = " + str(min(total.terms)) + " term survives")
        return total

    def _linear_coefficient(self) -> MultiSeries:
        total = MultiSeries(1, self.N, 0)
        for a, b, c in self.ops:
            if b:
                c1 = c.substitute({"q": ONE})
                total = total + (_u_power(a, self.N, 0) * self.ypow(b).with_g(0)).scale(c1 * b)
        return total

    def residual(self, Fp: Mapping[int, MultiSeries]) -> MultiSeries:
        """A e^F / e^F for F' = sum_j g^(j-1) Fp[j], with Fp[0] the classical part."""
        N, G = self.N, self.G
        theta_powers: dict[tuple[int, int], MultiSeries] = {}
        for j, fp in Fp.items():
            cur = fp.with_g(G)
            for k in range(1, G + 2 - j):
                if k > 1:
                    cur = cur.d(0)
                theta_powers[(j, k)] = cur  # theta^(k-1) F_j'
        gser = MultiSeries.gvar(1, N, G)
        out = MultiSeries(1, N, G)
        for a, b, c in self.ops:
            E = MultiSeries(1, N, G)
            for (j, k), t in theta_powers.items():
                if (j, k) == (0, 1) or j + k - 1 > G:
                    continue
                E = E + (t * gser ** (j + k - 1)).scale(Fraction(b ** k, factorial(k)))
            term = _coefficient_series(c, N, G) * _u_power(a, N, G) * self.ypow(b) * E.exp()
            out = out + term
        return out

    def solve(self) -> WKBResult:
        N, G = self.N, self.G
        Fp: dict[int, MultiSeries] = {0: self.F0p.with_g(0)}
        if self.D.constant_term().is_zero() and G > 0:
            raise WKBError("degenerate: linearized operator vanishes at u = 0 (order 1)")
        Dinv = self.D.inverse() if G > 0 else None
        for n in range(1, G + 1):
            R = self.residual(Fp)
            low = R.lowest_g()
            if low is not None and low < n:
                raise WKBError(f"inconsistent expansion: g^{low} equation fails")
            Rn = R.g_coefficient(n)
            Fp[n] = -(Rn * Dinv)
        residual = self.residual(Fp)
        derivs = [Fp[j].with_g(0) for j in range(G + 1)]
        pots = []
        for fp in derivs:
            pots.append(fp.integrate(0) if fp.constant_term().is_zero() else None)
        return WKBResult(derivs, pots, residual, N, G)


def wkb_solve(A: TorusElement, branch: BranchFunction, x_order: int, g_order: int) -> WKBResult:
    """Solve A e^F = 0 genus by genus, F = g^-1 F_0 + F_1 + g F_2 + ...

    ``A`` is written in l = e^x and m = e^(g d/dx); ``branch`` is e^(dF_0/dx).
    Orders are inclusive: u^n with n <= x_order and g^k with k <= g_order.
    """
    if x_order < 1 or g_order < 0:
        raise WKBError("need x_order >= 1 and g_order >= 0")
    return _WKB(A, branch, x_order, g_order).solve()


def log_wave_coefficients(values: list) -> list[Scalar]:
    """[u^n] log(sum_n H_n u^n) for n = 1..len-1, given H_0 = 1."""
    N = len(values) - 1
    psi = MultiSeries(1, N, 0, {(n, 0): v for n, v in enumerate(values)})
    lg = psi.log()
    return [lg.coefficient((n, 0)) for n in range(N + 1)]


@dataclass
class CrossCheck:
    agree: bool
    mismatches: list  # (n, j, from_wkb, from_recursion)


def wkb_vs_recursion(result: WKBResult, table) -> CrossCheck:
    """Compare [u^n] F_j with the g^j coefficient of g * [u^n] log Psi(q = e^g).

    ``table`` holds H_0 = 1, H_1, ... from the recurrence.
    """
    N, G = result.x_order, result.g_order
    L = log_wave_coefficients(list(table)[: N + 1])
    bad = []
    for n in range(1, min(N, len(L) - 1) + 1):
        v, coeffs = g_expansion(L[n], G + 2)
        # g * L_n: valuation v + 1
        for j in range(G + 1):
            idx = j - (v + 1)
            want = coeffs[idx] if 0 <= idx < len(coeffs) else ZERO
            if j < v + 1:
                want = ZERO
            got = result.derivatives[j].coefficient((n, 0)) * Fraction(1, n)
            if got != want:
                bad.append((n, j, got, want))
        if v + 1 < 0:
            bad.append((n, v + 1, ZERO, coeffs[0]))
    return CrossCheck(not bad, bad)


__all__ = [
    "AnnulusResult",
    "BranchFunction",
    "CrossCheck",
    "MultiSeries",
    "SeriesError",
    "WKBError",
    "WKBResult",
    "annulus_both_ways",
    "annulus_sft_side",
    "annulus_string_side",
    "g_expansion",
    "log_wave_coefficients",
    "polynomial",
    "sft_chain_factor",
    "unknot_branch",
    "wkb_solve",
    "wkb_vs_recursion",
]
