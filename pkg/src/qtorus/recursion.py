"""q-difference operators in M, L (LM = qML) acting on sequences.

An operator is a one-component ``TorusElement`` whose first slot is M and
whose second slot is L, so the normal order is M^a L^b and

    (M^a L^b f)(n) = q^(a n) f(n + b),    f(k) = 0 for k < 0.

Elements written in l, m (l = e^x, m = e^p) reach sequences through
``sequence_rep``: l acts as the down-shift S = L^-1 and m as M.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from qtorus.scalars import ONE, ZERO, Scalar, as_scalar, q_power
from qtorus.syntax import parse_scalar
from qtorus.torus import (
    SubstitutionError,
    TorusElement,
    torus_equal_up_to_left_unit,
    torus_substitute,
)

OP_NAMES = ("M", "L")


class RecursionError(ValueError):
    pass


def as_operator(p: TorusElement) -> TorusElement:
    """Accept an operator in M, L or an element in l, m (via sequence_rep)."""
    if p.ncomp != 1:
        raise RecursionError("recurrence operators have one component")
    if p.names == OP_NAMES:
        return p
    return sequence_rep(p)


def _l_power(k: tuple) -> int:
    if k[1] % 2:
        raise RecursionError("half-integer shifts do not act on sequences")
    return k[1] // 2


def _m_factor(a2: int, n: int) -> Scalar:
    # q^(a n) with a = a2/2, in quarter units
    return q_power(2 * a2 * n)


def shift_span(p: TorusElement) -> tuple[int, int]:
    bs = [_l_power(k) for k in p.terms]
    return min(bs), max(bs)


@dataclass(frozen=True)
class SequenceTable:
    """Values f(0), ..., f(n_max)."""

    values: tuple

    def __init__(self, values: Iterable):
        object.__setattr__(self, "values", tuple(as_scalar(v) for v in values))

    @property
    def n_max(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, n: int) -> Scalar:
        return self.values[n]

    def __len__(self) -> int:
        return len(self.values)

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self.values)

    def to_text(self) -> str:
        return "".join(f"{n}: {v}\n" for n, v in enumerate(self.values))

    @classmethod
    def from_text(cls, text: str) -> "SequenceTable":
        rows = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            idx, sep, val = line.partition(":")
            if not sep or not idx.strip().isdigit():
                raise RecursionError(f"line {lineno}: expected 'n: value'")
            rows[int(idx)] = parse_scalar(val)
        if sorted(rows) != list(range(len(rows))):
            raise RecursionError("sequence indices must be 0, 1, ..., n_max")
        return cls(rows[n] for n in range(len(rows)))

    def __add__(self, other: "SequenceTable") -> "SequenceTable":
        n = min(len(self), len(other))
        return SequenceTable(self.values[i] + other.values[i] for i in range(n))

    def scale(self, c) -> "SequenceTable":
        c = as_scalar(c)
        return SequenceTable(v * c for v in self.values)


def op_apply(p: TorusElement, f: SequenceTable | Sequence) -> SequenceTable:
    """(P f)(n) on the window where every shifted value is known."""
    p = as_operator(p)
    if not isinstance(f, SequenceTable):
        f = SequenceTable(f)
    if p.is_zero():
        return SequenceTable([ZERO] * len(f))
    _, bmax = shift_span(p)
    top = f.n_max - max(bmax, 0)
    if top < 0:
        raise RecursionError(f"window too small: need at least {max(bmax, 0) + 1} values")
    out = []
    for n in range(top + 1):
        acc = ZERO
        for k, c in p.terms.items():
            idx = n + _l_power(k)
            if idx < 0:
                continue
            v = f[idx]
            if v.is_zero():
                continue
            acc = acc + c * _m_factor(k[0], n) * v
        out.append(acc)
    return SequenceTable(out)


def sequence_rep(a: TorusElement) -> TorusElement:
    """Image of an element in l, m under l -> L^-1, m -> M."""
    if a.ncomp != 1:
        raise RecursionError("sequence_rep expects a one-component element")
    if a.names == OP_NAMES:
        return a
    if any(k[0] < 0 for k in a.terms):
        raise RecursionError("negative l-exponent: the shift would not be causal")
    images = {
        0: TorusElement.monomial((0, -2), names=OP_NAMES),
        1: TorusElement.monomial((2, 0), names=OP_NAMES),
    }
    return torus_substitute(a, images, check=True, target_names=OP_NAMES)


def _coeffs_by_shift(p: TorusElement) -> dict[int, list[tuple[int, Scalar]]]:
    out: dict[int, list] = {}
    for k, c in p.terms.items():
        out.setdefault(_l_power(k), []).append((k[0], c))
    return out


def forward_solve(p: TorusElement, initial: Sequence, n_max: int) -> SequenceTable:
    """Extend ``initial`` to n_max using (P f)(n) = 0.

    The equation at n fixes f(n + b_max) from lower values, so solving needs
    the coefficient of the top shift to be nonzero at q^n.
    """
    p = as_operator(p)
    if p.is_zero():
        raise RecursionError("cannot solve: zero operator")
    groups = _coeffs_by_shift(p)
    bmax = max(groups)
    vals = [as_scalar(v) for v in initial]
    if len(vals) < max(bmax, 1) and bmax > 0:
        raise RecursionError(f"need at least {bmax} initial values")
    if not vals:
        raise RecursionError("need at least one initial value")
    for m in range(len(vals), n_max + 1):
        n = m - bmax
        lead = ZERO
        rest = ZERO
        for b, terms in groups.items():
            cb = ZERO
            for a2, c in terms:
                cb = cb + c * _m_factor(a2, n)
            if b == bmax:
                lead = cb
                continue
            idx = n + b
            if idx < 0 or vals[idx].is_zero():
                continue
            rest = rest + cb * vals[idx]
        if lead.is_zero():
            raise RecursionError(f"cannot solve: leading coefficient vanishes at n={n}")
        vals.append(-rest / lead)
    return SequenceTable(vals[: n_max + 1])


def forward_solve_basis(p: TorusElement, k: int, n_max: int) -> list[SequenceTable]:
    """Solutions for the unit initial vectors e_0, ..., e_(k-1).

    A table with symbolic initial values W_0, ..., W_(k-1) is the linear
    combination sum W_i * table_i.
    """
    out = []
    for i in range(k):
        init = [ONE if j == i else ZERO for j in range(k)]
        out.append(forward_solve(p, init, n_max))
    return out


def solved_window(p: TorusElement, n_initial: int) -> int:
    """First n at which forward_solve enforced (P f)(n) = 0."""
    p = as_operator(p)
    _, bmax = shift_span(p)
    return max(n_initial - bmax, 0)


def framing_transform(p: TorusElement, fprime: int) -> TorusElement:
    """Change the framing of ``p`` by f' (framing f becomes f + f').

    Each l^i is replaced by q^(-f' i^2 / 2) m^(f' i) l^i with the remaining
    coefficient kept on the left: a term c l^i m^b is first written as
    (c l^i m^b l^-i) l^i, i.e. with its m-part to the left of l^i.
    """
    if p.ncomp != 1:
        raise RecursionError("framing transform expects a one-component element")
    lower = -fprime
    out = TorusElement.zero(1, p.names)
    for k, c in p.terms.items():
        i2 = k[0]
        term = TorusElement._raw(1, {k: c}, p.names)
        lam_i = TorusElement.monomial((i2, 0), names=p.names)
        lam_mi = TorusElement.monomial((-i2, 0), names=p.names)
        p_i = term * lam_mi
        q4 = Fraction(lower * i2 * i2, 2)  # 4 * lower * (i2/2)^2 / 2
        if q4.denominator != 1:
            raise RecursionError("framing shift leaves the quarter-integer q lattice")
        mu = TorusElement.monomial((0, -lower * i2), names=p.names)
        out = out + (p_i * mu * lam_i).scale(q_power(int(q4)))
    return out


def twist(f: SequenceTable | Sequence, fprime: int) -> SequenceTable:
    """Sequence-level framing change matching ``framing_transform(., f')``.

    framing_transform(P, f') annihilates n -> q^(f' n^2 / 2) f(n) whenever
    P annihilates f.
    """
    if not isinstance(f, SequenceTable):
        f = SequenceTable(f)
    return SequenceTable(v * q_power(2 * fprime * n * n) for n, v in enumerate(f.values))


def compare_after_substitution(
    p: TorusElement,
    images: Mapping,
    target: TorusElement,
) -> TorusElement | None:
    """Left unit u with subst(P) = u * target, or None.

    Returns None as well when the substitution fails its algebra-map check.
    """
    try:
        sub = torus_substitute(p, images, check=True, target_ncomp=target.ncomp, target_names=target.names)
    except SubstitutionError:
        return None
    if sub.is_zero():
        return None
    return torus_equal_up_to_left_unit(sub, target)


__all__ = [
    "OP_NAMES",
    "RecursionError",
    "SequenceTable",
    "as_operator",
    "compare_after_substitution",
    "forward_solve",
    "forward_solve_basis",
    "framing_transform",
    "op_apply",
    "sequence_rep",
    "shift_span",
    "solved_window",
    "twist",
]
