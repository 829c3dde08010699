"""Built-in datasets and scripted elimination.

Relation files hold ``name = expression`` lines (``let name = expr`` binds a
helper name). Script files hold one step per line:

    NAME := EXPR                    combine relations / earlier steps
    expect NAME = EXPR              exact check modulo truncation
    redundant EXPR                  EXPR must vanish modulo truncation
    glue NAME := SRC dXX -> TARGET | PATTERN @ WEIGHT | ...
    identity EXPR == EXPR           exact identity in the torus
    final NAME := EXPR              drop a-terms; no duals may remain

Chord scripts run in the operator algebra; scripts over commutative
relation sets run in sympy.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Callable, Mapping

from qtorus.chord import ChordElement, chord_glue
from qtorus.scalars import Scalar
from qtorus.syntax import ParseError, infer_layout, parse, parse_ast, parse_commutative, _names_in
from qtorus.recursion import compare_after_substitution, framing_transform
from qtorus.torus import TorusElement, torus_equal_up_to_left_unit, torus_substitute


class DatasetError(Exception):
    """A dataset file is missing or unparseable."""


class CheckFailure(AssertionError):
    """A scripted check did not hold; ``witness`` shows the first differing term."""

    def __init__(self, message: str, witness: str = ""):
        super().__init__(message + (f" (first difference: {witness})" if witness else ""))
        self.witness = witness


# --- locating and reading data ----------------------------------------------------------


def data_dir(override: str | os.PathLike | None = None) -> Path:
    if override:
        return Path(override)
    env = os.environ.get("QTORUS_DATA")
    if env:
        return Path(env)
    return Path(str(resources.files("qtorus") / "data"))


def _read(name: str, directory: str | os.PathLike | None) -> str:
    path = data_dir(directory) / name
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot read dataset {path}: {exc.strerror}") from None


def _lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line


def load_relations(name: str, directory=None, commutative: bool = False, bindings: Mapping | None = None) -> dict:
    """Parse a relation file into an ordered name -> element mapping.

    ``bindings`` pre-binds names, e.g. {"q": q^-1} to read a file written in
    the opposite q-convention.
    """
    text = _read(name, directory)
    rows = []
    used: set = set()
    bound: set = set()
    for lineno, line in _lines(text):
        is_let = line.startswith("let ")
        body = line[4:] if is_let else line
        lhs, sep, rhs = body.partition("=")
        key = lhs.strip()
        if not sep or not key.isidentifier():
            raise DatasetError(f"{name}:{lineno}: expected 'name = expression'")
        try:
            _names_in(parse_ast(rhs), used)
        except ParseError as exc:
            raise DatasetError(f"{name}:{lineno}: {exc}") from None
        bound.add(key)
        rows.append((lineno, is_let, key, rhs))
    names = None
    if not commutative:
        try:
            names = infer_layout(used - bound - set(bindings or {}))[1]
        except ValueError as exc:
            raise DatasetError(f"{name}: {exc}") from None
    env: dict = dict(bindings or {})
    out: dict = {}
    for lineno, is_let, key, rhs in rows:
        try:
            value = parse_commutative(rhs, env) if commutative else parse(rhs, env=env, names=names)
        except ParseError as exc:
            raise DatasetError(f"{name}:{lineno}: {exc}") from None
        env[key] = value
        if not is_let:
            out[key] = value
    return out


# --- differences and witnesses ----------------------------------------------------------------


def first_term(x) -> str:
    """Text of the first term of ``x`` in printing order."""
    if isinstance(x, ChordElement):
        if x.is_zero():
            return "0"
        s = str(ChordElement(x.ncomp, dict([min(x.terms.items(), key=lambda kv: (sum(kv[0][0]), kv[0]))]), None, x.names))
        return s
    if isinstance(x, TorusElement):
        if x.is_zero():
            return "0"
        k = min(x.terms)
        return str(TorusElement(x.ncomp, {k: x.terms[k]}, x.names))
    try:
        import sympy

        terms = sympy.Add.make_args(sympy.expand(x))
        return str(sorted(terms, key=sympy.default_sort_key)[0])
    except Exception:  # pragma: no cover - defensive
        return str(x)


def _is_zero(x) -> bool:
    if isinstance(x, (ChordElement, TorusElement, Scalar)):
        return x.is_zero()
    import sympy

    return sympy.expand(x) == 0


# --- script runner ----------------------------------------------------------------------------


@dataclass
class StepRecord:
    kind: str
    name: str
    text: str
    value: object = None
    ok: bool = True
    witness: str = ""


@dataclass
class ScriptResult:
    env: dict
    finals: dict = field(default_factory=dict)
    log: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.log)

    def first_failure(self) -> StepRecord | None:
        for r in self.log:
            if not r.ok:
                return r
        return None


class ScriptRunner:
    def __init__(self, relations: Mapping[str, object], commutative: bool = False, strict: bool = True):
        self.env = dict(relations)
        self.commutative = commutative
        self.strict = strict
        layout_src = [v for v in relations.values() if isinstance(v, (TorusElement, ChordElement))]
        if layout_src:
            widest = max(layout_src, key=lambda v: v.ncomp)
            self.ncomp, self.names = widest.ncomp, widest.names
        else:
            self.ncomp, self.names = 1, ("l", "m")

    def ev(self, text: str):
        if self.commutative:
            return parse_commutative(text, self.env)
        v = parse(text, env=self.env, names=self.names)
        if isinstance(v, Scalar):
            v = TorusElement.scalar(v, self.ncomp, self.names)
        return v

    def _record(self, result: ScriptResult, rec: StepRecord) -> None:
        result.log.append(rec)
        if not rec.ok and self.strict:
            raise CheckFailure(f"step '{rec.kind} {rec.name}' failed", rec.witness)

    def run(self, script: str, source: str = "<script>") -> ScriptResult:
        result = ScriptResult(self.env)
        for lineno, line in _lines(script):
            try:
                self.step(line, result)
            except ParseError as exc:
                raise DatasetError(f"{source}:{lineno}: {exc}") from None
        return result

    def step(self, line: str, result: ScriptResult) -> None:
        word, _, rest = line.partition(" ")
        if word == "expect":
            name, _, rhs = rest.partition("=")
            name = name.strip()
            got = self.env[name]
            want = self.ev(rhs)
            if isinstance(got, TorusElement) and isinstance(want, ChordElement):
                got = ChordElement.from_torus(got)
            diff = got - want
            ok = _is_zero(diff)
            self._record(result, StepRecord("expect", name, rhs.strip(), got, ok, "" if ok else first_term(diff)))
        elif word == "redundant":
            v = self.ev(rest)
            ok = _is_zero(v)
            self._record(result, StepRecord("redundant", "", rest.strip(), v, ok, "" if ok else first_term(v)))
        elif word == "identity":
            lhs, _, rhs = rest.partition("==")
            diff = self.ev(lhs) - self.ev(rhs)
            ok = _is_zero(diff)
            self._record(result, StepRecord("identity", "", rest.strip(), diff, ok, "" if ok else first_term(diff)))
        elif word == "glue":
            self._glue(rest, result)
        elif word == "final":
            name, _, rhs = rest.partition(":=")
            name = name.strip()
            v = self.ev(rhs)
            v = self._finalize(name, v)
            self.env[name] = v
            result.finals[name] = v
            result.log.append(StepRecord("final", name, rhs.strip(), v))
        else:
            name, sep, rhs = line.partition(":=")
            if not sep:
                raise ParseError(f"unknown step {word!r}", 1, line)
            name = name.strip()
            v = self.ev(rhs)
            self.env[name] = v
            result.log.append(StepRecord("combine", name, rhs.strip(), v))

    def _finalize(self, name: str, v):
        if self.commutative:
            import sympy

            syms = {str(s) for s in sympy.sympify(v).free_symbols}
            if syms & {"a12", "a21"}:
                raise CheckFailure(f"final {name} still contains chord variables")
            return v
        if isinstance(v, TorusElement):
            return v
        if any(any(dw) for (aw, dw) in v.terms if not any(aw)):
            raise CheckFailure(f"final {name} still contains dual operators")
        return v.torus_part()

    def _glue(self, rest: str, result: ScriptResult) -> None:
        head, *parts = rest.split("|")
        lhs, _, spec = head.partition(":=")
        name = lhs.strip()
        src_name, source, arrow, *target = spec.split()
        if arrow != "->":
            raise ParseError("glue expects 'SRC dXX -> TARGET'", 1, rest)
        target_el = self.ev(" ".join(target))
        if not isinstance(target_el, ChordElement):
            target_el = ChordElement.from_torus(target_el)
        twists = []
        for p in parts:
            pat, _, w = p.partition("@")
            pv = self.ev(pat)
            if isinstance(pv, ChordElement):
                pv = pv.torus_part()
            twists.append((pv, parse(w)))
        v = chord_glue(self.env[src_name], source, target_el, twists)
        self.env[name] = v
        result.log.append(StepRecord("glue", name, rest.strip(), v))


def run_script(relations: Mapping[str, object], script: str, commutative: bool = False, strict: bool = True) -> ScriptResult:
    return ScriptRunner(relations, commutative, strict).run(script)


# --- named pipelines -----------------------------------------------------------------------------


def trefoil_pipeline(directory=None, strict: bool = True) -> ScriptResult:
    rels = load_relations("trefoil.rel", directory)
    return ScriptRunner(rels, strict=strict).run(_read("trefoil.script", directory), "trefoil.script")


def hopf_pipeline(directory=None, strict: bool = True) -> ScriptResult:
    rels = load_relations("hopf.rel", directory)
    return ScriptRunner(rels, strict=strict).run(_read("hopf.script", directory), "hopf.script")


def classical_trefoil_script(directory=None, strict: bool = True) -> ScriptResult:
    rels = load_relations("trefoil_classical.rel", directory, commutative=True)
    return ScriptRunner(rels, commutative=True, strict=strict).run(
        _read("trefoil_classical.script", directory), "trefoil_classical.script"
    )


def check_redundancy(rels: Mapping[str, object], combo, commutative: bool = False) -> bool:
    """True iff sum c_i * rel_i vanishes (modulo the truncation order).

    ``combo`` is either text such as ``"Hc11 + d12*Hc21"`` or a list of
    (left coefficient, relation name) pairs.
    """
    runner = ScriptRunner(rels, commutative)
    if isinstance(combo, str):
        return _is_zero(runner.ev(combo))
    total = None
    for coeff, name in combo:
        c = runner.ev(coeff) if isinstance(coeff, str) else coeff
        term = c * rels[name]
        total = term if total is None else total + term
    return True if total is None else _is_zero(total)


def verify_product_identity(q3: int = -3) -> bool:
    """(Q-q^-1 m^2)(Q-q^q3 m^2)(Q^2+q^-1 l m^2) == (Q^2(Q-q^q3 m^2)+q^-1 l m^2 (Q-q m^2))(Q-q^-1 m^2)."""
    lhs = parse(f"(Q - q^-1*m^2)*(Q - q^{q3}*m^2)*(Q^2 + q^-1*l*m^2)")
    rhs = parse(f"(Q^2*(Q - q^{q3}*m^2) + q^-1*l*m^2*(Q - q*m^2))*(Q - q^-1*m^2)")
    return lhs == rhs


# --- classical elimination --------------------------------------------------------------------------


def _monomial_ratio(a, b):
    """a/b if it is a monomial with rational coefficient, else None."""
    import sympy

    r = sympy.factor(sympy.cancel(a / b))
    num, den = sympy.fraction(r)
    for part in (num, den):
        if not (part.is_Mul or part.is_Pow or part.is_Symbol or part.is_Number):
            return None
        for f in sympy.Mul.make_args(part):
            base = f.base if f.is_Pow else f
            if not (base.is_Symbol or base.is_Number):
                return None
    return r


@dataclass
class ClassicalResult:
    polynomial: object
    resultant: object
    unit: object
    script: ScriptResult | None


def classical_eliminate(knot: str, directory=None) -> ClassicalResult:
    """Augmentation polynomial by script and, independently, by resultants."""
    import sympy

    if knot == "unknot":
        p = load_relations("unknot.rel", directory, commutative=True)["U"]
        return ClassicalResult(p, p, sympy.Integer(1), None)
    if knot in ("rp3-line", "rp3_line"):
        p = load_relations("rp3_line.rel", directory, commutative=True)["ell"]
        return ClassicalResult(p, p, sympy.Integer(1), None)
    if knot != "trefoil":
        raise DatasetError(f"unknown knot {knot!r}")
    script = classical_trefoil_script(directory)
    aug = script.finals["Aug"]
    rels = load_relations("trefoil_classical.rel", directory, commutative=True)
    res = resultant_eliminate(rels)
    unit = _monomial_ratio(res, aug)
    if unit is None:
        raise CheckFailure("script and resultant eliminations disagree", first_term(sympy.expand(res - aug)))
    return ClassicalResult(aug, res, unit, script)


def resultant_eliminate(rels: Mapping[str, object]):
    """Eliminate a21 (via db12) from dc21 and dc22, then a12."""
    import sympy

    a12, a21, l = sympy.symbols("a12 a21 l")
    b = sympy.expand(l * rels["db12"])
    r1 = sympy.resultant(sympy.expand(rels["dc21"]), b, a21)
    r2 = sympy.resultant(sympy.expand(rels["dc22"]), b, a21)
    r = sympy.expand(sympy.resultant(sympy.expand(r1), sympy.expand(r2), a12))
    if r == 0:
        raise CheckFailure("resultant vanishes identically (degenerate system)")
    return r


# --- Hopf comparison ------------------------------------------------------------------------------------


def _mono(names, exps2, coeff: str = "1") -> TorusElement:
    return TorusElement.monomial(exps2, parse(coeff), names=names)


@dataclass
class HopfMatch:
    """Outcome of carrying A, B, C to the Chern-Simons coordinates.

    ``results`` and ``expected`` live in the algebra with m l = q l m: the
    final q -> q^-1 identifies it with the algebra m l = q^-1 l m in which the
    A_i are written, so each A_i is read with q replaced by q^-1.
    ``residual`` holds the left unit u with result = u * expected (None when
    there is none); ``ok`` records exact equality.
    """

    results: dict
    expected: dict
    ok: dict
    residual: dict
    witness: dict

    @property
    def all_exact(self) -> bool:
        return all(self.ok.values())

    @property
    def all_up_to_units(self) -> bool:
        return all(u is not None for u in self.residual.values())


HOPF_PREFACTORS = {"A": "q^-1", "B": "1", "C": "q^-2"}


def hopf_match(directory=None, invert_q: bool = True) -> HopfMatch:
    """Carry A, B, C through the coordinate changes and compare with A1, A2, A3."""
    pipe = hopf_pipeline(directory)
    names = ("l1", "m1", "l2", "m2")
    qinv = parse("q^-1")
    aenv = load_relations("hopf_aenv.rel", directory, bindings={"q": qinv} if invert_q else None)
    rel = {k: pipe.finals[k] for k in ("A", "B", "C")}

    step1 = {2: _mono(names, (0, 0, -2, 0), "Q^-1"), 3: _mono(names, (0, 0, 0, -2), "Q^-1")}
    out = {k: torus_substitute(v, step1, check=True) for k, v in rel.items()}

    units = {"B": _mono(names, (0, -2, -2, 0), "-1"), "C": TorusElement.scalar(parse("Q"), 2, names)}
    for k, u in units.items():
        out[k] = u.monomial_power(Fraction(-1)) * out[k]

    step3 = {
        0: _mono(names, (2, 0, 0, 0), "q"),
        1: _mono(names, (0, 2, 0, 0), "q"),
        3: _mono(names, (0, 0, 0, 2), "q"),
        "Q": parse("q^-1*Q"),
    }
    out = {k: torus_substitute(v, step3, check=True) for k, v in out.items()}

    expected = {}
    ok, residual, witness = {}, {}, {}
    for k, rel_name in zip("ABC", ("A1", "A2", "A3")):
        pre = parse(HOPF_PREFACTORS[k])
        if invert_q:
            pre = pre.substitute({"q": qinv})
        expected[k] = aenv[rel_name].scale(pre)
        diff = out[k] - expected[k]
        ok[k] = diff.is_zero()
        witness[k] = "" if ok[k] else first_term(diff)
        residual[k] = torus_equal_up_to_left_unit(out[k], expected[k])
    return HopfMatch(out, expected, ok, residual, witness)


# --- trefoil recursion checks -----------------------------------------------------------------------------

FINAL_SUBSTITUTION = {
    "L": "q^-1*Q^-1*l",
    "M": "q^(-1/2)*m^(-1/2)",
    "x": "q*Q^(1/2)",
    "q": "q^(1/2)",
}


def final_substitution_images(spec: Mapping[str, str] = FINAL_SUBSTITUTION) -> dict:
    images: dict = {}
    for var, text in spec.items():
        if var in ("L", "M"):
            slot = 0 if var == "M" else 1
            images[slot] = parse(text, names=("l", "m"))
            if isinstance(images[slot], Scalar):
                images[slot] = TorusElement.scalar(images[slot], 1, ("l", "m"))
        else:
            images[var] = parse(text)
    return images


def trefoil_qaug(framing: int = 3, directory=None) -> TorusElement:
    """qAug of the trefoil in the requested framing.

    The pipeline produces framing 3; other framings come from the framing
    transform, left-multiplied by m^(3 - framing) to clear denominators when
    lowering.
    """
    q3 = trefoil_pipeline(directory).finals["qAug3"]
    if framing == 3:
        return q3
    shift = framing - 3
    out = framing_transform(q3, shift)
    if shift < 0:
        out = TorusElement.monomial((0, -2 * shift), names=q3.names) * out
    return out


def printed_qaug0(directory=None) -> TorusElement:
    return load_relations("trefoil_qaug0.rel", directory)["qAug0"]


@dataclass
class FinalMatch:
    substituted: TorusElement
    unit: TorusElement | None
    expected_unit: TorusElement

    @property
    def ok(self) -> bool:
        return self.unit is not None and self.unit == self.expected_unit


def homfly_match(directory=None) -> FinalMatch:
    """Substitute into P_T and compare with qAug in framing 0 up to a left unit."""
    pt = load_relations("trefoil_homfly.rel", directory)["P_T"]
    q0 = trefoil_qaug(0, directory)
    images = final_substitution_images()
    sub = torus_substitute(pt, images, check=True, target_ncomp=1, target_names=q0.names)
    unit = compare_after_substitution(pt, images, q0)
    expected = parse("q^7*Q^-1*m^-6", names=q0.names)
    return FinalMatch(sub, unit, expected)


def fgs_mirror(directory=None) -> tuple[TorusElement, TorusElement]:
    """The mirrored left-handed recurrence and the stored P_T.

    Mirroring inverts a (= x^2), q and M in the coefficients of each
    normal-ordered term M^i L^j; the q-factors produced by M^-i are
    coefficientwise images too, so the substitution is applied without the
    algebra-map check.
    """
    fgs = load_relations("trefoil_fgs.rel", directory)["FGS"]
    pt = load_relations("trefoil_homfly.rel", directory)["P_T"]
    images = {
        0: TorusElement.monomial((-2, 0), names=fgs.names),
        "x": parse("x^-1"),
        "q": parse("q^-1"),
    }
    mirrored = torus_substitute(fgs, images, check=False)
    return mirrored, pt


__all__ = [
    "CheckFailure",
    "ClassicalResult",
    "DatasetError",
    "FINAL_SUBSTITUTION",
    "FinalMatch",
    "homfly_match",
    "printed_qaug0",
    "trefoil_qaug",
    "HopfMatch",
    "ScriptResult",
    "ScriptRunner",
    "check_redundancy",
    "classical_eliminate",
    "classical_trefoil_script",
    "data_dir",
    "fgs_mirror",
    "final_substitution_images",
    "first_term",
    "hopf_match",
    "hopf_pipeline",
    "load_relations",
    "resultant_eliminate",
    "run_script",
    "trefoil_pipeline",
    "verify_product_identity",
]
