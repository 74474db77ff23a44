"""A small text language for declaring graded Lagrangian models.

Example::

    # BF theory on a plane
    base_dim 2
    index mu nu
    field A even
    field B even [1]
    lagrangian eps(mu, nu) * A * d(mu, B[nu])
    stage 0 Delta0 = d(nu, bar(B)[nu])

One statement per line; a line continues while parentheses or brackets are
open, or after a trailing backslash.  Index names declared with ``index`` are
summed over ``1..base_dim`` inside the outermost additive term that contains
them, unless they are free on the left of a ``stage`` declaration, in which
case that declaration is expanded over the independent components of the
family.  Coordinates default to ``x1 .. xN``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Optional, Union

from .algebra import ANTISYMMETRIC, NONE, Density, FieldSpec, GradedPoly, levi_civita
from .calculus import total_derivative
from .koszul_tate import (
    KTComplex, KTError, NilpotencyError, StageOperator, extend_with_antifields, register_stage,
)

KEYWORDS = {"base_dim", "coords", "index", "field", "lagrangian", "stage", "even", "odd",
            "antisym", "bar", "d", "eps"}


@dataclass(frozen=True)
class Location:
    line: int
    column: int


class ModelError(Exception):
    """A diagnostic tied to a position in the model source."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(message)
        self.message = message
        self.line = line
        self.column = column

    @classmethod
    def at(cls, message: str, loc: Optional[Location]):
        return cls(message, loc.line, loc.column) if loc else cls(message)

    def format(self, path: str = "<model>") -> str:
        return f"{path}:{self.line}:{self.column}: error: {self.message}"

    def __str__(self):
        return f"line {self.line}, column {self.column}: {self.message}"


# syntax tree

Index = Union[int, str]


def _loc():
    return field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Number:
    value: int
    loc: Optional[Location] = _loc()


@dataclass(frozen=True)
class Symbol:
    """A field, an antifield ``bar(name)`` or a coordinate."""

    name: str
    bar: bool = False
    indices: tuple = ()
    jet: tuple = ()
    loc: Optional[Location] = _loc()


@dataclass(frozen=True)
class Add:
    terms: tuple  # of (sign, expr) with sign +1 or -1
    loc: Optional[Location] = _loc()


@dataclass(frozen=True)
class Mul:
    factors: tuple  # of (op, expr) with op "*" or "/"
    loc: Optional[Location] = _loc()


@dataclass(frozen=True)
class Neg:
    operand: object
    loc: Optional[Location] = _loc()


@dataclass(frozen=True)
class Pow:
    base: object
    exponent: int
    loc: Optional[Location] = _loc()


@dataclass(frozen=True)
class Deriv:
    index: Index
    operand: object
    loc: Optional[Location] = _loc()


@dataclass(frozen=True)
class Eps:
    indices: tuple
    loc: Optional[Location] = _loc()


@dataclass(frozen=True)
class FieldDecl:
    name: str
    parity: int
    index_groups: tuple = ()
    loc: Optional[Location] = _loc()


@dataclass(frozen=True)
class StageDecl:
    stage: int
    name: str
    indices: tuple
    symmetry: str
    expression: object
    loc: Optional[Location] = _loc()


@dataclass(frozen=True)
class ModelFile:
    base_dim: int
    coords: tuple = ()
    indices: tuple = ()
    fields: tuple = ()
    lagrangian: object = None
    stages: tuple = ()

    @property
    def coordinate_names(self) -> tuple:
        return self.coords or tuple(f"x{i}" for i in range(1, self.base_dim + 1))


# lexer

_TOKEN = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<cont>\\[ \t]*(?:\#[^\n]*)?\n)
  | (?P<newline>\n)
  | (?P<float>[0-9]+\.[0-9]*|\.[0-9]+)
  | (?P<int>[0-9]+)
  | (?P<name>[A-Za-z][A-Za-z0-9]*(?:_[A-Za-z0-9]+)*)
  | (?P<jet>_\()
  | (?P<op>[-+*/^()\[\],=])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    loc: Location


def tokenize(source: str) -> list:
    tokens = []
    line, line_start, pos, depth = 1, 0, 0, 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        loc = Location(line, pos - line_start + 1)
        if m is None:
            raise ModelError.at(f"unexpected character {source[pos]!r}", loc)
        kind, text = m.lastgroup, m.group()
        pos = m.end()
        if kind == "float":
            raise ModelError.at(f"floating-point literal {text!r}; write rationals as p/q", loc)
        if kind in ("newline", "cont"):
            if kind == "newline" and depth == 0:
                tokens.append(Token("newline", "\n", loc))
            line, line_start = line + 1, pos
            continue
        if kind in ("ws", "comment"):
            continue
        if text in ("(", "[", "_("):
            depth += 1
        elif text in (")", "]"):
            depth = max(depth - 1, 0)
        tokens.append(Token(kind, text, loc))
    tokens.append(Token("newline", "\n", Location(line, pos - line_start + 1)))
    tokens.append(Token("eof", "", Location(line, pos - line_start + 1)))
    return tokens


# parser


@dataclass
class _Family:
    stage: int
    parity: Optional[int]
    arity: int
    symmetry: str
    components: set = field(default_factory=set)


class _Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.pos = 0
        self.n: Optional[int] = None
        self.coords: tuple = ()
        self.indices: list = []
        self.fields: dict = {}
        self.families: dict = {}
        self.lagrangian = None
        self.stages: list = []
        self.stage: Optional[int] = None  # stage of the expression being parsed

    # token helpers

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def accept(self, text: str) -> Optional[Token]:
        if self.tok.text == text and self.tok.kind in ("op", "name", "jet"):
            return self.advance()
        return None

    def expect(self, text: str) -> Token:
        t = self.accept(text)
        if t is None:
            raise ModelError.at(f"expected {text!r}, found {self._describe(self.tok)}", self.tok.loc)
        return t

    def expect_kind(self, kind: str, what: str) -> Token:
        if self.tok.kind != kind:
            raise ModelError.at(f"expected {what}, found {self._describe(self.tok)}", self.tok.loc)
        return self.advance()

    @staticmethod
    def _describe(t: Token) -> str:
        if t.kind == "newline":
            return "end of line"
        if t.kind == "eof":
            return "end of file"
        return repr(t.text)

    def end_statement(self):
        if self.tok.kind != "newline":
            raise ModelError.at(f"unexpected {self._describe(self.tok)}", self.tok.loc)
        self.advance()

    # statements

    def parse(self) -> ModelFile:
        while self.tok.kind != "eof":
            if self.tok.kind == "newline":
                self.advance()
                continue
            self.statement()
        if self.n is None:
            raise ModelError.at("missing base_dim", self.tok.loc)
        if self.lagrangian is None:
            raise ModelError.at("missing lagrangian", self.tok.loc)
        return ModelFile(self.n, self.coords, tuple(self.indices), tuple(self.fields.values()),
                         self.lagrangian, tuple(self.stages))

    def statement(self):
        t = self.expect_kind("name", "a statement keyword")
        if self.n is None and t.text != "base_dim":
            raise ModelError.at("missing base_dim", t.loc)
        handler = {
            "base_dim": self.base_dim, "coords": self.coords_decl, "index": self.index_decl,
            "field": self.field_decl, "lagrangian": self.lagrangian_decl, "stage": self.stage_decl,
        }.get(t.text)
        if handler is None:
            raise ModelError.at(f"unknown statement {t.text!r}", t.loc)
        handler(t)
        self.end_statement()

    def base_dim(self, kw: Token):
        if self.n is not None:
            raise ModelError.at("base_dim declared twice", kw.loc)
        t = self.expect_kind("int", "a dimension")
        n = int(t.text)
        if n < 1:
            raise ModelError.at("base_dim must be positive", t.loc)
        self.n = n

    def new_name(self) -> Token:
        t = self.expect_kind("name", "a name")
        if t.text in KEYWORDS:
            raise ModelError.at(f"{t.text!r} is a reserved word", t.loc)
        if (t.text in self.fields or t.text in self.indices or t.text in self.coords
                or t.text in self.families):
            raise ModelError.at(f"{t.text!r} is already declared", t.loc)
        return t

    def coords_decl(self, kw: Token):
        if self.coords:
            raise ModelError.at("coords declared twice", kw.loc)
        names = []
        while self.tok.kind == "name":
            names.append(self.new_name().text)
        if len(names) != self.n:
            raise ModelError.at(f"coords lists {len(names)} names but base_dim is {self.n}", kw.loc)
        if len(set(names)) != len(names):
            raise ModelError.at("coordinate names repeat", kw.loc)
        self.coords = tuple(names)

    def index_decl(self, kw: Token):
        if self.tok.kind != "name":
            raise ModelError.at("index needs at least one name", self.tok.loc)
        while self.tok.kind == "name":
            self.indices.append(self.new_name().text)

    def field_decl(self, kw: Token):
        if self.lagrangian is not None:
            raise ModelError.at("fields must be declared before the lagrangian", kw.loc)
        name = self.new_name()
        par = self.expect_kind("name", "'even' or 'odd'")
        if par.text not in ("even", "odd"):
            raise ModelError.at(f"expected 'even' or 'odd', found {par.text!r}", par.loc)
        groups = []
        if self.accept("["):
            while True:
                c = self.expect_kind("int", "an index count")
                sym = ANTISYMMETRIC if self.accept("antisym") else NONE
                if int(c.text) < 1:
                    raise ModelError.at("index groups need at least one index", c.loc)
                groups.append((int(c.text), sym))
                if not self.accept(","):
                    break
            self.expect("]")
        self.fields[name.text] = FieldDecl(name.text, 1 if par.text == "odd" else 0,
                                           tuple(groups), name.loc)

    def lagrangian_decl(self, kw: Token):
        if self.lagrangian is not None:
            raise ModelError.at("lagrangian declared twice", kw.loc)
        self.stage = None
        expr = self.expression()
        self.check_bound(expr, set(), "lagrangian")
        if self.parity(expr) == 1:
            raise ModelError.at("parity mismatch: the lagrangian must be even", expr.loc)
        self.lagrangian = expr

    def stage_decl(self, kw: Token):
        if self.lagrangian is None:
            raise ModelError.at("stages must follow the lagrangian", kw.loc)
        kt = self.expect_kind("int", "a stage number")
        k = int(kt.text)
        current = self.stages[-1].stage if self.stages else -1
        if k not in (current, current + 1):
            raise ModelError.at(f"stage {k} out of order; expected {current} or {current + 1}", kt.loc)
        name = self.expect_kind("name", "an operator name")
        fam = self.families.get(name.text)
        if fam is None:
            name = self._reuse_guard(name)
        elif fam.stage != k:
            raise ModelError.at(f"family {name.text!r} belongs to stage {fam.stage}", name.loc)
        idx = []
        if self.accept("["):
            idx.append(self.index_ref())
            while self.accept(","):
                idx.append(self.index_ref())
            self.expect("]")
        free = [i for i in idx if isinstance(i, str)]
        if len(set(free)) != len(free):
            raise ModelError.at("repeated free index on the left-hand side", name.loc)
        sym = ANTISYMMETRIC if self.accept("antisym") else NONE
        self.expect("=")
        self.stage = k
        expr = self.expression()
        self.check_bound(expr, set(free), f"stage operator {name.text}")
        parity = self.parity(expr)
        if fam is None:
            fam = self.families[name.text] = _Family(k, parity, len(idx), sym)
        elif fam.arity != len(idx) or fam.symmetry != sym:
            raise ModelError.at(f"arity mismatch: family {name.text!r} was declared with "
                                f"{fam.arity} {fam.symmetry} indices", name.loc)
        elif None not in (fam.parity, parity) and fam.parity != parity:
            raise ModelError.at(f"parity mismatch: family {name.text!r} mixes even and odd "
                                "operators", expr.loc)
        elif fam.parity is None:
            fam.parity = parity
        self.stages.append(StageDecl(k, name.text, tuple(idx), sym, expr, name.loc))

    def _reuse_guard(self, t: Token) -> Token:
        if t.text in KEYWORDS:
            raise ModelError.at(f"{t.text!r} is a reserved word", t.loc)
        if t.text in self.fields or t.text in self.indices or t.text in self.coords:
            raise ModelError.at(f"{t.text!r} is already declared", t.loc)
        return t

    # expressions

    def index_ref(self) -> Index:
        t = self.tok
        if t.kind == "int":
            self.advance()
            v = int(t.text)
            if not 1 <= v <= self.n:
                raise ModelError.at(f"index out of range: {v} not in 1..{self.n}", t.loc)
            return v
        if t.kind == "name":
            self.advance()
            if t.text not in self.indices:
                raise ModelError.at(f"undeclared index {t.text!r}", t.loc)
            return t.text
        raise ModelError.at(f"expected an index, found {self._describe(t)}", t.loc)

    def index_list(self, close: str) -> tuple:
        out = [self.index_ref()]
        while self.accept(","):
            out.append(self.index_ref())
        self.expect(close)
        return tuple(out)

    def expression(self):
        start = self.tok.loc
        first = self.term()
        terms = [(1, first)]
        while self.tok.kind == "op" and self.tok.text in "+-":
            sign = 1 if self.advance().text == "+" else -1
            terms.append((sign, self.term()))
        if len(terms) == 1:
            return first
        self.check_homogeneous([t for _, t in terms])
        return Add(tuple(terms), start)

    def term(self):
        start = self.tok.loc
        factors = [("*", self.unary())]
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.advance().text
            factors.append((op, self.unary()))
        return factors[0][1] if len(factors) == 1 else Mul(tuple(factors), start)

    def unary(self):
        t = self.accept("-")
        if t:
            return Neg(self.unary(), t.loc)
        return self.power()

    def power(self):
        base = self.atom()
        if self.accept("^"):
            e = self.expect_kind("int", "an integer exponent")
            return Pow(base, int(e.text), base.loc)
        return base

    def atom(self):
        t = self.tok
        if t.kind == "int":
            self.advance()
            return Number(int(t.text), t.loc)
        if self.accept("("):
            inner = self.expression()
            self.expect(")")
            return inner
        if t.kind != "name":
            raise ModelError.at(f"expected an expression, found {self._describe(t)}", t.loc)
        self.advance()
        if t.text == "d":
            self.expect("(")
            lam = self.index_ref()
            self.expect(",")
            inner = self.expression()
            self.expect(")")
            return Deriv(lam, inner, t.loc)
        if t.text == "eps":
            self.expect("(")
            idx = self.index_list(")")
            if len(idx) != self.n:
                raise ModelError.at(f"arity mismatch: eps takes {self.n} indices, got {len(idx)}",
                                    t.loc)
            return Eps(idx, t.loc)
        if t.text == "bar":
            self.expect("(")
            name = self.expect_kind("name", "a field or operator name")
            self.expect(")")
            if name.text in self.fields:
                arity = sum(c for c, _ in self.fields[name.text].index_groups)
            elif name.text in self.families:
                fam = self.families[name.text]
                if self.stage is None or fam.stage >= self.stage:
                    raise ModelError.at(f"bar({name.text}) is not available here; stage "
                                        f"operators may only use antifields of lower stages",
                                        name.loc)
                arity = fam.arity
            else:
                raise ModelError.at(f"undeclared identifier {name.text!r}", name.loc)
            return self.symbol_tail(name.text, True, arity, t.loc)
        if t.text in self.fields:
            arity = sum(c for c, _ in self.fields[t.text].index_groups)
            return self.symbol_tail(t.text, False, arity, t.loc)
        if t.text in self.coordinate_names():
            if self.tok.text in ("[", "_("):
                raise ModelError.at(f"coordinate {t.text!r} takes no indices or jets", self.tok.loc)
            return Symbol(t.text, loc=t.loc)
        if t.text in self.indices:
            raise ModelError.at(f"index {t.text!r} used as a factor", t.loc)
        raise ModelError.at(f"undeclared identifier {t.text!r}", t.loc)

    def coordinate_names(self) -> tuple:
        return self.coords or tuple(f"x{i}" for i in range(1, self.n + 1))

    def symbol_tail(self, name: str, bar: bool, arity: int, loc: Location) -> Symbol:
        idx = ()
        if self.accept("["):
            idx = self.index_list("]")
        if len(idx) != arity:
            label = f"bar({name})" if bar else name
            raise ModelError.at(f"arity mismatch: {label} takes {arity} indices, got {len(idx)}",
                                loc)
        jet = ()
        if self.accept("_("):
            jet = self.index_list(")")
        if bar and self.lagrangian is None and self.stage is None:
            raise ModelError.at("the lagrangian must not contain antifields", loc)
        return Symbol(name, bar, idx, jet, loc)

    # static checks

    def parity(self, e) -> Optional[int]:
        """Grassmann parity of an expression; None for a literal zero."""
        if isinstance(e, Number):
            return 0 if e.value else None
        if isinstance(e, Eps):
            return 0
        if isinstance(e, Symbol):
            if e.name in self.fields:
                return self.fields[e.name].parity ^ int(e.bar)
            if e.name in self.families:
                p = self.families[e.name].parity
                return None if p is None else 1 - p
            return 0
        if isinstance(e, Add):
            ps = {self.parity(t) for _, t in e.terms} - {None}
            return ps.pop() if ps else None
        if isinstance(e, Mul):
            total = 0
            for _, f in e.factors:
                p = self.parity(f)
                if p is None:
                    return None
                total ^= p
            return total
        if isinstance(e, (Neg, Deriv)):
            return self.parity(e.operand)
        if isinstance(e, Pow):
            p = self.parity(e.base)
            return None if p is None else (p * e.exponent) % 2
        raise TypeError(e)

    def check_homogeneous(self, terms):
        seen = None
        for t in terms:
            p = self.parity(t)
            if p is None:
                continue
            if seen is None:
                seen = p
            elif p != seen:
                kind = "odd" if p else "even"
                raise ModelError.at(f"parity mismatch: {kind} term in a sum of "
                                    f"{'odd' if seen else 'even'} terms", t.loc)

    def check_bound(self, e, free: set, what: str):
        """Division only by nonzero constants; free left-hand indices must occur."""
        for node in _walk(e):
            if isinstance(node, Mul):
                for op, f in node.factors:
                    if op == "/" and not _is_constant(f):
                        raise ModelError.at("division by a non-constant expression", f.loc)
        missing = free - _index_names(e)
        if missing:
            raise ModelError.at(f"free index {sorted(missing)[0]!r} does not occur in {what}", e.loc)


def _walk(e):
    yield e
    if isinstance(e, Add):
        for _, t in e.terms:
            yield from _walk(t)
    elif isinstance(e, Mul):
        for _, f in e.factors:
            yield from _walk(f)
    elif isinstance(e, (Neg, Deriv)):
        yield from _walk(e.operand)
    elif isinstance(e, Pow):
        yield from _walk(e.base)


def _is_constant(e) -> bool:
    return all(isinstance(n, (Number, Add, Mul, Neg, Pow)) for n in _walk(e))


def _index_names(e) -> set:
    out = set()
    for node in _walk(e):
        if isinstance(node, Symbol):
            out.update(i for i in node.indices + node.jet if isinstance(i, str))
        elif isinstance(node, Eps):
            out.update(i for i in node.indices if isinstance(i, str))
        elif isinstance(node, Deriv) and isinstance(node.index, str):
            out.add(node.index)
    return out


def parse_model(source: str) -> ModelFile:
    """Parse model text; every failure is a :class:`ModelError` with a position."""
    return _Parser(source).parse()


# serialization


def _fmt_index(i: Index) -> str:
    return str(i)


def format_expr(e, ctx: str = "expr") -> str:
    """Source text for an expression; re-parsing gives back the same tree."""
    if isinstance(e, Number):
        return str(e.value)
    if isinstance(e, Symbol):
        s = f"bar({e.name})" if e.bar else e.name
        if e.indices:
            s += "[" + ",".join(map(_fmt_index, e.indices)) + "]"
        if e.jet:
            s += "_(" + ",".join(map(_fmt_index, e.jet)) + ")"
        return s
    if isinstance(e, Eps):
        return "eps(" + ", ".join(map(_fmt_index, e.indices)) + ")"
    if isinstance(e, Deriv):
        return f"d({_fmt_index(e.index)}, {format_expr(e.operand)})"
    if isinstance(e, Add):
        parts = []
        for i, (sign, t) in enumerate(e.terms):
            body = format_expr(t, "term")
            parts.append(body if i == 0 else (" + " if sign > 0 else " - ") + body)
        s = "".join(parts)
        return s if ctx == "expr" else f"({s})"
    if isinstance(e, Mul):
        s = format_expr(e.factors[0][1], "unary")
        for op, f in e.factors[1:]:
            s += f"{op}{format_expr(f, 'unary')}"
        return s if ctx in ("expr", "term") else f"({s})"
    if isinstance(e, Neg):
        s = "-" + format_expr(e.operand, "unary")
        return f"({s})" if ctx == "base" else s
    if isinstance(e, Pow):
        s = f"{format_expr(e.base, 'base')}^{e.exponent}"
        return f"({s})" if ctx == "base" else s
    raise TypeError(e)


def format_model(model: ModelFile) -> str:
    lines = [f"base_dim {model.base_dim}"]
    if model.coords:
        lines.append("coords " + " ".join(model.coords))
    if model.indices:
        lines.append("index " + " ".join(model.indices))
    for f in model.fields:
        s = f"field {f.name} {'odd' if f.parity else 'even'}"
        if f.index_groups:
            s += " [" + ", ".join(f"{c} antisym" if sym == ANTISYMMETRIC else str(c)
                                  for c, sym in f.index_groups) + "]"
        lines.append(s)
    lines.append("lagrangian " + format_expr(model.lagrangian))
    for st in model.stages:
        s = f"stage {st.stage} {st.name}"
        if st.indices:
            s += "[" + ",".join(map(_fmt_index, st.indices)) + "]"
        if st.symmetry == ANTISYMMETRIC:
            s += " antisym"
        lines.append(f"{s} = {format_expr(st.expression)}")
    return "\n".join(lines) + "\n"


# evaluation


class _Evaluator:
    def __init__(self, model: ModelFile, specs: dict, complex_: Optional[KTComplex] = None):
        self.n = model.base_dim
        self.coords = {name: i for i, name in enumerate(model.coordinate_names, 1)}
        self.specs = specs
        self.complex = complex_

    def summed(self, e, env: dict) -> GradedPoly:
        names = sorted(_index_names(e) - env.keys())
        if not names:
            return self.eval(e, env)
        acc = GradedPoly()
        for values in product(range(1, self.n + 1), repeat=len(names)):
            acc = acc + self.eval(e, {**env, **dict(zip(names, values))})
        return acc

    def eval(self, e, env: dict) -> GradedPoly:
        if isinstance(e, Number):
            return GradedPoly.constant(e.value)
        if isinstance(e, Symbol):
            return self.symbol(e, env)
        if isinstance(e, Eps):
            return GradedPoly.constant(levi_civita([self.index(i, env) for i in e.indices]))
        if isinstance(e, Deriv):
            return total_derivative(self.eval(e.operand, env), self.index(e.index, env))
        if isinstance(e, Add):
            acc = GradedPoly()
            for sign, t in e.terms:
                p = self.summed(t, env)
                acc = acc + p if sign > 0 else acc - p
            return acc
        if isinstance(e, Mul):
            acc = self.eval(e.factors[0][1], env)
            for op, f in e.factors[1:]:
                p = self.eval(f, env)
                if op == "*":
                    acc = acc * p
                else:
                    c = p.terms.get(((), ()))
                    if len(p.terms) != 1 or c is None:
                        raise ModelError.at("division by zero", f.loc)
                    acc = acc.scale(Fraction(1) / c)
            return acc
        if isinstance(e, Neg):
            return -self.eval(e.operand, env)
        if isinstance(e, Pow):
            return self.eval(e.base, env) ** e.exponent
        raise TypeError(e)

    @staticmethod
    def index(i: Index, env: dict) -> int:
        return env[i] if isinstance(i, str) else i

    def symbol(self, e: Symbol, env: dict) -> GradedPoly:
        if e.name in self.coords and e.name not in self.specs:
            return GradedPoly.coordinate(self.coords[e.name])
        if e.bar:
            spec = self.complex.antifield_spec(f"bar({e.name})")
        else:
            spec = self.specs[e.name]
        comp, sign = spec.canonical([self.index(i, env) for i in e.indices])
        if not sign:
            return GradedPoly()
        jet = [self.index(i, env) for i in e.jet]
        return GradedPoly.variable(spec.var(comp, jet), sign)


def field_specs(model: ModelFile) -> tuple:
    return tuple(FieldSpec(f.name, f.parity, index_groups=f.index_groups, order=i)
                 for i, f in enumerate(model.fields))


def lagrangian_of(model: ModelFile) -> GradedPoly:
    specs = {s.name: s for s in field_specs(model)}
    ev = _Evaluator(model, specs)
    return ev.summed(model.lagrangian, {})


def stage_operators(model: ModelFile, complex_: KTComplex, k: int) -> list:
    """Expand the stage-``k`` declarations into operators, one per component."""
    specs = {s.name: s for s in complex_.fields}
    ev = _Evaluator(model, specs, complex_)
    ops, seen = [], {}
    for st in model.stages:
        if st.stage != k:
            continue
        arity = len(st.indices)
        groups = ((arity, st.symmetry),) if arity else ()
        family = FieldSpec(st.name, 0, index_groups=groups)
        for comp in family.components(model.base_dim):
            env = {}
            for pos, i in enumerate(st.indices):
                if isinstance(i, str):
                    env[i] = comp[pos]
                elif i != comp[pos]:
                    break
            else:
                if (st.name, comp) in seen:
                    raise ModelError.at(f"{st.name}{list(comp)} is declared twice", st.loc)
                seen[(st.name, comp)] = st
                ops.append(StageOperator(k, st.name, ev.summed(st.expression, env), comp, groups))
        if st.symmetry == ANTISYMMETRIC and not any(
                (st.name, c) in seen for c in family.components(model.base_dim)):
            raise ModelError.at(f"{st.name} has no independent components", st.loc)
    return ops


def build_complex(model: ModelFile, validate: bool = True) -> KTComplex:
    """Turn a parsed model into a Koszul-Tate complex with all declared stages.

    Structural problems become :class:`ModelError`; with ``validate`` a
    stage whose differential fails to square to zero raises
    :class:`~ktcomplex.koszul_tate.NilpotencyError`.
    """
    cx = extend_with_antifields(field_specs(model), Density(lagrangian_of(model)), model.base_dim)
    top = max((st.stage for st in model.stages), default=-1)
    for k in range(top + 1):
        ops = stage_operators(model, cx, k)
        first = next(st for st in model.stages if st.stage == k)
        try:
            cx = register_stage(cx, k, ops, validate)
        except NilpotencyError:
            raise
        except KTError as err:
            raise ModelError.at(str(err), first.loc) from err
        except ValueError as err:
            raise ModelError.at(str(err), first.loc) from err
    return cx


def load_model(path: str) -> ModelFile:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read())


__all__ = [
    "Add", "Deriv", "Eps", "FieldDecl", "Location", "ModelError", "ModelFile", "Mul", "Neg",
    "Number", "Pow", "StageDecl", "Symbol", "build_complex", "field_specs", "format_expr",
    "format_model", "lagrangian_of", "load_model", "parse_model", "stage_operators", "tokenize",
]
