"""Exact graded polynomial algebra over jet variables.

Polynomials have exact rational coefficients and live in a single coordinate
chart: they may depend polynomially on the base coordinates ``x^1..x^n`` and
on finitely many jet variables ``s^A_Lambda``.  Odd variables anticommute and
square to zero; every product is brought to a canonical factor order, picking
up the Koszul sign on the way.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Iterable, NamedTuple, Optional, Union

from .kernels import merge_base, merge_vars, mul_terms, partial_terms

EVEN, ODD = 0, 1
NONE, ANTISYMMETRIC = "none", "antisymmetric"

Scalar = Union[int, Fraction]


def multi_index(*indices: int) -> tuple:
    """Symmetric multi-index: the sorted tuple of base-coordinate indices."""
    return tuple(sorted(indices))


def merge_index(jet: tuple, lam: int) -> tuple:
    return tuple(sorted(jet + (lam,)))


def permutation_sign(seq) -> int:
    """Sign of the permutation sorting ``seq``; 0 if it has repeated entries."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def levi_civita(indices) -> int:
    """Levi-Civita symbol on ``(1..n)`` as an exact integer."""
    return permutation_sign(indices)


class JetVariable(NamedTuple):
    """A jet coordinate ``s^A_Lambda``.

    Tuple order is the canonical variable order: antifield number, field
    declaration order, name, component, then the jet multi-index.  The last
    slot carries the Grassmann parity and never decides an ordering.
    """

    ant: int
    order: int
    name: str
    component: tuple
    jet: tuple
    odd: int

    @property
    def parity(self) -> int:
        return self.odd

    @property
    def stage(self) -> int:
        """-1 for antifields of fields, k for the antifields of stage-k operators."""
        return -1 if self.ant <= 1 else self.ant - 2

    @property
    def base(self) -> "JetVariable":
        return self._replace(jet=()) if self.jet else self

    def prolong(self, lam: int) -> "JetVariable":
        return self._replace(jet=merge_index(self.jet, lam))

    def with_jet(self, jet: Iterable[int]) -> "JetVariable":
        return self._replace(jet=tuple(sorted(jet)))

    def text(self) -> str:
        s = self.name
        if self.component:
            s += "[" + ",".join(map(str, self.component)) + "]"
        if self.jet:
            s += "_(" + ",".join(map(str, self.jet)) + ")"
        return s

    def __repr__(self) -> str:
        return self.text()


class Coord(NamedTuple):
    """Explicit base-coordinate factor ``(x^index)^power``."""

    index: int
    power: int = 1


def _enumerate_group(count: int, symmetry: str, n: int):
    if symmetry == ANTISYMMETRIC:
        return list(combinations(range(1, n + 1), count))
    return list(product(range(1, n + 1), repeat=count))


@dataclass(frozen=True)
class FieldSpec:
    name: str
    parity: int
    antifield_number: int = 0
    index_groups: tuple = ()
    role: str = "field"
    stage: Optional[int] = None
    order: int = 0

    def __post_init__(self):
        if self.parity not in (EVEN, ODD):
            raise ValueError(f"parity must be 0 or 1, got {self.parity!r}")
        groups = tuple((int(c), s) for c, s in self.index_groups)
        for _, sym in groups:
            if sym not in (NONE, ANTISYMMETRIC):
                raise ValueError(f"unknown index symmetry {sym!r}")
        object.__setattr__(self, "index_groups", groups)

    @property
    def n_indices(self) -> int:
        return sum(c for c, _ in self.index_groups)

    def components(self, n: int) -> list:
        """Independent component tuples (antisymmetric groups strictly increasing)."""
        parts = [_enumerate_group(c, s, n) for c, s in self.index_groups]
        return [sum(p, ()) for p in product(*parts)] if parts else [()]

    def canonical(self, component) -> tuple:
        """Return ``(canonical_component, sign)``; sign 0 when the component vanishes."""
        component = tuple(component)
        if len(component) != self.n_indices:
            raise ValueError(
                f"{self.name} takes {self.n_indices} indices, got {len(component)}")
        out, sign, pos = [], 1, 0
        for count, sym in self.index_groups:
            chunk = component[pos:pos + count]
            pos += count
            if sym == ANTISYMMETRIC:
                s = permutation_sign(chunk)
                if s == 0:
                    return chunk, 0
                sign *= s
                chunk = tuple(sorted(chunk))
            out.extend(chunk)
        return tuple(out), sign

    def var(self, component=(), jet=()) -> JetVariable:
        return JetVariable(self.antifield_number, self.order, self.name,
                           tuple(component), tuple(sorted(jet)), self.parity)

    def antifield(self) -> "FieldSpec":
        return FieldSpec(f"bar({self.name})", 1 - self.parity, 1, self.index_groups,
                         "antifield", -1, self.order)


class Monomial(NamedTuple):
    coeff: Fraction
    base: tuple
    vars: tuple

    @property
    def key(self) -> tuple:
        return (self.base, self.vars)


def _frac(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, (int, str)):
        return Fraction(c)
    raise TypeError(f"coefficients must be exact rationals, got {type(c).__name__}")


def normalize(factors, coeff: Scalar = 1) -> Optional[Monomial]:
    """Canonical monomial equal to the ordered product of ``factors``, or None if zero."""
    c = _frac(coeff)
    if not c:
        return None
    base: tuple = ()
    vars_: tuple = ()
    for f in factors:
        if isinstance(f, Coord):
            if f.power:
                base = merge_base(base, ((f.index, f.power),))
            continue
        sign, vars_ = merge_vars(vars_, (f,))
        if not sign:
            return None
        if sign < 0:
            c = -c
    return Monomial(c, base, vars_)


def _monomial_order(key):
    base, vars_ = key
    return (len(vars_) + sum(e for _, e in base), vars_, base)


def _coeff_text(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


class GradedPoly:
    """Immutable graded-commutative polynomial; ``terms`` maps ``(base, vars)`` to a Fraction."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Optional[dict] = None):
        self.terms = terms if terms is not None else {}
        self._hash = None

    # construction

    @classmethod
    def constant(cls, c: Scalar) -> "GradedPoly":
        c = _frac(c)
        return cls({((), ()): c} if c else {})

    @classmethod
    def variable(cls, v: JetVariable, coeff: Scalar = 1) -> "GradedPoly":
        c = _frac(coeff)
        return cls({((), (v,)): c} if c else {})

    @classmethod
    def coordinate(cls, index: int, power: int = 1) -> "GradedPoly":
        return cls({(((index, power),) if power else (), ()): Fraction(1)})

    @classmethod
    def from_monomials(cls, monomials: Iterable[Monomial]) -> "GradedPoly":
        out: dict = {}
        for m in monomials:
            if m is None:
                continue
            v = out.get(m.key, 0) + m.coeff
            if v:
                out[m.key] = v
            else:
                out.pop(m.key, None)
        return cls(out)

    @classmethod
    def monomial(cls, key: tuple, coeff: Scalar = 1) -> "GradedPoly":
        return cls({key: _frac(coeff)})

    # arithmetic

    def _coerce(self, other) -> Optional["GradedPoly"]:
        if isinstance(other, GradedPoly):
            return other
        if isinstance(other, (int, Fraction)):
            return GradedPoly.constant(other)
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        if not other.terms:
            return self
        if not self.terms:
            return other
        out = dict(self.terms)
        for k, c in other.terms.items():
            v = out.get(k, 0) + c
            if v:
                out[k] = v
            else:
                out.pop(k, None)
        return GradedPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return GradedPoly({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def scale(self, c: Scalar) -> "GradedPoly":
        c = _frac(c)
        if not c:
            return GradedPoly()
        return GradedPoly({k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, GradedPoly):
            return NotImplemented
        return mul(self, other)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative powers are not polynomial")
        out = GradedPoly.constant(1)
        for _ in range(e):
            out = out * self
        return out

    # comparison

    def __eq__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"GradedPoly({self.to_text()})"

    # inspection

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def parities(self) -> set:
        return {sum(v.odd for v in vars_) & 1 for (_, vars_) in self.terms}

    def is_homogeneous(self) -> bool:
        return len(self.parities()) <= 1

    @property
    def parity(self) -> Optional[int]:
        """Parity of a homogeneous polynomial; None for zero (compatible with any)."""
        ps = self.parities()
        if len(ps) > 1:
            raise ValueError("polynomial is not parity-homogeneous")
        return ps.pop() if ps else None

    def antifield_numbers(self) -> set:
        return {sum(v.ant for v in vars_) for (_, vars_) in self.terms}

    def variables(self) -> set:
        return {v for (_, vars_) in self.terms for v in vars_}

    def coordinates(self) -> set:
        return {i for (base, _) in self.terms for i, _ in base}

    def sorted_terms(self) -> list:
        return [(k, self.terms[k]) for k in sorted(self.terms, key=_monomial_order)]

    def monomials(self) -> list:
        return [Monomial(c, b, v) for (b, v), c in self.sorted_terms()]

    def coefficient(self, key: tuple) -> Fraction:
        return self.terms.get(key, Fraction(0))

    def to_text(self, coord_names=None) -> str:
        if not self.terms:
            return "0"
        parts = []
        for i, ((base, vars_), c) in enumerate(self.sorted_terms()):
            factors = [_coeff_text(abs(c))]
            for idx, e in base:
                name = coord_names[idx - 1] if coord_names else f"x{idx}"
                factors.append(name if e == 1 else f"{name}^{e}")
            k = 0
            while k < len(vars_):
                v = vars_[k]
                e = 1
                while k + e < len(vars_) and vars_[k + e] == v:
                    e += 1
                factors.append(v.text() if e == 1 else f"{v.text()}^{e}")
                k += e
            body = "*".join(factors)
            if i == 0:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append((" - " if c < 0 else " + ") + body)
        return "".join(parts)


def mul(p: GradedPoly, q: GradedPoly) -> GradedPoly:
    """Graded-commutative product with Koszul signs."""
    if not p.terms or not q.terms:
        return GradedPoly()
    return GradedPoly(mul_terms(p.terms, q.terms))


def left_partial(p: GradedPoly, v: JetVariable) -> GradedPoly:
    """Graded left derivative: bring ``v`` to the far left, then strike it."""
    return GradedPoly(partial_terms(p.terms, v, False))


def right_partial(p: GradedPoly, v: JetVariable) -> GradedPoly:
    """Graded right derivative: bring ``v`` to the far right, then strike it."""
    return GradedPoly(partial_terms(p.terms, v, True))


def coordinate_partial(p: GradedPoly, index: int) -> GradedPoly:
    """Derivative with respect to the explicit base coordinate ``x^index``."""
    out: dict = {}
    for (base, vars_), c in p.terms.items():
        for pos, (i, e) in enumerate(base):
            if i != index:
                continue
            nb = base[:pos] + (((i, e - 1),) if e > 1 else ()) + base[pos + 1:]
            key = (nb, vars_)
            val = out.get(key, 0) + c * e
            if val:
                out[key] = val
            else:
                out.pop(key, None)
    return GradedPoly(out)


def evaluate(p: GradedPoly, values: dict, coords: Optional[dict] = None,
             default: Optional[Scalar] = None) -> GradedPoly:
    """Substitute rationals for even variables (and coordinates).

    Even variables missing from ``values`` are replaced by ``default`` when
    one is given and kept otherwise.  Odd variables are never substituted.
    """
    coords = coords or {}
    out: dict = {}
    for (base, vars_), c in p.terms.items():
        nb = []
        for i, e in base:
            if i in coords:
                c = c * _frac(coords[i]) ** e
            else:
                nb.append((i, e))
        kept = []
        for v in vars_:
            if v.odd:
                kept.append(v)
            elif v in values:
                c = c * _frac(values[v])
            elif default is not None:
                c = c * _frac(default)
            else:
                kept.append(v)
        if not c:
            continue
        key = (tuple(nb), tuple(kept))
        val = out.get(key, 0) + c
        if val:
            out[key] = val
        else:
            out.pop(key, None)
    return GradedPoly(out)


@dataclass(frozen=True)
class Density:
    """A graded density ``body * omega``; the volume form stays implicit."""

    body: GradedPoly = field(default_factory=GradedPoly)

    def to_text(self, coord_names=None) -> str:
        return self.body.to_text(coord_names)


def var(v: JetVariable) -> GradedPoly:
    return GradedPoly.variable(v)


def const(c: Scalar) -> GradedPoly:
    return GradedPoly.constant(c)


__all__ = [
    "ANTISYMMETRIC", "Coord", "Density", "EVEN", "FieldSpec", "GradedPoly", "JetVariable",
    "Monomial", "NONE", "ODD", "const", "coordinate_partial", "evaluate", "left_partial",
    "levi_civita", "merge_index", "mul", "multi_index", "normalize", "permutation_sign",
    "right_partial", "var",
]
