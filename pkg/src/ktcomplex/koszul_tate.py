"""Antifield extension, stage operators and Koszul-Tate differentials.

A :class:`KTComplex` carries a Lagrangian system together with its tower of
stage operators.  The differential sends an antifield ``bar(s)_A`` of a field
to the Euler-Lagrange component ``E_A`` and the antifield of a stage operator
to that operator; it acts from the right, so
``delta(a*b) = (-1)^[b] delta(a)*b + a*delta(b)``.

Homology questions are answered by exact linear algebra over bounded
ansatz spaces.  A negative answer always means "nothing inside the bounds".
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Optional

from . import linalg
from .algebra import Density, FieldSpec, GradedPoly, JetVariable
from .calculus import (
    GeneralizedVectorField, coefficient_monomials, euler_lagrange, jets_up_to, prolong_apply,
)
from .kernels import merge_vars


class KTError(Exception):
    """Base class for Koszul-Tate construction errors."""


class AntifieldMismatchError(KTError):
    pass


class NilpotencyError(KTError):
    """A stage registration whose differential fails to square to zero."""

    def __init__(self, message, report):
        super().__init__(message)
        self.report = report


def _body(x) -> GradedPoly:
    return x.body if isinstance(x, Density) else x


@dataclass(frozen=True)
class StageOperator:
    """One generator ``Delta_r`` of stage ``k``.

    Operators sharing a ``name`` form a family whose antifields are the
    components ``bar(name)[component]``.
    """

    stage: int
    name: str
    expression: GradedPoly
    component: tuple = ()
    index_groups: tuple = ()

    @property
    def parity(self) -> Optional[int]:
        return self.expression.parity

    @property
    def label(self) -> str:
        if self.component:
            return f"{self.name}[{','.join(map(str, self.component))}]"
        return self.name

    def has_lower_stage_part(self) -> bool:
        """True when some term is linear in stage-(k-1) antifields with field coefficients."""
        for (_, vars_) in self.expression.terms:
            af = [v for v in vars_ if v.ant > 0]
            if len(af) == 1 and af[0].stage == self.stage - 1:
                return True
        return False


@dataclass(frozen=True)
class GeneratorCheck:
    generator: JetVariable
    stage: int
    image: GradedPoly
    residual: GradedPoly

    @property
    def passed(self) -> bool:
        return not self.residual.terms


@dataclass(frozen=True)
class NilpotencyReport:
    entries: tuple

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def failures(self) -> list:
        return [e for e in self.entries if not e.passed]


@dataclass(frozen=True)
class KTComplex:
    n: int
    fields: tuple
    lagrangian: Density
    el: dict
    antifields: tuple
    stages: tuple = ()
    max_stages: Optional[int] = None
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    # generators

    @property
    def top_stage(self) -> int:
        return len(self.stages) - 1

    def field_components(self) -> list:
        return [f.var(c) for f in self.fields for c in f.components(self.n)]

    def operators(self, stage: Optional[int] = None) -> list:
        if stage is None:
            return [op for ops in self.stages for op in ops]
        return list(self.stages[stage])

    def antifield_spec(self, name: str) -> FieldSpec:
        for spec in self.antifields:
            if spec.name == name:
                return spec
        raise KeyError(name)

    def antifield_of(self, op: StageOperator) -> JetVariable:
        return self.antifield_spec(f"bar({op.name})").var(op.component)

    def generators(self, max_stage: Optional[int] = None) -> dict:
        """Antifield generator (jet-free) -> its image under the differential."""
        if max_stage is None:
            max_stage = self.top_stage
        out = {}
        for a, e in self.el.items():
            out[self.bar(a)] = e
        for k, ops in enumerate(self.stages):
            if k > max_stage:
                break
            for op in ops:
                out[self.antifield_of(op)] = op.expression
        return out

    def bar(self, component: JetVariable) -> JetVariable:
        """Antifield ``bar(s)_A`` of a field component."""
        return JetVariable(1, component.order, f"bar({component.name})", component.component,
                           component.jet, 1 - component.odd)

    def differential(self, max_stage: Optional[int] = None) -> GeneralizedVectorField:
        """``delta_k`` for ``k = max_stage`` (``-1`` gives the plain Koszul-Tate ``delta-bar``)."""
        if max_stage is None:
            max_stage = self.top_stage
        key = ("delta", max_stage)
        hit = self._cache.get(key)
        if hit is None:
            coeffs = {a: GradedPoly() for a in self.field_components()}
            coeffs.update(self.generators(max_stage))
            hit = GeneralizedVectorField(coeffs, 1)
            self._cache[key] = hit
        return hit

    def delta(self, p, max_stage: Optional[int] = None) -> GradedPoly:
        return prolong_apply(self.differential(max_stage), _body(p), "right")


def complex_text(complex_: KTComplex) -> str:
    """Canonical text of a complex: dimension, Lagrangian and every stage operator."""
    lines = [f"n={complex_.n}", f"L={complex_.lagrangian.to_text()}"]
    for op in complex_.operators():
        lines.append(f"stage {op.stage} {op.label} = {op.expression.to_text()}")
    return "\n".join(lines)


def extend_with_antifields(fields: Iterable[FieldSpec], lagrangian, n: int,
                           max_stages: Optional[int] = None) -> KTComplex:
    """Adjoin one antifield of opposite parity per field component; no stages yet."""
    fields = tuple(fields)
    body = _body(lagrangian)
    names = [f.name for f in fields]
    if len(set(names)) != len(names) or len({f.order for f in fields}) != len(fields):
        raise ValueError("field names and declaration orders must be unique")
    for f in fields:
        if f.antifield_number != 0:
            raise ValueError(f"{f.name} is not a field (antifield number {f.antifield_number})")
    if any(v.ant > 0 for v in body.variables()):
        raise AntifieldMismatchError("the Lagrangian must not contain antifields")
    if body.terms and body.parities() != {0}:
        raise ValueError("the Lagrangian must be even")
    components = [f.var(c) for f in fields for c in f.components(n)]
    el = euler_lagrange(body, components)
    return KTComplex(n, fields, Density(body), el, tuple(f.antifield() for f in fields), (),
                     max_stages)


def _family_specs(complex_: KTComplex, k: int, operators) -> list:
    specs: dict = {}
    base_order = len([s for s in complex_.antifields if s.stage == k])
    for op in operators:
        parity = op.parity
        if parity is None:
            raise ValueError(f"stage operator {op.label} is zero")
        spec = specs.get(op.name)
        new = FieldSpec(f"bar({op.name})", 1 - parity, k + 2,
                        op.index_groups or ((len(op.component), "none"),) if op.component else (),
                        "stage_antifield", k,
                        spec.order if spec else base_order + len(specs))
        if spec is not None and (spec.parity != new.parity or spec.index_groups != new.index_groups):
            raise ValueError(f"operators of family {op.name} disagree in parity or indices")
        specs[op.name] = new
    return list(specs.values())


def register_stage(complex_: KTComplex, k: int, operators: Iterable[StageOperator],
                   validate: bool = True) -> KTComplex:
    """Adjoin the stage-``k`` operators and their antifields.

    With ``validate`` (the default) the extended differential must square to
    zero on every new antifield; otherwise :class:`NilpotencyError` carries
    the residuals.
    """
    operators = tuple(operators)
    if k != len(complex_.stages):
        raise KTError(f"stage {k} registered out of order; next stage is {len(complex_.stages)}")
    if complex_.max_stages is not None and k >= complex_.max_stages:
        raise KTError(f"stage cap of {complex_.max_stages} reached")
    known = set(complex_.generators())
    for op in operators:
        if op.stage != k:
            raise AntifieldMismatchError(f"{op.label} declared for stage {op.stage}, registered at {k}")
        expr = op.expression
        if not expr.is_homogeneous():
            raise ValueError(f"stage operator {op.label} is not parity-homogeneous")
        ants = expr.antifield_numbers()
        if ants != {k + 1}:
            raise AntifieldMismatchError(
                f"{op.label} has antifield numbers {sorted(ants)}; stage {k} needs {k + 1}")
        for v in expr.variables():
            if v.ant > 0 and v.base not in known:
                raise AntifieldMismatchError(f"{op.label} uses unregistered antifield {v.text()}")
        if k == 0:
            for (_, vars_) in expr.terms:
                if sum(1 for v in vars_ if v.ant > 0) != 1:
                    raise AntifieldMismatchError(f"{op.label} must be linear in the field antifields")
        elif not op.has_lower_stage_part():
            raise AntifieldMismatchError(f"{op.label} has no part linear in stage-{k - 1} antifields")
    specs = _family_specs(complex_, k, operators)
    new = replace(complex_, antifields=complex_.antifields + tuple(specs),
                  stages=complex_.stages + (operators,), _cache={})
    if validate:
        entries = []
        for op in operators:
            image = op.expression
            entries.append(GeneratorCheck(new.antifield_of(op), k, image, new.delta(image)))
        report = NilpotencyReport(tuple(entries))
        bad = report.failures()
        if bad:
            first = bad[0]
            raise NilpotencyError(
                f"stage {k}: delta^2 {first.generator.text()} = {first.residual.to_text()}", report)
    return new


def kt_differential(complex_: KTComplex) -> GeneralizedVectorField:
    return complex_.differential()


def check_nilpotency(complex_: KTComplex) -> NilpotencyReport:
    """``delta(delta(g))`` for every antifield generator ``g``, stage by stage."""
    entries = []
    for a, e in complex_.el.items():
        entries.append(GeneratorCheck(complex_.bar(a), -1, e, complex_.delta(e)))
    for k, ops in enumerate(complex_.stages):
        for op in ops:
            entries.append(GeneratorCheck(complex_.antifield_of(op), k, op.expression,
                                          complex_.delta(op.expression)))
    return NilpotencyReport(tuple(entries))


def _homogeneous_ant(p: GradedPoly) -> Optional[int]:
    ants = p.antifield_numbers()
    if len(ants) > 1:
        raise ValueError(f"chain is not homogeneous in antifield number: {sorted(ants)}")
    return ants.pop() if ants else None


def is_cycle(phi, complex_: KTComplex, max_stage: Optional[int] = None) -> bool:
    body = _body(phi)
    _homogeneous_ant(body)
    return not complex_.delta(body, max_stage).terms


# bounded chain spaces


@dataclass
class Sector:
    """Monomials of a fixed antifield number inside jet/degree bounds.

    A monomial is a product of a coefficient part (coordinates and field jets,
    total degree <= ``degree_bound``) and antifield jets of stage <=
    ``max_stage``; every jet has order <= ``jet_bound``.
    """

    complex: KTComplex
    ant: int
    jet_bound: int
    degree_bound: int
    max_stage: int
    allowed: Optional[frozenset] = None

    def __post_init__(self):
        cx = self.complex
        n = cx.n
        gens = [g for g in cx.generators(self.max_stage) if g.stage <= self.max_stage]
        if self.allowed is not None:
            gens = [g for g in gens if g in self.allowed]
        self.generator_set = frozenset(gens)
        self.antifield_vars = sorted(v for g in gens for v in jets_up_to(g, n, self.jet_bound))
        self.field_vars = sorted(v for a in cx.field_components() for v in jets_up_to(a, n, self.jet_bound))
        self._coeff = None

    def contains(self, key) -> bool:
        base, vars_ = key
        deg = sum(e for _, e in base)
        ant = 0
        for v in vars_:
            if len(v.jet) > self.jet_bound:
                return False
            if v.ant == 0:
                deg += 1
            else:
                if v.base not in self.generator_set:
                    return False
                ant += v.ant
        return deg <= self.degree_bound and ant == self.ant

    def coefficient_monomials(self) -> list:
        if self._coeff is None:
            self._coeff = coefficient_monomials(
                self.field_vars + list(range(1, self.complex.n + 1)), self.degree_bound)
        return self._coeff

    def antifield_parts(self, linear_in: Optional[Iterable[JetVariable]] = None) -> list:
        """Sorted antifield-variable tuples with total antifield number ``ant``."""
        pool = self.antifield_vars
        if linear_in is not None:
            gens = set(linear_in)
            return [(v,) for v in pool if v.base in gens and v.ant == self.ant]
        out = []

        def rec(start, remaining, acc):
            if remaining == 0:
                out.append(tuple(acc))
                return
            for i in range(start, len(pool)):
                v = pool[i]
                if v.ant > remaining:
                    continue
                if v.odd and acc and acc[-1] == v:
                    continue
                acc.append(v)
                rec(i if not v.odd else i + 1, remaining - v.ant, acc)
                acc.pop()

        rec(0, self.ant, [])
        return out

    def enumerate(self, linear_in=None) -> list:
        parts = self.antifield_parts(linear_in)
        return [(base, cv + part) for part in parts for base, cv in self.coefficient_monomials()]

    def random_monomial(self, rng: random.Random, attempts: int = 200):
        pool = self.antifield_vars
        coeffs = self.coefficient_monomials()
        for _ in range(attempts):
            remaining = self.ant
            picked = []
            while remaining > 0:
                choices = [v for v in pool if v.ant <= remaining]
                if not choices:
                    break
                v = rng.choice(choices)
                picked.append(v)
                remaining -= v.ant
            if remaining:
                continue
            sign, vars_ = merge_vars((), ())
            ok = True
            for v in picked:
                sign, vars_ = merge_vars(vars_, (v,))
                if not sign:
                    ok = False
                    break
            if not ok:
                continue
            base, cv = rng.choice(coeffs)
            return (base, cv + vars_)
        return None


class _Preimages:
    """Reverse lookup: which sector monomials can reach a given image monomial."""

    def __init__(self, complex_: KTComplex, sector: Sector, max_stage: int):
        self.sector = sector
        diff = complex_.differential(max_stage)
        self.by_anchor: dict = {}
        self.unanchored = []
        for g in sector.antifield_vars:
            img = diff.coefficient(g)
            if img is None:
                continue
            for (tb, tv) in img.terms:
                entry = (g, tb, tv)
                if tv:
                    self.by_anchor.setdefault(tv[-1], []).append(entry)
                else:
                    self.unanchored.append(entry)

    def __call__(self, row) -> set:
        base, vars_ = row
        cands = list(self.unanchored)
        for v in set(vars_):
            cands.extend(self.by_anchor.get(v, ()))
        out = set()
        for g, tb, tv in cands:
            rest = _divide_vars(vars_, tv)
            if rest is None:
                continue
            nb = _divide_base(base, tb)
            if nb is None:
                continue
            sign, merged = merge_vars(rest, (g,))
            if not sign:
                continue
            key = (nb, merged)
            if self.sector.contains(key):
                out.add(key)
        return out


def _divide_vars(vars_, tv):
    rest = list(vars_)
    for v in tv:
        try:
            rest.remove(v)
        except ValueError:
            return None
    return tuple(rest)


def _divide_base(base, tb):
    if not tb:
        return base
    d = dict(base)
    for i, e in tb:
        if d.get(i, 0) < e:
            return None
        d[i] -= e
    return tuple(sorted((i, e) for i, e in d.items() if e))


class BoundExceeded(KTError):
    pass


def _closure(complex_, sector, max_stage, seed_rows=(), seed_cols=(), limit=200_000):
    """Connected block of the bipartite column/row graph of ``delta`` on ``sector``."""
    pre = _Preimages(complex_, sector, max_stage)
    diff = complex_.differential(max_stage)
    images: dict = {}
    rows_seen: set = set()
    col_queue = list(seed_cols)
    row_queue = list(seed_rows)
    while col_queue or row_queue:
        while row_queue:
            r = row_queue.pop()
            if r in rows_seen:
                continue
            rows_seen.add(r)
            for c in pre(r):
                if c not in images:
                    col_queue.append(c)
        while col_queue:
            c = col_queue.pop()
            if c in images:
                continue
            img = prolong_apply(diff, GradedPoly({c: Fraction(1)}), "right").terms
            images[c] = img
            if len(images) > limit:
                raise BoundExceeded(f"ansatz block exceeds {limit} columns")
            for r in img:
                if r not in rows_seen:
                    row_queue.append(r)
    cols = sorted(images)
    return cols, [images[c] for c in cols]


def is_boundary(phi, complex_: KTComplex, jet_bound: int, degree_bound: int,
                max_stage: Optional[int] = None, check_cycle: bool = True) -> Optional[GradedPoly]:
    """Witness ``Psi`` with ``delta Psi = phi`` inside the bounds, else None."""
    body = _body(phi)
    if not body.terms:
        return GradedPoly()
    if max_stage is None:
        max_stage = complex_.top_stage
    m = _homogeneous_ant(body)
    if check_cycle and not is_cycle(body, complex_, max_stage):
        raise ValueError("is_boundary needs a cycle")
    sector = Sector(complex_, m + 1, jet_bound, degree_bound, max_stage)
    cols, images = _closure(complex_, sector, max_stage, seed_rows=list(body.terms))
    sol = linalg.solve(images, body.terms)
    if sol is None:
        return None
    return GradedPoly({cols[j]: c for j, c in sol.items() if c})


# Noether identities


@dataclass(frozen=True)
class NoetherBasis:
    basis: tuple
    cycle_dim: int
    trivial_dim: int
    ansatz_size: int


def trivial_subspace(complex_, sector_in: Sector, allowed) -> list:
    """delta-bar images of quadratic antifield chains that land inside ``sector_in``."""
    psi = Sector(complex_, 2, sector_in.jet_bound, sector_in.degree_bound, -1, allowed)
    cols = psi.enumerate()
    diff = complex_.differential(-1)
    images = [prolong_apply(diff, GradedPoly({c: Fraction(1)}), "right").terms for c in cols]
    outside = [{k: v for k, v in img.items() if not sector_in.contains(k)} for img in images]
    out = []
    for vec in linalg.nullspace(outside):
        t = linalg.combine(images, vec)
        if t:
            out.append(t)
    return out


def noether_search(complex_: KTComplex, jet_bound: int, degree_bound: int,
                   components: Optional[Iterable[JetVariable]] = None) -> NoetherBasis:
    """Basis of one-cycles ``sum Phi^{A,Lambda} bar(s)_{Lambda A}`` modulo trivial ones.

    ``components`` restricts the antifields to those of the listed field
    components.
    """
    allowed = None
    if components is not None:
        allowed = frozenset(complex_.bar(a) for a in components)
    sector = Sector(complex_, 1, jet_bound, degree_bound, -1, allowed)
    cols = sector.enumerate()
    diff = complex_.differential(-1)
    images = [prolong_apply(diff, GradedPoly({c: Fraction(1)}), "right").terms for c in cols]
    cycles = [{cols[j]: c for j, c in vec.items()} for vec in linalg.nullspace(images)]
    trivial = trivial_subspace(complex_, sector, allowed)
    keep = linalg.independent_modulo(cycles, trivial)
    basis = tuple(GradedPoly(cycles[i]) for i in keep)
    return NoetherBasis(basis, len(cycles), linalg.rank(trivial), len(cols))


def cycle_space(complex_: KTComplex, sector: Sector, max_stage: int, columns=None) -> list:
    """Kernel of ``delta`` restricted to ``columns`` (default: the whole sector)."""
    cols = sector.enumerate() if columns is None else list(columns)
    diff = complex_.differential(max_stage)
    images = [prolong_apply(diff, GradedPoly({c: Fraction(1)}), "right").terms for c in cols]
    return [GradedPoly({cols[j]: c for j, c in vec.items()}) for vec in linalg.nullspace(images)]


# regularity


@dataclass(frozen=True)
class ProbeReport:
    k: int
    boundary_stage: int
    random_cycles: int
    kernel_cycles: int
    passed: int
    inconclusive: tuple

    @property
    def ok(self) -> bool:
        return not self.inconclusive


def regularity_probe(complex_: KTComplex, k: int, jet_bound: int, degree_bound: int,
                     trials: int = 10, seed: int = 0, extra_cycles: Iterable = (),
                     exhaustive: bool = False) -> ProbeReport:
    """Test that delta_k-cycles of antifield number k+3 are delta_(k+1)-boundaries.

    Cycles come from ``delta_k`` of random chains, from kernel bases of
    ``delta_k`` on ``trials`` randomly seeded ansatz blocks, and from
    ``extra_cycles``; ``exhaustive`` replaces the seeded blocks by the kernel
    of ``delta_k`` on the whole bounded sector.  Once the tower is complete
    (k+1 beyond the top stage) boundaries are taken for the top differential.  A cycle with no witness
    inside the bounds is reported as inconclusive.
    """
    if k < 0 or k > complex_.top_stage:
        raise ValueError(f"stage {k} is not registered")
    bstage = min(k + 1, complex_.top_stage)
    rng = random.Random(seed)
    cyc_sector = Sector(complex_, k + 3, jet_bound, degree_bound, k)
    src_sector = Sector(complex_, k + 4, jet_bound, degree_bound, k)
    cycles = []
    for _ in range(trials):
        terms = {}
        for _ in range(rng.randint(1, 3)):
            key = src_sector.random_monomial(rng)
            if key is not None:
                terms[key] = Fraction(rng.choice([-3, -2, -1, 1, 2, 3]), rng.choice([1, 2]))
        phi = complex_.delta(GradedPoly(terms), k)
        if phi.terms:
            cycles.append(phi)
    n_random = len(cycles)
    seen_blocks: set = set()
    if exhaustive:
        cycles.extend(cycle_space(complex_, cyc_sector, k))
    for _ in range(0 if exhaustive else trials):
        c0 = cyc_sector.random_monomial(rng)
        if c0 is None or c0 in seen_blocks:
            continue
        cols, images = _closure(complex_, cyc_sector, k, seed_cols=[c0])
        seen_blocks.update(cols)
        for vec in linalg.nullspace(images):
            cycles.append(GradedPoly({cols[j]: c for j, c in vec.items()}))
    n_kernel = len(cycles) - n_random
    cycles.extend(_body(c) for c in extra_cycles)
    passed, bad = 0, []
    for phi in cycles:
        if is_boundary(phi, complex_, jet_bound, degree_bound, bstage, check_cycle=False) is None:
            bad.append(phi)
        else:
            passed += 1
    return ProbeReport(k, bstage, n_random, n_kernel, passed, tuple(bad))


__all__ = [
    "AntifieldMismatchError", "BoundExceeded", "GeneratorCheck", "KTComplex", "KTError",
    "NilpotencyError", "NilpotencyReport", "NoetherBasis", "ProbeReport", "Sector",
    "StageOperator", "check_nilpotency", "complex_text", "cycle_space", "extend_with_antifields",
    "is_boundary", "is_cycle", "kt_differential", "noether_search", "register_stage",
    "regularity_probe", "trivial_subspace",
]
