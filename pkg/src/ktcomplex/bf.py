"""Topological BF theory: an even scalar ``A`` and an even (n-1)-form ``B``.

The Lagrangian is written over the independent components ``B[I]`` (``I``
strictly increasing)::

    L = sum_{mu, I} eps(mu, I) * A * d_mu B[I]

so that ``E_A = sum_{mu,I} eps(mu,I) d_mu B[I]`` and
``E_{B[I]} = -sum_mu eps(mu,I) d_mu A``, with index sums over independent
components.  Its Noether tower has one stage per form degree: stage 0 is
``Delta0[J] = d_nu bar(B)[nu,J]``, stage k >= 1 is
``Deltak[J] = d_mu bar(Delta(k-1))[mu,J]``, ending with the scalar operator of
stage n-2.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement

from . import linalg
from .algebra import ANTISYMMETRIC, Density, FieldSpec, GradedPoly, levi_civita, var
from .calculus import total_derivative, total_derivative_multi
from .koszul_tate import (
    KTComplex, Sector, StageOperator, check_nilpotency, complex_text, cycle_space,
    extend_with_antifields, noether_search, register_stage, regularity_probe, trivial_subspace,
)
from .report import FAIL, INCONCLUSIVE, PASS, CheckEntry, Report, digest

MAX_DIM = 5


@dataclass(frozen=True)
class BFModel:
    n: int
    complex: KTComplex

    @property
    def A(self) -> FieldSpec:
        return self.complex.fields[0]

    @property
    def B(self) -> FieldSpec:
        return self.complex.fields[1]


def bf_fields(n: int) -> tuple:
    A = FieldSpec("A", 0, order=0)
    B = FieldSpec("B", 0, index_groups=((n - 1, ANTISYMMETRIC),), order=1)
    return A, B


def bf_lagrangian(n: int) -> GradedPoly:
    A, B = bf_fields(n)
    body = GradedPoly()
    a = var(A.var())
    for comp in B.components(n):
        for mu in range(1, n + 1):
            s = levi_civita((mu,) + comp)
            if s:
                body = body + a * var(B.var(comp, (mu,))) * s
    return body


def _contracted_derivative(spec: FieldSpec, rest: tuple, n: int) -> GradedPoly:
    """``sum_mu d_mu spec[mu, rest]`` with components canonicalised."""
    out = GradedPoly()
    for mu in range(1, n + 1):
        comp, sign = spec.canonical((mu,) + rest)
        if sign:
            out = out + var(spec.var(comp, (mu,))) * sign
    return out


def _family_groups(count: int) -> tuple:
    return ((count, ANTISYMMETRIC),) if count else ()


def stage_operators(cx: KTComplex, k: int) -> list:
    n = cx.n
    if k == 0:
        lower = cx.antifield_spec("bar(B)")
    else:
        lower = cx.antifield_spec(f"bar(Delta{k - 1})")
    count = n - k - 2
    ops = []
    for J in combinations(range(1, n + 1), count):
        ops.append(StageOperator(k, f"Delta{k}", _contracted_derivative(lower, J, n), J,
                                 _family_groups(count)))
    return ops


def build_bf(n: int) -> BFModel:
    """Full tower with stages 0..n-2; every registration is nilpotency-checked."""
    if not 2 <= n <= MAX_DIM:
        raise ValueError(f"BF dimension must lie in 2..{MAX_DIM}, got {n}")
    cx = extend_with_antifields(bf_fields(n), Density(bf_lagrangian(n)), n)
    for k in range(n - 1):
        cx = register_stage(cx, k, stage_operators(cx, k))
    return BFModel(n, cx)


def noether_identities(model: BFModel) -> dict:
    """``d_nu E^{nu J}`` for every increasing ``J``; all must vanish."""
    cx, n = model.complex, model.n
    out = {}
    for J in combinations(range(1, n + 1), n - 2):
        acc = GradedPoly()
        for nu in range(1, n + 1):
            comp, sign = model.B.canonical((nu,) + J)
            if sign:
                acc = acc + total_derivative(cx.el[model.B.var(comp)], nu) * sign
        out[J] = acc
    return out


def stage_identities(model: BFModel, k: int) -> dict:
    """``d_mu Delta_k^{mu J}`` for the stage-k family (needs a stage above k)."""
    cx, n = model.complex, model.n
    ops = {op.component: op for op in cx.operators(k)}
    spec = cx.antifield_spec(f"bar(Delta{k})")
    out = {}
    for J in combinations(range(1, n + 1), n - k - 3):
        acc = GradedPoly()
        for mu in range(1, n + 1):
            comp, sign = spec.canonical((mu,) + J)
            if sign:
                acc = acc + total_derivative(ops[comp].expression, mu) * sign
        out[J] = acc
    return out


def _first_nonzero(polys: dict):
    for key, p in polys.items():
        if p.terms:
            return key, p
    return None


def _timed(report: Report, fn):
    t0 = time.perf_counter()
    entry = fn()
    entry.seconds = time.perf_counter() - t0
    report.add(entry)
    return entry


def _stage0_span(cx: KTComplex, sector: Sector, jet_bound: int) -> list:
    """``G * d_Xi Delta_r`` inside the one-chain ansatz (coefficients G monomial)."""
    out = []
    n = cx.n
    for op in cx.operators(0):
        for order in range(jet_bound):
            for xi in combinations_with_replacement(range(1, n + 1), order):
                d = total_derivative_multi(op.expression, xi)
                for mono in sector.coefficient_monomials():
                    t = (GradedPoly({mono: 1}) * d).terms
                    if t and all(sector.contains(key) for key in t):
                        out.append(t)
    return out


def verify_bf(n: int, jet_bound: int = 1, degree_bound: int = 0, trials: int = 4,
              seed: int = 0) -> Report:
    model = build_bf(n)
    cx = model.complex
    report = Report("bf", digest(complex_text(cx)))

    def noether():
        bad = _first_nonzero(noether_identities(model))
        if bad:
            return CheckEntry("noether_identities", FAIL, bad[1].to_text(), detail=f"J={bad[0]}")
        return CheckEntry("noether_identities", PASS,
                          detail=f"d_nu E^(nu...) = 0, components checked: {len(noether_identities(model))}")

    _timed(report, noether)
    for k in range(n - 2):
        def stage(k=k):
            ids = stage_identities(model, k)
            bad = _first_nonzero(ids)
            name = f"stage_{k}_identities"
            if bad:
                return CheckEntry(name, FAIL, bad[1].to_text(), detail=f"J={bad[0]}")
            return CheckEntry(name, PASS, detail=f"d_mu Delta{k}^(mu...) = 0, components checked: {len(ids)}")
        _timed(report, stage)

    def nilpotency():
        rep = check_nilpotency(cx)
        if not rep.passed:
            f = rep.failures()[0]
            return CheckEntry("nilpotency", FAIL, f.residual.to_text(), detail=f.generator.text())
        return CheckEntry("nilpotency", PASS,
                          detail=f"delta_{cx.top_stage}^2 = 0 on {len(rep.entries)} generators")

    _timed(report, nilpotency)

    def search():
        res = noether_search(cx, jet_bound, degree_bound)
        sector = Sector(cx, 1, jet_bound, degree_bound, -1)
        trivial = trivial_subspace(cx, sector, None)
        found = [b.terms for b in res.basis]
        span = _stage0_span(cx, sector, jet_bound)
        r_found = linalg.rank(trivial + found)
        r_span = linalg.rank(trivial + span)
        r_all = linalg.rank(trivial + found + span)
        detail = (f"basis dimension {len(res.basis)}, stage-0 span dimension "
                  f"{r_span - linalg.rank(trivial)}")
        if r_found == r_span == r_all:
            return CheckEntry("noether_search", PASS,
                              witness="; ".join(b.to_text() for b in res.basis) or None,
                              detail=detail)
        return CheckEntry("noether_search", FAIL,
                          "; ".join(b.to_text() for b in res.basis) or "0", detail=detail)

    _timed(report, search)
    for k in range(cx.top_stage + 1):
        def probe(k=k):
            rep = regularity_probe(cx, k, jet_bound, degree_bound, trials, seed)
            detail = (f"{rep.passed} of {rep.passed + len(rep.inconclusive)} cycles are "
                      f"delta_{rep.boundary_stage}-boundaries")
            if rep.inconclusive:
                return CheckEntry(f"regularity_{k}", INCONCLUSIVE,
                                  residual=rep.inconclusive[0].to_text(), detail=detail)
            return CheckEntry(f"regularity_{k}", PASS, detail=detail)
        _timed(report, probe)

    def top():
        last = cx.operators(cx.top_stage)[0]
        c = cx.antifield_of(last)
        sector = Sector(cx, c.ant, jet_bound, degree_bound, cx.top_stage)
        cols = sector.enumerate(linear_in=[c])
        cyc = cycle_space(cx, sector, cx.top_stage, cols)
        if cyc:
            return CheckEntry("top_sector", FAIL, cyc[0].to_text(),
                              detail=f"{len(cyc)} cycles linear in {c.text()}")
        return CheckEntry("top_sector", PASS,
                          detail=f"no cycle linear in {c.text()} among {len(cols)} chains")

    _timed(report, top)
    return report


__all__ = [
    "BFModel", "MAX_DIM", "bf_fields", "bf_lagrangian", "build_bf",
    "noether_identities", "stage_identities", "stage_operators", "verify_bf",
]
