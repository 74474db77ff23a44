"""Total derivatives, Euler-Lagrange operators and prolonged vertical derivations."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Iterable, Optional

from . import linalg
from .algebra import Density, GradedPoly, JetVariable, coordinate_partial, left_partial
from .kernels import merge_vars, mul_terms, partial_monomial


def _add_into(out: dict, key, val) -> None:
    v = out.get(key, 0) + val
    if v:
        out[key] = v
    else:
        out.pop(key, None)


def _add_terms(out: dict, terms: dict) -> None:
    for k, v in terms.items():
        _add_into(out, k, v)


def total_derivative(p: GradedPoly, lam: int) -> GradedPoly:
    """``d_lam p``: explicit x-derivative plus the shift ``s_Lambda -> s_{lam+Lambda}``."""
    out = dict(coordinate_partial(p, lam).terms)
    for (base, vars_), c in p.terms.items():
        prev = None
        for v in vars_:
            if v == prev:
                continue
            prev = v
            f, rest = partial_monomial(vars_, v, False)
            sign, merged = merge_vars((v.prolong(lam),), rest)
            if sign:
                _add_into(out, (base, merged), c * (f * sign))
    return GradedPoly(out)


def total_derivative_multi(p: GradedPoly, jet: Iterable[int]) -> GradedPoly:
    for lam in jet:
        if not p.terms:
            break
        p = total_derivative(p, lam)
    return p


def euler_lagrange(L, components: Optional[Iterable[JetVariable]] = None) -> dict:
    """Variational derivatives ``E_A = sum (-1)^|Lambda| d_Lambda (d^Lambda_A L)``.

    ``components`` lists the field components (jet-free variables of antifield
    number 0); by default those occurring in ``L``.  Every jet variable is an
    independent coordinate, so each symmetric multi-index is summed once.
    """
    body = L.body if isinstance(L, Density) else L
    occurring = body.variables()
    if components is None:
        components = sorted({v.base for v in occurring if v.ant == 0})
    by_base: dict = {}
    for v in occurring:
        by_base.setdefault(v.base, []).append(v)
    out = {}
    for a in components:
        acc = GradedPoly()
        for v in sorted(by_base.get(a, ())):
            term = total_derivative_multi(left_partial(body, v), v.jet)
            acc = acc - term if len(v.jet) % 2 else acc + term
        out[a] = acc
    return out


@dataclass(frozen=True)
class GeneralizedVectorField:
    """Vertical derivation fixed by its values ``upsilon^A`` on field components.

    The prolongation acts on a jet variable ``s^A_Lambda`` by ``d_Lambda upsilon^A``;
    those prolonged coefficients are memoised per instance.
    """

    coefficients: dict
    parity: int = 1
    _jets: dict = field(default_factory=dict, compare=False, repr=False)

    def coefficient(self, v: JetVariable) -> Optional[GradedPoly]:
        """``d_Lambda upsilon^A`` for ``v = s^A_Lambda``, or None if A is not acted on."""
        hit = self._jets.get(v)
        if hit is not None:
            return hit
        c = self.coefficients.get(v.base)
        if c is None:
            return None
        if v.jet:
            parent = self.coefficient(v._replace(jet=v.jet[:-1]))
            c = total_derivative(parent, v.jet[-1])
        self._jets[v] = c
        return c

    def check_parities(self) -> list:
        """Components whose coefficient parity is not ``[A] + parity``."""
        bad = []
        for a, c in self.coefficients.items():
            if c.terms and c.parities() != {(a.odd + self.parity) & 1}:
                bad.append(a)
        return bad


def prolong_apply(upsilon: GeneralizedVectorField, p: GradedPoly, side: str = "left") -> GradedPoly:
    """Apply ``sum d_Lambda upsilon^A d^Lambda_A`` to ``p``.

    With ``side="left"`` the coefficient stands left of a graded left
    derivative; with ``side="right"`` a graded right derivative is followed by
    the coefficient, the convention of a derivation acting from the right.
    """
    right = side == "right"
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    out: dict = {}
    for (base, vars_), c in p.terms.items():
        prev = None
        for v in vars_:
            if v == prev:
                continue
            prev = v
            coeff = upsilon.coefficient(v)
            if coeff is None or not coeff.terms:
                continue
            f, rest = partial_monomial(vars_, v, right)
            mono = {(base, rest): c * f}
            prod = mul_terms(mono, coeff.terms) if right else mul_terms(coeff.terms, mono)
            _add_terms(out, prod)
    return GradedPoly(out)


def is_nilpotent(upsilon: GeneralizedVectorField, side: str = "left") -> bool:
    """True iff the odd derivation squares to zero, i.e. it kills every ``upsilon^A``."""
    if upsilon.parity % 2 == 0:
        return False
    return all(not prolong_apply(upsilon, c, side).terms for c in upsilon.coefficients.values())


def coefficient_monomials(variables: Iterable, degree_bound: int) -> list:
    """Monomial keys of degree <= ``degree_bound`` in the given variables.

    ``variables`` mixes jet variables and coordinate indices (plain ints).
    Odd variables appear at most once.
    """
    variables = sorted(set(variables), key=lambda v: (0, v, ()) if isinstance(v, int) else (1, 0, v))
    out = [((), ())]
    for d in range(1, degree_bound + 1):
        for combo in combinations_with_replacement(variables, d):
            base: dict = {}
            vs = []
            ok = True
            for item in combo:
                if isinstance(item, int):
                    base[item] = base.get(item, 0) + 1
                else:
                    if item.odd and vs and vs[-1] == item:
                        ok = False
                        break
                    vs.append(item)
            if ok:
                out.append((tuple(sorted(base.items())), tuple(vs)))
    return out


def jets_up_to(component: JetVariable, n: int, jet_bound: int) -> list:
    out = []
    for order in range(jet_bound + 1):
        for jet in combinations_with_replacement(range(1, n + 1), order):
            out.append(component._replace(jet=jet))
    return out


def is_total_divergence(D, n: int, jet_bound: int, degree_bound: int,
                        components: Optional[Iterable[JetVariable]] = None) -> Optional[list]:
    """Search ``F^1..F^n`` with ``sum_lam d_lam F^lam = D`` inside a bounded ansatz.

    The ansatz spans monomials in ``x^lam`` and field jets of order
    <= ``jet_bound`` of total degree <= ``degree_bound``.  None only means
    no witness exists inside those bounds.
    """
    body = D.body if isinstance(D, Density) else D
    if not body.terms:
        return [GradedPoly() for _ in range(n)]
    if components is None:
        components = {v.base for v in body.variables() if v.ant == 0}
    variables = [v for a in sorted(set(components)) for v in jets_up_to(a, n, jet_bound)]
    monos = coefficient_monomials(variables + list(range(1, n + 1)), degree_bound)
    parities = body.parities()
    monos = [m for m in monos if (sum(v.odd for v in m[1]) & 1) in parities]
    columns, labels = [], []
    for lam in range(1, n + 1):
        for m in monos:
            col = total_derivative(GradedPoly.monomial(m), lam).terms
            if col:
                columns.append(col)
                labels.append((lam, m))
    sol = linalg.solve(columns, body.terms)
    if sol is None:
        return None
    witness = [dict() for _ in range(n)]
    for j, c in sol.items():
        lam, m = labels[j]
        witness[lam - 1][m] = c
    return [GradedPoly(w) for w in witness]


__all__ = [
    "GeneralizedVectorField", "coefficient_monomials", "euler_lagrange", "is_nilpotent",
    "is_total_divergence", "jets_up_to", "prolong_apply", "total_derivative",
    "total_derivative_multi",
]
