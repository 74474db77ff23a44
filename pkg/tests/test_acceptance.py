"""Acceptance criteria 1-9, one test each.

Every test records a line "[PASS|FAIL] criterion N: ..." that is printed in
the pytest terminal summary (and immediately with ``-s``).  All checks are
exact; timings are asserted against the stated budgets.
"""

import random
import time
from contextlib import contextmanager
from dataclasses import replace
from fractions import Fraction
from importlib import resources

import pytest

from conftest import ACCEPTANCE_LINES
from ktcomplex.algebra import FieldSpec, GradedPoly, evaluate, left_partial, right_partial
from ktcomplex.bf import build_bf, stage_operators
from ktcomplex.calculus import (
    GeneralizedVectorField, euler_lagrange, prolong_apply, total_derivative,
)
from ktcomplex.cli import main
from ktcomplex.koszul_tate import (
    NilpotencyError, Sector, check_nilpotency, extend_with_antifields, is_boundary,
    noether_search, register_stage, regularity_probe,
)

P = GradedPoly.variable
MODELS = resources.files("ktcomplex") / "models"


@contextmanager
def criterion(number: int, title: str, budget: float = None):
    """Time a criterion, record its outcome line and enforce the runtime budget."""
    t0 = time.perf_counter()
    facts = []
    status = "FAIL"
    try:
        yield facts
        elapsed = time.perf_counter() - t0
        if budget is not None:
            assert elapsed < budget, f"took {elapsed:.1f} s, budget {budget} s"
        status = "PASS"
    finally:
        elapsed = time.perf_counter() - t0
        detail = "; ".join(facts)
        line = f"[{status}] criterion {number}: {title} ({elapsed:.2f} s)"
        if detail:
            line += f" -- {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)


# random generators shared by criteria 4 and 5

y, z = FieldSpec("y", 0, order=0), FieldSpec("z", 0, order=1)
c, e = FieldSpec("c", 1, order=2), FieldSpec("e", 1, order=3)
FIELDS = (y, z, c, e)
N = 2


def jets(max_order):
    out = [()]
    if max_order >= 1:
        out += [(1,), (2,)]
    if max_order >= 2:
        out += [(1, 1), (1, 2), (2, 2)]
    return out


def random_monomial(rng, max_order, max_degree, parity=None, coords=True):
    variables = [f.var((), j) for f in FIELDS for j in jets(max_order)]
    factors = [rng.choice(variables) for _ in range(rng.randint(0, max_degree))]
    if parity is not None and sum(v.odd for v in factors) % 2 != parity:
        if factors and rng.random() < 0.5:
            factors.pop()
        else:
            factors.append(rng.choice([v for v in variables if v.odd]))
        if sum(v.odd for v in factors) % 2 != parity:
            factors.append(rng.choice([v for v in variables if v.odd]))
    p = GradedPoly.constant(Fraction(rng.choice([-3, -2, -1, 1, 2, 5]), rng.choice([1, 2, 3])))
    for v in factors:
        p = p * P(v)
    if coords and rng.random() < 0.3:
        p = p * GradedPoly.coordinate(rng.randint(1, N))
    return p


def random_poly(rng, max_order=1, max_degree=3, parity=None, terms=3, coords=True):
    p = GradedPoly()
    for _ in range(rng.randint(1, terms)):
        p = p + random_monomial(rng, max_order, max_degree, parity, coords)
    return p


def random_homogeneous(rng, **kw):
    while True:
        parity = rng.randint(0, 1)
        p = random_poly(rng, parity=parity, **kw)
        if p.terms:
            return parity, p


def random_vector_field(rng):
    parity = rng.randint(0, 1)
    coeffs = {}
    for f in FIELDS:
        if rng.random() < 0.7:
            a = f.var()
            coeffs[a] = random_poly(rng, 1, 2, (a.odd + parity) % 2, terms=2)
    return GeneralizedVectorField(coeffs, parity)


# criteria


@pytest.mark.parametrize("n, budget", [(2, 5.0), (3, 5.0), (4, 60.0)])
def test_criterion_1_bf_tower_verification(n, budget, capsys):
    with criterion(1, f"bf --dim {n} passes every check", budget) as facts:
        code = main(["bf", "--dim", str(n)])
        out = capsys.readouterr().out
        summary = out.strip().splitlines()[-1]
        facts.append(summary)
        assert code == 0
        assert ", 0 fail, 0 inconclusive" in summary
        names = [line.split("] ")[1].split(":")[0] for line in out.splitlines()
                 if line.startswith("[pass]")]
        expected = ["noether_identities"] + [f"stage_{k}_identities" for k in range(n - 2)]
        assert names[:len(expected)] == expected
        assert "nilpotency" in names


def test_criterion_2_noether_search_recovery():
    with criterion(2, "BF n=2 Noether basis is one-dimensional and proportional to "
                      "d_mu bar(B)^mu", 5.0) as facts:
        cx = build_bf(2).complex
        res = noether_search(cx, 1, 0)
        facts.append(f"basis dimension {len(res.basis)}")
        assert len(res.basis) == 1
        bbar = cx.antifield_spec("bar(B)")
        expected = P(bbar.var((1,), (1,))) + P(bbar.var((2,), (2,)))
        (found,) = res.basis
        ratios = {found.terms.get(k, 0) / v for k, v in expected.terms.items()}
        facts.append(f"generator {found.to_text()}")
        assert set(found.terms) == set(expected.terms) and len(ratios) == 1


def test_criterion_3_scalar_sector_emptiness():
    with criterion(3, "no Noether identities for the free scalar or the BF scalar sector",
                   5.0) as facts:
        ys = FieldSpec("y", 0)
        free = extend_with_antifields(
            [ys], GradedPoly.constant(Fraction(1, 2)) * P(ys.var((), (1,))) ** 2, 1)
        bf = build_bf(2)
        sizes = []
        for jet in range(3):
            for degree in range(2):
                r1 = noether_search(free, jet, degree)
                r2 = noether_search(bf.complex, jet, degree, components=[bf.A.var()])
                assert r1.basis == () and r2.basis == ()
                sizes.append(r1.ansatz_size + r2.ansatz_size)
        facts.append(f"6 bound pairs, {sum(sizes)} ansatz columns in total, all bases empty")


def test_criterion_4_variational_oracle():
    with criterion(4, "euler_lagrange annihilates 100 random total divergences", 30.0) as facts:
        rng = random.Random(4)
        components = [f.var() for f in FIELDS]
        zero = 0
        parities = set()
        for _ in range(100):
            parity = rng.randint(0, 1)
            parities.add(parity)
            D = GradedPoly()
            for lam in range(1, N + 1):
                # F of jet order <= 1 and degree <= 2, so D has jet order <= 2
                D = D + total_derivative(random_poly(rng, 1, 2, parity, terms=3), lam)
            el = euler_lagrange(D, components)
            zero += all(not v.terms for v in el.values())
        facts.append(f"{zero}/100 zero, parities {sorted(parities)}")
        assert zero == 100


def test_criterion_5_algebraic_properties():
    with criterion(5, "graded algebra and derivation laws on >= 100 instances each") as facts:
        rng = random.Random(5)
        counts = dict.fromkeys(
            ["sign_law", "odd_square", "associativity", "d_symmetry", "left_leibniz",
             "right_leibniz", "prolonged_left_leibniz", "prolonged_right_leibniz"], 0)
        variables = [f.var((), j) for f in FIELDS for j in jets(2)]
        for _ in range(120):
            (pa, a), (pb, b) = random_homogeneous(rng), random_homogeneous(rng)
            cpoly = random_poly(rng)
            assert a * b == (b * a) * (-1 if pa * pb else 1)
            counts["sign_law"] += 1
            odd = random_poly(rng, parity=1)
            assert not (odd * odd).terms
            counts["odd_square"] += 1
            assert (a * b) * cpoly == a * (b * cpoly)
            counts["associativity"] += 1
            lam, mu = rng.randint(1, N), rng.randint(1, N)
            assert total_derivative(total_derivative(cpoly, lam), mu) == \
                total_derivative(total_derivative(cpoly, mu), lam)
            counts["d_symmetry"] += 1
            v = rng.choice(variables)
            sv = -1 if v.odd and pa else 1
            assert left_partial(a * cpoly, v) == \
                left_partial(a, v) * cpoly + (a * left_partial(cpoly, v)) * sv
            counts["left_leibniz"] += 1
            sv = -1 if v.odd and pb else 1
            assert right_partial(cpoly * b, v) == \
                cpoly * right_partial(b, v) + (right_partial(cpoly, v) * b) * sv
            counts["right_leibniz"] += 1
            u = random_vector_field(rng)
            su = -1 if u.parity and pa else 1
            assert prolong_apply(u, a * cpoly, "left") == \
                prolong_apply(u, a, "left") * cpoly + (a * prolong_apply(u, cpoly, "left")) * su
            counts["prolonged_left_leibniz"] += 1
            su = -1 if u.parity and pb else 1
            assert prolong_apply(u, cpoly * b, "right") == \
                cpoly * prolong_apply(u, b, "right") + (prolong_apply(u, cpoly, "right") * b) * su
            counts["prolonged_right_leibniz"] += 1
        facts.append(", ".join(f"{k} {v}" for k, v in counts.items()))
        assert min(counts.values()) >= 100


def _random_ant1_density(rng, cx):
    sector = Sector(cx, 1, 2, 2, -1)
    phi = GradedPoly()
    while not phi.terms:
        for _ in range(rng.randint(1, 4)):
            key = sector.random_monomial(rng)
            if key is not None:
                phi = phi + GradedPoly.monomial(key, Fraction(rng.randint(-5, 5), rng.randint(1, 4)))
    return phi


def _configuration(rng, poly, constant=True):
    values = {}
    for v in poly.variables():
        if v.odd:
            continue
        if v.ant > 0 or not v.jet or not constant:
            values[v] = Fraction(rng.randint(-9, 9), rng.randint(1, 5))
        else:
            values[v] = Fraction(0)
    coords = {i: Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for i in range(1, 6)}
    return values, coords


def test_criterion_6_on_shell_vanishing():
    with criterion(6, "delta-bar of Ant-1 densities vanishes at constant BF configurations",
                   10.0) as facts:
        rng = random.Random(6)
        evaluations, off_shell_nonzero = 0, 0
        for n in (2, 3):
            cx = build_bf(n).complex
            for _ in range(20):
                phi = _random_ant1_density(rng, cx)
                image = cx.delta(phi, -1)
                for _ in range(20):
                    values, coords = _configuration(rng, image)
                    for a in phi.variables():
                        if a.ant and not a.odd:
                            values[a] = Fraction(rng.randint(-9, 9), rng.randint(1, 5))
                    assert evaluate(image, values, coords) == GradedPoly()
                    evaluations += 1
                values, coords = _configuration(rng, image, constant=False)
                off_shell_nonzero += bool(evaluate(image, values, coords).terms)
        facts.append(f"{evaluations} exact evaluations are 0; {off_shell_nonzero}/40 nonzero "
                     "at non-constant configurations")
        assert evaluations == 800 and off_shell_nonzero > 0


def test_criterion_7_boundary_search_soundness():
    with criterion(7, "is_boundary recovers witnesses for 50 constructed boundaries", 60.0) as facts:
        rng = random.Random(7)
        cx = build_bf(3).complex
        found, by_ant = 0, {}
        while found < 50:
            ant = rng.choice([2, 3, 4])
            psi = GradedPoly()
            sector = Sector(cx, ant, 1, 1, cx.top_stage)
            for _ in range(rng.randint(1, 3)):
                key = sector.random_monomial(rng)
                if key is not None:
                    psi = psi + GradedPoly.monomial(key, rng.choice([-2, -1, 1, 2, 3]))
            phi = cx.delta(psi)
            if not phi.terms:
                continue
            witness = is_boundary(phi, cx, 1, 1)
            assert witness is not None
            assert cx.delta(witness) == phi
            found += 1
            by_ant[ant - 1] = by_ant.get(ant - 1, 0) + 1
        facts.append("cycles per antifield number " +
                     ", ".join(f"{k}: {v}" for k, v in sorted(by_ant.items())))


def test_criterion_8_mutation_sensitivity(capsys):
    with criterion(8, "a sign flip in one BF n=3 stage operator is caught") as facts:
        ref = build_bf(3).complex
        for i in range(3):
            cx = extend_with_antifields(ref.fields, ref.lagrangian, 3)
            ops = stage_operators(cx, 0)
            ops[i] = replace(ops[i], expression=-ops[i].expression)
            cx = register_stage(cx, 0, ops)
            with pytest.raises(NilpotencyError) as info:
                register_stage(cx, 1, stage_operators(cx, 1))
            residual = info.value.report.failures()[0].residual
            assert residual.terms
            broken = register_stage(cx, 1, stage_operators(cx, 1), validate=False)
            assert not check_nilpotency(broken).passed
        code = main(["check", str(MODELS / "bf3_corrupted.kt")])
        out = capsys.readouterr().out
        residual_line = next(line for line in out.splitlines() if "residual:" in line)
        facts.append(f"check exit code {code}; {residual_line.strip()}")
        assert code == 1


def test_criterion_9_regularity_probes():
    with criterion(9, "regularity probes for BF n=3, k=0..1 at jet order 2", 60.0) as facts:
        cx = build_bf(3).complex
        for k in (0, 1):
            full = regularity_probe(cx, k, 2, 0, trials=20, seed=k, exhaustive=True)
            sampled = regularity_probe(cx, k, 2, 1, trials=20, seed=k)
            facts.append(f"k={k}: degree 0 exhaustive {full.passed}/"
                         f"{full.passed + len(full.inconclusive)}, degree 1 sampled "
                         f"{sampled.passed}/{sampled.passed + len(sampled.inconclusive)}")
            assert full.ok and sampled.ok
            assert full.kernel_cycles > 0 and sampled.passed > 0
