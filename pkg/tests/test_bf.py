import pytest

from ktcomplex.algebra import GradedPoly
from ktcomplex.bf import (
    MAX_DIM, bf_lagrangian, build_bf, noether_identities, stage_identities, verify_bf,
)
from ktcomplex.report import PASS

P = GradedPoly.variable


def test_bf2_euler_lagrange_components():
    model = build_bf(2)
    A, B = model.A, model.B
    el = model.complex.el
    a1, a2 = A.var((), (1,)), A.var((), (2,))
    b1_2, b2_1 = B.var((1,), (2,)), B.var((2,), (1,))
    # E = eps^{mu nu} d_mu B_nu and E^nu = -eps^{mu nu} d_mu A
    assert el[A.var()] == P(b2_1) - P(b1_2)
    assert el[B.var((1,))] == P(a2)
    assert el[B.var((2,))] == -P(a1)


def test_bf_lagrangian_text():
    assert bf_lagrangian(2).to_text() == "-1*A*B[1]_(2) + 1*A*B[2]_(1)"


@pytest.mark.parametrize("n, counts", [(2, [1]), (3, [3, 1]), (4, [6, 4, 1])])
def test_tower_shape(n, counts):
    cx = build_bf(n).complex
    assert cx.top_stage == n - 2
    assert [len(cx.operators(k)) for k in range(n - 1)] == counts
    parities = [cx.antifield_spec(f"bar(Delta{k})").parity for k in range(n - 1)]
    assert parities == [k % 2 for k in range(n - 1)]


@pytest.mark.parametrize("n", [2, 3, 4])
def test_noether_and_stage_identities_vanish(n):
    model = build_bf(n)
    assert all(not p.terms for p in noether_identities(model).values())
    for k in range(n - 2):
        assert all(not p.terms for p in stage_identities(model, k).values())


@pytest.mark.parametrize("n", [2, 3])
def test_verify_bf_passes(n):
    report = verify_bf(n)
    assert [e.status for e in report.entries] == [PASS] * len(report.entries)
    names = [e.name for e in report.entries]
    assert names[0] == "noether_identities" and "nilpotency" in names and names[-1] == "top_sector"


def test_dimension_cap():
    with pytest.raises(ValueError):
        build_bf(1)
    with pytest.raises(ValueError):
        build_bf(MAX_DIM + 1)
