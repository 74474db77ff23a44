from importlib import resources

import pytest
from hypothesis import given, strategies as st

from ktcomplex.bf import build_bf
from ktcomplex.dsl import (
    Add, Deriv, Eps, ModelError, ModelFile, Mul, Neg, Number, Pow, Symbol, build_complex,
    format_expr, format_model, parse_model,
)
from ktcomplex.koszul_tate import NilpotencyError, check_nilpotency, complex_text

MODELS = resources.files("ktcomplex") / "models"


def model_source(name: str) -> str:
    return (MODELS / name).read_text(encoding="utf-8")


@pytest.mark.parametrize("n", [2, 3])
def test_bf_samples_match_programmatic_build(n):
    cx = build_complex(parse_model(model_source(f"bf{n}.kt")))
    reference = build_bf(n).complex
    assert cx.lagrangian == reference.lagrangian
    assert complex_text(cx) == complex_text(reference)


def test_free_scalar_sample():
    m = parse_model(model_source("free_scalar.kt"))
    assert m.coordinate_names == ("t",)
    cx = build_complex(m)
    (e,) = cx.el.values()
    assert e.to_text() == "-1*y_(1,1)"


def test_corrupted_sample_fails_nilpotency():
    m = parse_model(model_source("bf3_corrupted.kt"))
    with pytest.raises(NilpotencyError):
        build_complex(m)
    assert not check_nilpotency(build_complex(m, validate=False)).passed


@pytest.mark.parametrize("name", ["bf2.kt", "bf3.kt", "bf3_corrupted.kt", "free_scalar.kt"])
def test_samples_round_trip(name):
    m = parse_model(model_source(name))
    text = format_model(m)
    assert parse_model(text) == m
    assert format_model(parse_model(text)) == text


BAD = [
    ("", "missing base_dim", 1, 1),
    ("base_dim 2\nfield y even\nlagrangian d(3, y)", "index out of range", 3, 14),
    ("base_dim 2\nlagrangian q", "undeclared identifier 'q'", 2, 12),
    ("base_dim 2\nfield y even\nlagrangian eps(1) * y", "arity mismatch", 3, 12),
    ("base_dim 2\nfield B even [1]\nlagrangian B[1,2]", "arity mismatch", 3, 12),
    ("base_dim 1\nfield y even\nfield c odd\nlagrangian y + c", "parity mismatch", 4, 16),
    ("base_dim 1\nfield c odd\nlagrangian c", "parity mismatch", 3, 12),
    ("base_dim 1\nfield y even\nlagrangian 0.5 * y", "floating-point literal", 3, 12),
    ("base_dim 1\nfield y even\nlagrangian y ? 2", "unexpected character", 3, 14),
    ("base_dim 1\nfield y even\nlagrangian y / y", "division by a non-constant", 3, 16),
    ("base_dim 1\nfield y even\nlagrangian y * bar(y)", "must not contain antifields", 3, 16),
    ("base_dim 1\nfield y even\nlagrangian (y", "expected ')'", 3, 14),
    ("base_dim 1\nfield d even\nlagrangian 0", "reserved word", 2, 7),
    ("base_dim 1\nfield y even\nlagrangian y\nstage 1 D = bar(y)", "out of order", 4, 7),
    ("base_dim 2\nindex mu\nfield y even\nlagrangian y\nstage 0 D[mu] = bar(y)",
     "free index 'mu' does not occur", 5, 17),
    ("base_dim 1\nfield y even\nlagrangian y\nstage 0 D = bar(y)*bar(y)_(1)",
     "antifield numbers", 4, 9),
]


@pytest.mark.parametrize("source, message, line, column", BAD)
def test_diagnostics_carry_locations(source, message, line, column):
    with pytest.raises(ModelError) as info:
        build_complex(parse_model(source), validate=False)
    err = info.value
    assert message in err.message
    assert (err.line, err.column) == (line, column)
    assert err.format("m.kt").startswith(f"m.kt:{line}:{column}: error: ")


def test_index_summation_scopes():
    src = """base_dim 2
index mu
field y even [1]
lagrangian y[mu] * y[mu] + 3 * y[mu]
"""
    cx = build_complex(parse_model(src))
    assert cx.lagrangian.to_text() == "3*y[1] + 3*y[2] + 1*y[1]^2 + 1*y[2]^2"


def test_comments_continuations_and_rationals():
    src = "base_dim 1  # a line\nfield y even\nlagrangian 2/3 * (y +\n  y_(1)) \\\n  - 1/3 * y\n"
    cx = build_complex(parse_model(src))
    assert cx.lagrangian.to_text() == "1/3*y + 2/3*y_(1)"


def test_explicit_components_on_the_left():
    src = """base_dim 2
index mu
field B even [1]
lagrangian 0
stage 0 D[1] = d(mu, bar(B)[mu])
stage 0 D[2] = bar(B)[2]_(1)
"""
    cx = build_complex(parse_model(src), validate=False)
    assert [op.label for op in cx.operators(0)] == ["D[1]", "D[2]"]


# random expression trees for the round-trip property

INDEX = st.sampled_from([1, 2, "mu", "nu"])
leaves = st.one_of(
    st.integers(0, 9).map(Number),
    st.builds(Symbol, st.just("A")),
    st.builds(Symbol, st.just("B"), st.just(False), st.tuples(INDEX),
              st.lists(INDEX, max_size=2).map(tuple)),
    st.builds(Symbol, st.just("x1")),
    st.builds(Eps, st.tuples(INDEX, INDEX)),
)


def _extend(children):
    return st.one_of(
        st.lists(st.tuples(st.sampled_from([1, -1]), children), min_size=2, max_size=3)
        .map(lambda ts: Add(((1, ts[0][1]),) + tuple(ts[1:]))),
        st.lists(st.tuples(st.just("*"), children), min_size=2, max_size=3).map(tuple).map(Mul),
        children.map(Neg),
        st.builds(Pow, children, st.integers(0, 3)),
        st.builds(Deriv, INDEX, children),
    )


expressions = st.recursive(leaves, _extend, max_leaves=8)


@given(expressions)
def test_expression_round_trip(expr):
    header = "base_dim 2\nindex mu nu\nfield A even\nfield B even [1]\nlagrangian "
    model = parse_model(header + format_expr(expr) + "\n")
    assert model.lagrangian == expr
    assert isinstance(model, ModelFile)
