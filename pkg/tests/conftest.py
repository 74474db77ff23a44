import os
import sys

from hypothesis import settings, strategies as st

from ktcomplex.algebra import FieldSpec, GradedPoly

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", max_examples=120, deadline=None)
settings.load_profile("default")

N = 2
Y = FieldSpec("y", 0, order=0)
Z = FieldSpec("z", 0, order=1)
C = FieldSpec("c", 1, order=2)
D = FieldSpec("e", 1, order=3)
FIELDS = (Y, Z, C, D)
JETS = [(), (1,), (2,), (1, 1), (1, 2), (2, 2)]
VARIABLES = [f.var((), j) for f in FIELDS for j in JETS]
EVEN_VARS = [v for v in VARIABLES if not v.odd]
ODD_VARS = [v for v in VARIABLES if v.odd]

coefficients = st.fractions(min_value=-5, max_value=5, max_denominator=3).filter(bool)


@st.composite
def monomials(draw, parity=None, max_len=3, coords=True, variables=None):
    variables = variables or VARIABLES
    factors = draw(st.lists(st.sampled_from(variables), max_size=max_len))
    if parity is not None and sum(v.odd for v in factors) % 2 != parity:
        odd = [v for v in variables if v.odd]
        even = [v for v in variables if not v.odd]
        factors.append(draw(st.sampled_from(odd)) if odd else draw(st.sampled_from(even)))
    p = GradedPoly.constant(draw(coefficients))
    for v in factors:
        p = p * GradedPoly.variable(v)
    if coords:
        for i in range(1, N + 1):
            e = draw(st.integers(0, 1))
            if e:
                p = p * GradedPoly.coordinate(i, e)
    return p


@st.composite
def polys(draw, parity=None, max_terms=4, max_len=3, coords=True, variables=None):
    """Random polynomial; homogeneous of the given parity when one is given."""
    if parity is None and draw(st.booleans()):
        parity = draw(st.integers(0, 1))
    p = GradedPoly()
    for _ in range(draw(st.integers(1, max_terms))):
        p = p + draw(monomials(parity, max_len, coords, variables))
    return p


homogeneous = st.integers(0, 1).flatmap(lambda par: polys(parity=par).map(lambda p: (par, p)))


# one line per acceptance criterion, printed after the test session
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
