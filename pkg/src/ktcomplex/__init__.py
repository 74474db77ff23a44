"""Symbolic Koszul-Tate complexes of degenerate graded Lagrangian systems."""

__version__ = "0.1.0"

from .algebra import (  # noqa: E402
    Coord, Density, FieldSpec, GradedPoly, JetVariable, left_partial, mul, normalize,
    right_partial,
)
from .calculus import (  # noqa: E402
    GeneralizedVectorField, euler_lagrange, is_nilpotent, is_total_divergence, prolong_apply,
    total_derivative, total_derivative_multi,
)
from .koszul_tate import (  # noqa: E402
    KTComplex, StageOperator, check_nilpotency, extend_with_antifields, is_boundary, is_cycle,
    kt_differential, noether_search, register_stage, regularity_probe,
)

__all__ = [
    "Coord", "Density", "FieldSpec", "GeneralizedVectorField", "GradedPoly", "JetVariable",
    "KTComplex", "StageOperator", "check_nilpotency", "euler_lagrange", "extend_with_antifields",
    "is_boundary", "is_cycle", "is_nilpotent", "is_total_divergence", "kt_differential",
    "left_partial", "mul", "noether_search", "normalize", "prolong_apply", "register_stage",
    "regularity_probe", "right_partial", "total_derivative", "total_derivative_multi",
]
