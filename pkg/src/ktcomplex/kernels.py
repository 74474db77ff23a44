"""Kernel selection: the compiled extension when importable, else pure Python.

Set ``KTCOMPLEX_PURE_PYTHON=1`` to force the fallback.
"""

import os

if os.environ.get("KTCOMPLEX_PURE_PYTHON"):
    from ._pykernels import merge_base, merge_vars, mul_terms, partial_monomial, partial_terms, reduce_row
    BACKEND = "python"
else:
    try:
        from ._kernels import (  # type: ignore[import-not-found]
            merge_base, merge_vars, mul_terms, partial_monomial, partial_terms, reduce_row,
        )
        BACKEND = "cython"
    except ImportError:
        from ._pykernels import merge_base, merge_vars, mul_terms, partial_monomial, partial_terms, reduce_row
        BACKEND = "python"

__all__ = [
    "BACKEND", "merge_base", "merge_vars", "mul_terms", "partial_monomial", "partial_terms",
    "reduce_row",
]
