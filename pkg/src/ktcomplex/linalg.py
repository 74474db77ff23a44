"""Exact sparse linear algebra over the rationals.

Vectors are dicts from hashable row keys to Fractions; a matrix is a list of
such column vectors.  Elimination runs on integer rows (each row scaled to
clear denominators) with the smallest column as pivot, so results depend only
on the column order and are reproducible.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm
from typing import Optional

from .kernels import reduce_row


def _int_row(entries: dict) -> dict:
    den = 1
    for v in entries.values():
        den = lcm(den, v.denominator)
    return {k: int(v * den) for k, v in entries.items()}


def _rows(columns: list, rhs: Optional[dict] = None) -> dict:
    rows: dict = {}
    for j, col in enumerate(columns):
        for key, val in col.items():
            if val:
                rows.setdefault(key, {})[j] = Fraction(val)
    if rhs is not None:
        j = len(columns)
        for key, val in rhs.items():
            if val:
                rows.setdefault(key, {})[j] = Fraction(val)
    return rows


def echelon(rows) -> dict:
    """Row-echelon form as ``{pivot column: integer row}``."""
    pivots: dict = {}
    for row in rows:
        r = reduce_row(_int_row(row), pivots)
        if r:
            pivots[min(r)] = r
    return pivots


def reduced(pivots: dict) -> dict:
    """Back-substitute an echelon form to reduced row-echelon form."""
    done: dict = {}
    for p in sorted(pivots, reverse=True):
        row = {k: Fraction(v) for k, v in pivots[p].items()}
        # pivot rows are zero left of their pivot, so one ascending pass suffices
        for q in sorted(c for c in pivots[p] if c != p and c in done):
            qrow = done[q]
            f = row[q] / qrow[q]
            for k, v in qrow.items():
                nv = row.get(k, 0) - f * v
                if nv:
                    row[k] = nv
                else:
                    row.pop(k, None)
        done[p] = _int_row(row)
    return done


def union_blocks(columns: list) -> list:
    """Partition column indices into blocks that share no row."""
    parent = list(range(len(columns)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    owner: dict = {}
    for j, col in enumerate(columns):
        for key in col:
            k = owner.get(key)
            if k is None:
                owner[key] = j
            else:
                a, b = find(j), find(k)
                if a != b:
                    if a < b:
                        parent[b] = a
                    else:
                        parent[a] = b
    blocks: dict = {}
    for j in range(len(columns)):
        blocks.setdefault(find(j), []).append(j)
    return sorted(blocks.values(), key=lambda b: b[0])


def _nullspace_block(columns: list) -> list:
    rows = _rows(columns)
    red = reduced(echelon(rows.values()))
    pivot_cols = set(red)
    out = []
    for f in range(len(columns)):
        if f in pivot_cols:
            continue
        vec = {f: Fraction(1)}
        for p, row in red.items():
            if f in row:
                vec[p] = Fraction(-row[f], row[p])
        out.append(vec)
    return out


def nullspace(columns: list) -> list:
    """Basis of ``{c : sum_j c_j columns[j] = 0}``, one vector per free column.

    Each vector is a sparse dict column-index -> Fraction, normalised to 1 at
    its free column; the list is ordered by that free column.
    """
    out = []
    for block in union_blocks(columns):
        sub = [columns[j] for j in block]
        for vec in _nullspace_block(sub):
            out.append({block[j]: v for j, v in vec.items()})
    out.sort(key=lambda v: max(v))
    return out


def solve(columns: list, target: dict) -> Optional[dict]:
    """A particular solution ``c`` of ``sum_j c_j columns[j] = target`` or None."""
    if not any(target.values()):
        return {}
    rows = _rows(columns, target)
    red = reduced(echelon(rows.values()))
    b = len(columns)
    if b in red:
        return None
    sol = {}
    for p, row in red.items():
        if b in row:
            sol[p] = Fraction(row[b], row[p])
    return sol


def rank(vectors: list) -> int:
    return len(echelon(vectors))


def in_span(basis: list, vec: dict) -> bool:
    pivots = echelon(basis)
    return not reduce_row(_int_row(vec), pivots) if vec else True


def independent_modulo(vectors: list, modulo: list) -> list:
    """Indices of ``vectors`` that extend the span of ``modulo`` (greedy, in order)."""
    pivots = echelon(modulo)
    keep = []
    for i, v in enumerate(vectors):
        r = reduce_row(_int_row(v), pivots) if v else {}
        if r:
            pivots[min(r)] = r
            keep.append(i)
    return keep


def combine(columns: list, coeffs: dict) -> dict:
    out: dict = {}
    for j, c in coeffs.items():
        for k, v in columns[j].items():
            nv = out.get(k, 0) + c * v
            if nv:
                out[k] = nv
            else:
                out.pop(k, None)
    return out


__all__ = [
    "combine", "echelon", "in_span", "independent_modulo", "nullspace", "rank", "reduced",
    "solve", "union_blocks",
]
