"""Pure-Python reference versions of the hot kernels.

Every function here has a twin with the same name and signature in
``_kernels.pyx``.  A jet variable is a tuple whose last entry is its parity
(0 or 1); a monomial is ``(base, vars)`` where ``base`` is a sorted tuple of
``(coordinate, exponent)`` pairs and ``vars`` a sorted tuple of variables in
which even variables may repeat.
"""

from heapq import heapify, heappop, heappush
from math import gcd

ODD = 5


def merge_vars(a, b):
    """Return ``(sign, merged)`` for the graded product ``a*b``; sign 0 means zero."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    odd_left = 0
    for v in a:
        odd_left += v[ODD]
    flips = 0
    out = []
    i = j = 0
    na, nb = len(a), len(b)
    while i < na and j < nb:
        x = a[i]
        y = b[j]
        if y < x:
            if y[ODD]:
                flips += odd_left
            out.append(y)
            j += 1
        elif x < y:
            odd_left -= x[ODD]
            out.append(x)
            i += 1
        else:
            if x[ODD]:
                return 0, None
            odd_left -= x[ODD]
            out.append(x)
            i += 1
    if i < na:
        out.extend(a[i:])
    elif j < nb:
        out.extend(b[j:])
    return (-1 if flips & 1 else 1), tuple(out)


def merge_base(a, b):
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for k, e in b:
        d[k] = d.get(k, 0) + e
    return tuple(sorted(d.items()))


def mul_terms(ta, tb):
    out = {}
    for (ba, va), ca in ta.items():
        for (bb, vb), cb in tb.items():
            sign, vars_ = merge_vars(va, vb)
            if not sign:
                continue
            key = (merge_base(ba, bb), vars_)
            c = ca * cb if sign > 0 else -(ca * cb)
            prev = out.get(key)
            if prev is None:
                out[key] = c
            else:
                c = prev + c
                if c:
                    out[key] = c
                else:
                    del out[key]
    return out


def partial_monomial(vars_, v, right):
    """Graded partial derivative of one monomial; returns ``(factor, rest)`` or None."""
    n = len(vars_)
    first = -1
    count = 0
    for k in range(n):
        if vars_[k] == v:
            if first < 0:
                first = k
            count += 1
    if first < 0:
        return None
    rest = vars_[:first] + vars_[first + 1:]
    if not v[ODD]:
        return count, rest
    passed = 0
    if right:
        for k in range(first + 1, n):
            passed += vars_[k][ODD]
    else:
        for k in range(first):
            passed += vars_[k][ODD]
    return (-1 if passed & 1 else 1), rest


def partial_terms(terms, v, right):
    out = {}
    for (base, vars_), c in terms.items():
        r = partial_monomial(vars_, v, right)
        if r is None:
            continue
        f, rest = r
        key = (base, rest)
        val = out.get(key, 0) + f * c
        if val:
            out[key] = val
        else:
            out.pop(key, None)
    return out


def reduce_row(row, pivots):
    """Reduce an integer sparse row (col -> int) against echelon pivot rows.

    ``pivots`` maps a pivot column to a row whose smallest column is that
    pivot.  Returns the reduced row, content-normalised, possibly empty.
    """
    row = {k: v for k, v in row.items() if v}
    heap = [c for c in row if c in pivots]
    heapify(heap)
    while heap:
        col = heappop(heap)
        a = row.get(col)
        if a is None:
            continue
        prow = pivots[col]
        p = prow[col]
        g = gcd(a, p)
        ma = p // g
        mp = a // g
        if ma != 1:
            for k in row:
                row[k] *= ma
        for k, val in prow.items():
            nv = row.get(k, 0) - mp * val
            if nv:
                if k not in row and k in pivots:
                    heappush(heap, k)
                row[k] = nv
            else:
                row.pop(k, None)
    if row:
        g = 0
        for val in row.values():
            g = gcd(g, val)
            if g == 1:
                break
        if row[min(row)] < 0:
            g = -g
        if g != 1:
            for k in row:
                row[k] //= g
    return row
