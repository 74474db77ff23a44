# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled hot kernels; see ``_pykernels`` for the reference semantics."""

from heapq import heapify, heappop, heappush
from math import gcd

cdef Py_ssize_t ODD = 5


cdef inline int _odd(object v):
    return 1 if (<tuple>v)[ODD] else 0


cpdef tuple merge_vars(tuple a, tuple b):
    cdef Py_ssize_t na = len(a), nb = len(b), i = 0, j = 0, k
    cdef long odd_left = 0, flips = 0
    cdef list out
    cdef object x, y
    if na == 0:
        return 1, b
    if nb == 0:
        return 1, a
    for k in range(na):
        odd_left += _odd(a[k])
    out = []
    while i < na and j < nb:
        x = a[i]
        y = b[j]
        if y < x:
            if _odd(y):
                flips += odd_left
            out.append(y)
            j += 1
        elif x < y:
            odd_left -= _odd(x)
            out.append(x)
            i += 1
        else:
            if _odd(x):
                return 0, None
            out.append(x)
            i += 1
    while i < na:
        out.append(a[i])
        i += 1
    while j < nb:
        out.append(b[j])
        j += 1
    return (-1 if flips & 1 else 1), tuple(out)


cpdef tuple merge_base(tuple a, tuple b):
    cdef dict d
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for k, e in b:
        d[k] = d.get(k, 0) + e
    return tuple(sorted(d.items()))


cpdef dict mul_terms(dict ta, dict tb):
    cdef dict out = {}
    cdef tuple ka, kb, vars_, key
    cdef int sign
    cdef object ca, cb, c, prev
    for ka, ca in ta.items():
        for kb, cb in tb.items():
            sign, vars_ = merge_vars(<tuple>ka[1], <tuple>kb[1])
            if sign == 0:
                continue
            key = (merge_base(<tuple>ka[0], <tuple>kb[0]), vars_)
            c = ca * cb
            if sign < 0:
                c = -c
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


cpdef object partial_monomial(tuple vars_, object v, bint right):
    cdef Py_ssize_t n = len(vars_), k, first = -1
    cdef long count = 0, passed = 0
    for k in range(n):
        if vars_[k] == v:
            if first < 0:
                first = k
            count += 1
    if first < 0:
        return None
    rest = vars_[:first] + vars_[first + 1:]
    if not _odd(v):
        return count, rest
    if right:
        for k in range(first + 1, n):
            passed += _odd(vars_[k])
    else:
        for k in range(first):
            passed += _odd(vars_[k])
    return (-1 if passed & 1 else 1), rest


cpdef dict partial_terms(dict terms, object v, bint right):
    cdef dict out = {}
    cdef tuple key
    for key, c in terms.items():
        r = partial_monomial(<tuple>key[1], v, right)
        if r is None:
            continue
        f, rest = r
        nk = (key[0], rest)
        val = out.get(nk, 0) + f * c
        if val:
            out[nk] = val
        else:
            out.pop(nk, None)
    return out


cpdef dict reduce_row(dict row, dict pivots):
    cdef dict prow
    cdef list heap
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
