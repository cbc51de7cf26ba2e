# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled versions of the kernels in ``_pykernels`` (same results, same order).

Coefficients stay Python integers so nothing can overflow; the speedup comes
from typed loop counters and degree bookkeeping.
"""


def mul_terms(dict f_terms, int f_deg, dict g_terms, int g_deg, int bound, list table):
    cdef dict out = {}
    cdef list g_items = sorted(g_terms.items(), key=lambda t: sum(t[0]))
    cdef Py_ssize_t ng = len(g_items)
    cdef int[::1] g_sizes
    cdef int si, sj, ka, kb, nvars
    cdef Py_ssize_t n, i, j, k, v, la, lb, lz
    cdef tuple ei, ej, a, b, key
    cdef list acc, row, tab, ti
    cdef tuple tij
    cdef object x, y, z, xy
    if ng == 0 or not f_terms:
        return {}
    import array
    sizes = array.array("i", [sum(e) for e, _ in g_items])
    g_sizes = sizes
    nvars = len(g_items[0][0])
    for ei, a in f_terms.items():
        si = 0
        for v in range(nvars):
            si += <int>ei[v]
        ka = si - f_deg
        row = table[ka]
        la = len(a)
        for n in range(ng):
            sj = g_sizes[n]
            if si + sj > bound:
                break
            kb = sj - g_deg
            tab = row[kb]
            if tab is None:
                continue
            ej, b = g_items[n]
            key = tuple([ei[v] + ej[v] for v in range(nvars)])
            acc = out.get(key)
            if acc is None:
                acc = [0] * len(tab[0][0]) if tab and tab[0] else []
                out[key] = acc
            lb = len(b)
            for i in range(la):
                x = a[i]
                if not x:
                    continue
                ti = tab[i]
                for j in range(lb):
                    y = b[j]
                    if not y:
                        continue
                    xy = x * y
                    tij = ti[j]
                    lz = len(tij)
                    for k in range(lz):
                        z = tij[k]
                        if z:
                            acc[k] += xy * z
    return {kk: tuple(vv) for kk, vv in out.items() if any(vv)}


def eliminate_unit_pivots(list rows):
    cdef dict live = {}
    cdef dict cols = {}
    cdef Py_ssize_t i, i2, c, lr, cost
    cdef dict r, r2, expr
    cdef object a, b, x, y, k
    cdef tuple best, cand
    cdef list eliminated = []
    for i in range(len(rows)):
        r = rows[i]
        if r:
            live[i] = r
            for k in r:
                s = cols.get(k)
                if s is None:
                    cols[k] = {i}
                else:
                    s.add(i)
    while True:
        best = None
        for i in sorted(live):
            r = live[i]
            lr = len(r) - 1
            for k, x in r.items():
                if x == 1 or x == -1:
                    cost = lr * (len(cols[k]) - 1)
                    cand = (cost, i, k)
                    if best is None or cand < best:
                        best = cand
                        if cost == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        i = best[1]
        c = best[2]
        r = live.pop(i)
        for k in r:
            cols[k].discard(i)
        a = r[c]
        expr = {k: -a * x for k, x in r.items() if k != c}
        eliminated.append((c, expr))
        for i2 in sorted(cols.get(c, ())):
            r2 = live[i2]
            b = r2.pop(c)
            for k, x in expr.items():
                y = r2.get(k, 0) + b * x
                if y:
                    if k not in r2:
                        cols[k].add(i2)
                    r2[k] = y
                elif k in r2:
                    del r2[k]
                    cols[k].discard(i2)
            if not r2:
                del live[i2]
        cols.pop(c, None)
    return eliminated, [live[i] for i in sorted(live)]


def lincomb(coeffs, list vectors, Py_ssize_t size):
    cdef list out = [0] * size
    cdef Py_ssize_t i, n, m
    cdef object c, x
    cdef tuple v
    n = min(len(coeffs), len(vectors))
    for m in range(n):
        c = coeffs[m]
        if not c:
            continue
        v = tuple(vectors[m])
        for i in range(size):
            x = v[i]
            if x:
                out[i] += c * x
    return out
