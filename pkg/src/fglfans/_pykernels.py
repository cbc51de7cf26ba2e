"""Pure-Python implementations of the hot kernels.

These are the reference versions; ``_ckernels`` (Cython) must agree with them
bit for bit.  Both operate on plain ints and fall back to nothing else.
"""
from __future__ import annotations


def mul_terms(f_terms, f_deg, g_terms, g_deg, bound, table):
    """Product of two sparse graded series.

    ``*_terms`` map exponent tuples to coefficient tuples living in graded
    piece ``|I| - deg``.  ``table[k][l]`` is the multiplication table of
    pieces ``k`` and ``l`` (``None`` when ``k + l`` exceeds ``bound``):
    ``table[k][l][i][j]`` is the coefficient tuple of ``e_i * e_j``.
    Monomials of total degree above ``bound`` are dropped.
    """
    out = {}
    g_items = sorted(g_terms.items(), key=lambda t: sum(t[0]))
    g_sizes = [sum(e) for e, _ in g_items]
    for ei, a in f_terms.items():
        si = sum(ei)
        ka = si - f_deg
        row = table[ka]
        for (ej, b), sj in zip(g_items, g_sizes):
            s = si + sj
            if s > bound:
                break
            kb = sj - g_deg
            tab = row[kb]
            if tab is None:
                continue
            key = tuple(x + y for x, y in zip(ei, ej))
            acc = out.get(key)
            if acc is None:
                acc = [0] * len(tab[0][0]) if tab and tab[0] else []
                out[key] = acc
            for i, x in enumerate(a):
                if x:
                    ti = tab[i]
                    for j, y in enumerate(b):
                        if y:
                            xy = x * y
                            for k, z in enumerate(ti[j]):
                                if z:
                                    acc[k] += xy * z
    return {k: tuple(v) for k, v in out.items() if any(v)}


def eliminate_unit_pivots(rows):
    """Sparse elimination of unknowns that carry a ±1 coefficient.

    ``rows`` is a list of ``{column: coefficient}`` dicts (consumed).  Pivot
    choice is Markowitz-style: the unit entry minimising
    ``(row length - 1) * (column count - 1)``, ties broken by row then column
    index.  Returns ``(eliminated, remaining)`` with
    ``eliminated = [(column, {k: c_k})]`` meaning ``x_column = sum c_k x_k``.
    """
    live = {i: r for i, r in enumerate(rows) if r}
    cols: dict[int, set[int]] = {}
    for i, r in live.items():
        for k in r:
            cols.setdefault(k, set()).add(i)
    eliminated = []
    while True:
        best = None
        for i in sorted(live):
            r = live[i]
            lr = len(r) - 1
            for k, x in r.items():
                if x == 1 or x == -1:
                    cost = lr * (len(cols[k]) - 1)
                    key = (cost, i, k)
                    if best is None or key < best:
                        best = key
                        if cost == 0:
                            break
            if best is not None and best[0] == 0:
                break
        if best is None:
            break
        _, i, c = best
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


def lincomb(coeffs, vectors, size):
    """``sum c_i v_i`` for integer vectors of length ``size``."""
    out = [0] * size
    for c, v in zip(coeffs, vectors):
        if c:
            for i, x in enumerate(v):
                if x:
                    out[i] += c * x
    return out
