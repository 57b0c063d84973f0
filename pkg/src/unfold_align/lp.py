"""Exact-rational two-phase simplex for small equality-form LPs.

Solves ``min c.x  s.t.  A x = b, x >= 0`` over :class:`fractions.Fraction`.
Dense tableau, Dantzig pricing with a switch to Bland's rule once a run of
degenerate pivots suggests cycling.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Sequence

_ZERO = Fraction(0)


class LPResult:
    __slots__ = ("status", "value", "x")

    def __init__(self, status: str, value=None, x=None):
        self.status = status
        self.value = value
        self.x = x

    @property
    def feasible(self) -> bool:
        return self.status == "optimal"

    def __repr__(self):
        return f"LPResult({self.status}, {self.value})"


def _pivot(tab, basis, r, col):
    prow = tab[r]
    piv = prow[col]
    if piv != 1:
        inv = 1 / piv
        for j, v in enumerate(prow):
            if v:
                prow[j] = v * inv
    nz = [j for j, v in enumerate(prow) if v]
    for i, row in enumerate(tab):
        if i == r:
            continue
        f = row[col]
        if f:
            for j in nz:
                row[j] -= f * prow[j]
    basis[r] = col


def _run(tab, basis, ncols, obj_row, max_iter=100_000):
    """Minimise; the objective row holds reduced costs, last column is -z."""
    m = len(tab) - 1
    degenerate = 0
    for _ in range(max_iter):
        obj = tab[obj_row]
        if degenerate > 25:
            col = next((j for j in range(ncols) if obj[j] < 0), None)
        else:
            col, best = None, _ZERO
            for j in range(ncols):
                if obj[j] < best:
                    col, best = j, obj[j]
        if col is None:
            return "optimal"
        r, ratio = None, None
        for i in range(m):
            a = tab[i][col]
            if a > 0:
                q = tab[i][-1] / a
                if ratio is None or q < ratio or (q == ratio and basis[i] < basis[r]):
                    r, ratio = i, q
        if r is None:
            return "unbounded"
        degenerate = degenerate + 1 if ratio == 0 else 0
        _pivot(tab, basis, r, col)
    raise RuntimeError("simplex iteration limit reached")


def solve(A: Sequence[Sequence], b: Sequence, c: Sequence) -> LPResult:
    """``A`` is a dense row-major matrix of ints/Fractions."""
    n = len(c)
    rows = []
    rhs = []
    for row, bi in zip(A, b):
        row = [Fraction(v) for v in row]
        bi = Fraction(bi)
        if not any(row):
            if bi != 0:
                return LPResult("infeasible")
            continue
        if bi < 0:
            row = [-v for v in row]
            bi = -bi
        rows.append(row)
        rhs.append(bi)
    m = len(rows)
    cost = [Fraction(v) for v in c]
    if m == 0:
        if any(v < 0 for v in cost):
            return LPResult("unbounded")
        return LPResult("optimal", _ZERO, [_ZERO] * n)
    # columns: n structural, m artificial, rhs
    tab = []
    for i in range(m):
        art = [_ZERO] * m
        art[i] = Fraction(1)
        tab.append(rows[i] + art + [rhs[i]])
    basis = [n + i for i in range(m)]
    phase1 = [_ZERO] * (n + m + 1)
    for row in tab:
        for j in range(n):
            phase1[j] -= row[j]
        phase1[-1] -= row[-1]
    tab.append(phase1)
    _run(tab, basis, n, m)
    if tab[m][-1] != 0:
        return LPResult("infeasible")
    # drive artificials out of the basis; drop redundant rows
    i = 0
    while i < len(basis):
        if basis[i] >= n:
            col = next((j for j in range(n) if tab[i][j] != 0), None)
            if col is None:
                del tab[i]
                del basis[i]
                continue
            _pivot(tab, basis, i, col)
        i += 1
    m = len(basis)
    tab = [row[:n] + [row[-1]] for row in tab[:m]]
    obj = list(cost) + [_ZERO]
    for i, bj in enumerate(basis):
        cb = cost[bj]
        if cb:
            row = tab[i]
            for j in range(n + 1):
                if row[j]:
                    obj[j] -= cb * row[j]
    tab.append(obj)
    status = _run(tab, basis, n, m)
    if status != "optimal":
        return LPResult(status)
    x = [_ZERO] * n
    for i, bj in enumerate(basis):
        x[bj] = tab[i][-1]
    return LPResult("optimal", -tab[m][-1], x)
