"""Exact rational two-phase simplex with Bland's anti-cycling rule."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import DimensionMismatch

LE, GE, EQ = "<=", ">=", "="
OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"


@dataclass(frozen=True)
class LinearProgram:
    """maximize objective . x  s.t. constraints and lo <= x <= hi (hi None = unbounded)."""

    objective: Sequence
    constraints: Sequence = ()
    bounds: Sequence = field(default=())

    @property
    def n(self) -> int:
        return len(self.objective)


@dataclass(frozen=True)
class LpResult:
    status: str
    values: tuple = ()
    objective: Fraction | None = None


def _pivot(rows, r, c):
    pr = rows[r]
    inv = 1 / pr[c]
    rows[r] = pr = [x * inv for x in pr]
    for i, row in enumerate(rows):
        if i != r and row[c]:
            f = row[c]
            rows[i] = [a - f * b if b else a for a, b in zip(row, pr)]


def _simplex(rows, basis, cost, allowed):
    m = len(rows)
    while True:
        basic = set(basis)
        enter = None
        for j in allowed:
            if j in basic:
                continue
            rc = cost[j] - sum(cost[basis[i]] * rows[i][j] for i in range(m) if rows[i][j])
            if rc > 0:
                enter = j
                break
        if enter is None:
            return OPTIMAL
        best = None
        for i in range(m):
            a = rows[i][enter]
            if a > 0:
                ratio = rows[i][-1] / a
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return UNBOUNDED
        _pivot(rows, best[1], enter)
        basis[best[1]] = enter


def solve_lp(lp: LinearProgram) -> LpResult:
    n = lp.n
    obj = [Fraction(c) for c in lp.objective]
    bounds = list(lp.bounds) or [(0, None)] * n
    if len(bounds) != n:
        raise DimensionMismatch(f"{len(bounds)} bounds for {n} variables")
    lo = []
    cons = []
    for j, (a, b) in enumerate(bounds):
        a = Fraction(a)
        if b is not None and Fraction(b) < a:
            return LpResult(INFEASIBLE)
        lo.append(a)
        if b is not None:
            row = [Fraction(0)] * n
            row[j] = Fraction(1)
            cons.append((row, LE, Fraction(b)))
    for coeffs, rel, rhs in lp.constraints:
        if len(coeffs) != n:
            raise DimensionMismatch(f"constraint has {len(coeffs)} coefficients, expected {n}")
        if rel not in (LE, GE, EQ):
            raise DimensionMismatch(f"unknown relation {rel!r}")
        cons.append(([Fraction(c) for c in coeffs], rel, Fraction(rhs)))
    # shift x = lo + y so that y >= 0
    shifted = []
    for coeffs, rel, rhs in cons:
        rhs = rhs - sum(c * l for c, l in zip(coeffs, lo))
        if rhs < 0:
            coeffs = [-c for c in coeffs]
            rhs = -rhs
            rel = {LE: GE, GE: LE, EQ: EQ}[rel]
        shifted.append((coeffs, rel, rhs))
    m = len(shifted)
    n_slack = sum(1 for _, rel, _ in shifted if rel != EQ)
    n_art = sum(1 for _, rel, _ in shifted if rel != LE)
    width = n + n_slack + n_art
    rows, basis = [], []
    s_col, a_col = n, n + n_slack
    art = []
    for coeffs, rel, rhs in shifted:
        row = coeffs + [Fraction(0)] * (n_slack + n_art) + [rhs]
        if rel == LE:
            row[s_col] = Fraction(1)
            basis.append(s_col)
            s_col += 1
        else:
            if rel == GE:
                row[s_col] = Fraction(-1)
                s_col += 1
            row[a_col] = Fraction(1)
            basis.append(a_col)
            art.append(a_col)
            a_col += 1
        rows.append(row)
    real = list(range(n + n_slack))
    if art:
        cost1 = [Fraction(0)] * width
        for j in art:
            cost1[j] = Fraction(-1)
        _simplex(rows, basis, cost1, list(range(width)))
        if any(rows[i][-1] != 0 for i in range(m) if basis[i] in art):
            return LpResult(INFEASIBLE)
        # drive zero-level artificials out of the basis, dropping redundant rows
        i = 0
        while i < len(rows):
            if basis[i] in art:
                j = next((j for j in real if rows[i][j] != 0), None)
                if j is None:
                    del rows[i], basis[i]
                    continue
                _pivot(rows, i, j)
                basis[i] = j
            i += 1
    cost2 = obj + [Fraction(0)] * (width - n)
    status = _simplex(rows, basis, cost2, real)
    if status == UNBOUNDED:
        return LpResult(UNBOUNDED)
    y = [Fraction(0)] * width
    for i, b in enumerate(basis):
        y[b] = rows[i][-1]
    x = tuple(l + v for l, v in zip(lo, y[:n]))
    return LpResult(OPTIMAL, x, sum((c * v for c, v in zip(obj, x)), Fraction(0)))


def check_feasible(lp: LinearProgram, x) -> bool:
    """Independent feasibility re-check of a primal point."""
    for j, (a, b) in enumerate(lp.bounds or [(0, None)] * lp.n):
        if x[j] < a or (b is not None and x[j] > b):
            return False
    for coeffs, rel, rhs in lp.constraints:
        s = sum(Fraction(c) * v for c, v in zip(coeffs, x))
        if (rel == LE and s > rhs) or (rel == GE and s < rhs) or (rel == EQ and s != rhs):
            return False
    return True
