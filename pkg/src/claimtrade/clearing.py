"""Maximal clearing states.

Proportional networks use the fictitious-default algorithm.  Every other
regime goes through one exact engine for piecewise-linear payment functions:
Kleene iteration downward from the all-liabilities vector, accelerated by
(a) solving the affine system of the current pieces exactly and (b) jumping
over whole periods when a deficit circulates around a cycle.
"""

from __future__ import annotations

import os
from bisect import bisect_left
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from . import _linalg
from .errors import BadParameters, NonConvergence, WrongPaymentKind
from .net_model import ONE, ZERO, FinancialNetwork, to_money

TOLERANCE_ENV = "CLAIMTRADE_TOLERANCE"
_DEFAULT_TOLERANCE = Fraction(1, 10**12)


def default_tolerance() -> Fraction:
    raw = os.environ.get(TOLERANCE_ENV)
    if not raw:
        return _DEFAULT_TOLERANCE
    tol = to_money(raw)
    if tol <= 0:
        raise BadParameters(f"{TOLERANCE_ENV} must be positive, got {raw!r}")
    return tol


@dataclass(frozen=True)
class ClearingState:
    payments: Mapping[str, Fraction]
    assets: Mapping[str, Fraction]
    recovery: Mapping[str, Fraction]
    # None for exact states, otherwise the tolerance the iteration stopped at
    tolerance: Fraction | None = None

    @property
    def exact(self) -> bool:
        return self.tolerance is None


def state_from_assets(net: FinancialNetwork, assets, tolerance=None) -> ClearingState:
    payments = {}
    recovery = {}
    for bid in net.banks:
        curve = net.curves[bid]
        a = assets[bid]
        for c, p in zip(curve.claims, curve.evaluate(a)):
            payments[c] = p
        total = curve.breaks[-1] if curve.claims else ZERO
        recovery[bid] = ONE if total == 0 else min(a / total, ONE)
    payments = {c: payments[c] for c in net.claims}
    return ClearingState(payments, dict(assets), recovery, tolerance)


def is_fixed_point(net: FinancialNetwork, state: ClearingState) -> bool:
    """Exact check of the fixed-point conditions (feasibility)."""
    for bid in net.banks:
        inc = sum((state.payments[c] for c in net.in_claims(bid)), ZERO)
        if state.assets[bid] != net.external(bid) + inc:
            return False
        curve = net.curves[bid]
        for c, p in zip(curve.claims, curve.evaluate(state.assets[bid])):
            if state.payments[c] != p:
                return False
    return True


def _check_kinds(net: FinancialNetwork, allowed: str) -> None:
    bad = net.kinds() - {allowed}
    if bad:
        raise WrongPaymentKind(f"network uses {sorted(bad)} payments, expected only {allowed}")


def clear_proportional(net: FinancialNetwork) -> ClearingState:
    _check_kinds(net, "proportional")
    cached = net._cache.get("clear")
    if cached is not None:
        return cached
    state = _fictitious_default(net)
    if state is None:
        state = _engine(net, None)
    net._cache["clear"] = state
    return state


def clear_edge_ranking(net: FinancialNetwork) -> ClearingState:
    _check_kinds(net, "edge-ranking")
    cached = net._cache.get("clear")
    if cached is not None:
        return cached
    state = _engine(net, None)
    net._cache["clear"] = state
    return state


def clear_general(net: FinancialNetwork, tolerance=None) -> ClearingState:
    tol = default_tolerance() if tolerance is None else to_money(tolerance)
    if tol <= 0:
        raise BadParameters("tolerance must be positive")
    return _engine(net, tol)


def clear(net: FinancialNetwork) -> ClearingState:
    cached = net._cache.get("clear")
    if cached is not None:
        return cached
    kinds = net.kinds()
    if kinds <= {"proportional"}:
        return clear_proportional(net)
    if kinds <= {"edge-ranking"}:
        return clear_edge_ranking(net)
    state = clear_general(net)
    net._cache["clear"] = state
    return state


def _fictitious_default(net: FinancialNetwork) -> ClearingState | None:
    ids = list(net.banks)
    claims = net.claims
    total = {b: net.curves[b].breaks[-1] if net.curves[b].claims else ZERO for b in ids}
    r = {b: ONE for b in ids}
    defaulted: set[str] = set()
    for _ in range(len(ids) + 1):
        assets = {
            b: net.external(b) + sum((r[claims[c].debtor] * claims[c].liability
                                      for c in net.in_claims(b)), ZERO)
            for b in ids
        }
        now = {b for b in ids if total[b] > 0 and assets[b] < total[b]}
        if now <= defaulted:
            break
        defaulted |= now
        order = sorted(defaulted, key=ids.index)
        pos = {b: i for i, b in enumerate(order)}
        a = [[ZERO] * len(order) for _ in order]
        rhs = []
        for i, b in enumerate(order):
            a[i][i] += total[b]
            const = net.external(b)
            for c in net.in_claims(b):
                d = claims[c].debtor
                if d in pos:
                    a[i][pos[d]] -= claims[c].liability
                else:
                    const += claims[c].liability
            rhs.append(const)
        sol = _linalg.solve(a, rhs)
        if sol is None:
            return None
        for b, val in zip(order, sol):
            r[b] = val
    else:
        return None
    state = state_from_assets(net, assets)
    return state if is_fixed_point(net, state) else None


def _segment(curve, funds):
    br = curve.breaks
    if funds <= 0:
        return -1
    if funds > br[-1]:
        return len(br)
    return bisect_left(br, funds)


def _engine(net: FinancialNetwork, tolerance) -> ClearingState:
    ids = list(net.banks)
    n = len(ids)
    idx = {b: i for i, b in enumerate(ids)}
    curves = [net.curves[b] for b in ids]
    cred = [[idx[net.claims[c].creditor] for c in cv.claims] for cv in curves]
    ext = [net.external(b) for b in ids]
    active = [v for v in range(n) if cred[v]]
    n_breaks = sum(len(cv.breaks) for cv in curves)
    budget = max(10 * max(len(net.claims), 1) * max(n_breaks, 1), 1000)

    def step(x):
        y = list(ext)
        for v in active:
            for u, p in zip(cred[v], curves[v].evaluate(x[v])):
                y[u] += p
        return y

    def signature(x):
        return tuple(_segment(curves[v], x[v]) for v in active)

    def affine(x):
        lo = [ZERO] * n
        rows = [[ZERO] * n for _ in range(n)]
        rhs = list(ext)
        for v in active:
            lo_v, base, slopes = curves[v].left_piece(x[v])
            lo[v] = lo_v
            for u, b0, s in zip(cred[v], base, slopes):
                rhs[u] += b0 - s * lo_v
                if s:
                    rows[u][v] += s
        mat = [[(ONE if i == j else ZERO) - rows[i][j] for j in range(n)] for i in range(n)]
        return lo, _linalg.solve(mat, rhs)

    x = [net.max_funds(b) for b in ids]
    steps = 0
    last_sig = None
    tried = set()
    while True:
        y = step(x)
        steps += 1
        if y == x:
            return state_from_assets(net, dict(zip(ids, x)))
        sig = signature(y)
        if sig == last_sig and sig not in tried:
            tried.add(sig)
            lo, z = affine(y)
            if z is not None and all(lo[v] <= z[v] <= y[v] for v in range(n)) and step(z) == z:
                return state_from_assets(net, dict(zip(ids, z)))
            y, used = _drain_jump(y, sig, lo, step, signature, n)
            steps += used
        last_sig = sig
        x = y
        if steps > budget:
            gap = max((a - b for a, b in zip(x, step(x))), default=ZERO)
            if tolerance is not None and gap <= tolerance:
                return state_from_assets(net, dict(zip(ids, x)), tolerance)
            raise NonConvergence(f"clearing did not converge in {budget} rounds (gap {float(gap):.3g})")


def _drain_jump(y, sig, lo, step, signature, n, extra=16):
    """Follow Kleene steps inside the current pieces; if the per-step deficit
    becomes periodic, skip whole periods until a bank reaches its breakpoint."""
    xs = [y]
    ds = []
    seen = {}
    for k in range(2 * n + extra):
        t = step(xs[-1])
        if signature(t) != sig:
            return xs[-1], k
        d = tuple(a - b for a, b in zip(xs[-1], t))
        if not any(d):
            return t, k
        if d in seen:
            i = seen[d]
            total = [sum(col) for col in zip(*ds[i:k])]
            base = xs[i]
            j = min((base[v] - lo[v]) // total[v] for v in range(n) if total[v] > 0)
            if j >= 1:
                return [b - j * s for b, s in zip(base, total)], k
            return t, k
        seen[d] = k
        ds.append(d)
        xs.append(t)
    return xs[-1], 2 * n + extra
