"""Multi-trades of incoming claims: fixed sets, knapsack-based selection, fixed rates."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import ceil, floor

from .clearing import clear
from .errors import SpecViolation, WrongPaymentKind
from .knapsack import rational_knapsack
from .net_model import ONE, ZERO, FinancialNetwork, incoming_trade, to_money
from .single_opt import optimal_single
from .trade_transform import TradeOutcome, apply_trade, accumulator_network, split_network


@dataclass(frozen=True)
class MultiTradeResult:
    claims: tuple[str, ...]
    rates: tuple[Fraction, ...]
    return_paid: Fraction
    achieved_assets: Fraction
    epsilon_used: Fraction = ZERO
    subsidies: tuple[Fraction, Fraction] | None = None
    outcome: TradeOutcome | None = None
    level: Fraction | None = None
    probes: int = 0
    note: str = ""

    @property
    def found(self) -> bool:
        return bool(self.claims)


def _absent(assets, note, probes=0) -> MultiTradeResult:
    return MultiTradeResult((), (), ZERO, assets, probes=probes, note=note)


def tradeable(net: FinancialNetwork, v: str, w: str) -> list[str]:
    """Incoming claims of v that w may buy (debtor differs from w)."""
    return [c for c in net.in_claims(v) if net.claim(c).debtor != w]


def _check_set(net, v, w, claims):
    if v == w:
        raise SpecViolation("buyer must differ from the creditor")
    net.bank(w)
    if not claims:
        raise SpecViolation("claim set must be non-empty")
    for c in claims:
        cl = net.claim(c)
        if cl.creditor != v or cl.debtor == w:
            raise SpecViolation(f"claim {c!r} cannot be traded from {v!r} to {w!r}")


def optimal_multi_in_fixed_set(net: FinancialNetwork, v: str, w: str, claims, delta=None) -> MultiTradeResult:
    claims = tuple(claims)
    _check_set(net, v, w, claims)
    acc, hub_claim = accumulator_network(net, v, claims)
    single = optimal_single(acc, hub_claim, w, delta)
    a_v = clear(net).assets[v]
    if not single.found:
        return _absent(a_v, single.note or "no creditor-positive uniform rate")
    out = apply_trade(net, incoming_trade(v, w, claims, single.alpha))
    if not out.creditor_positive:
        return _absent(a_v, "accumulator optimum is not creditor-positive in the original network")
    return MultiTradeResult(claims, (single.alpha,) * len(claims), out.return_paid,
                            out.achieved_assets, outcome=out, probes=single.probes)


@dataclass(frozen=True)
class KnapsackView:
    target_assets: Fraction
    items: tuple[tuple[str, Fraction, Fraction], ...]  # (claim, weight p', value l - p')
    value_bound: Fraction
    weight_bound: Fraction
    feasible_eq1: bool
    payments: dict = field(repr=False, default_factory=dict)

    def satisfied_by(self, subset) -> bool:
        chosen = set(subset)
        val = sum((x for c, _, x in self.items if c in chosen), ZERO)
        wt = sum((x for c, x, _ in self.items if c in chosen), ZERO)
        return val >= self.value_bound and wt <= self.weight_bound

    def decide_exhaustive(self) -> bool:
        """Budget balance plus some non-empty subset meeting both bounds (exact, exponential)."""
        if not self.feasible_eq1:
            return False
        ids = [c for c, _, _ in self.items]
        return any(self.satisfied_by(s) for k in range(1, len(ids) + 1) for s in combinations(ids, k))


def knapsack_view(net: FinancialNetwork, v: str, w: str, A) -> KnapsackView:
    A = to_money(A)
    pre = clear(net)
    a_v, a_w = pre.assets[v], pre.assets[w]
    if A <= a_v:
        raise SpecViolation(f"target {A} must exceed the current assets {a_v}")
    sp = split_network(net, v, w, A, a_w)
    st = clear(sp.network)
    slack = ZERO if st.tolerance is None else 2 * st.tolerance
    p = st.payments
    into_v = net.in_claims(v)
    into_w = net.in_claims(w)
    big_p = sum((p[c] for c in into_v), ZERO)
    x_v, x_w = net.external(v), net.external(w)
    eq1 = abs((A - x_v) + (a_w - x_w) - big_p - sum((p[c] for c in into_w), ZERO)) <= slack
    items = tuple((c, p[c], net.claim(c).liability - p[c]) for c in tradeable(net, v, w))
    return KnapsackView(A, items, A - x_v - big_p, x_w - A + x_v + big_p, eq1, dict(p))


def _realize(net, v, w, A, chosen, view, eps, probes=0) -> MultiTradeResult:
    weights = {c: wt for c, wt, _ in view.items}
    rho = view.value_bound + sum((weights[c] for c in chosen), ZERO)
    total = sum((net.claim(c).liability for c in chosen), ZERO)
    alpha = rho / total
    a_v = clear(net).assets[v]
    if rho <= 0:
        return _absent(a_v, "non-positive return", probes)
    out = apply_trade(net, incoming_trade(v, w, chosen, alpha, rate_cap=max(ONE, 1 + eps)))
    if not out.creditor_positive or out.achieved_assets < A:
        return _absent(a_v, "knapsack solution failed exact re-verification", probes)
    return MultiTradeResult(tuple(chosen), (alpha,) * len(chosen), rho, out.achieved_assets,
                            Fraction(eps), outcome=out, level=A, probes=probes)


def level_fptas(net: FinancialNetwork, v: str, w: str, A, epsilon) -> MultiTradeResult:
    eps = to_money(epsilon)
    if eps <= 0:
        raise SpecViolation("epsilon must be positive")
    view = knapsack_view(net, v, w, A)
    a_v = clear(net).assets[v]
    if not view.feasible_eq1:
        return _absent(a_v, "budget balance fails at this level")
    usable = [(c, wt, val) for c, wt, val in view.items if wt <= view.weight_bound]
    if not usable:
        return _absent(a_v, "no claim satisfies the weight bound")
    if view.value_bound <= 0:
        c = min(usable, key=lambda it: (it[1], it[0]))[0]
        return _realize(net, v, w, view.target_assets, [c], view, eps)
    r_max = max(val for _, _, val in usable)
    if r_max == 0:
        return _absent(a_v, "all residuals are zero")
    m = len(view.items)
    # s = eps*r_max/(m(1+eps)) keeps rho <= (1+eps)*sum(l) exact for the rounded optimum
    s = eps * r_max / (m * (1 + eps))
    units = [ceil(val / s) for _, _, val in usable]
    res = rational_knapsack(units, [wt for _, wt, _ in usable], view.weight_bound)
    if res is None or res[0] * s < view.value_bound or res[2] == 0:
        return _absent(a_v, "rounded knapsack misses the value bound")
    chosen = [usable[i][0] for i in range(len(usable)) if res[2] >> i & 1]
    return _realize(net, v, w, view.target_assets, chosen, view, eps)


def bicriteria_fptas(net: FinancialNetwork, v: str, w: str, epsilon, delta) -> MultiTradeResult:
    eps, delta = to_money(epsilon), to_money(delta)
    if eps <= 0 or delta <= 0:
        raise SpecViolation("epsilon and delta must be positive")
    net.bank(v)
    net.bank(w)
    pre = clear(net)
    a_v = pre.assets[v]
    m_v = net.external(v) + net.external(w) + sum((net.claim(c).liability for c in net.in_claims(v)), ZERO)
    top = floor((m_v - a_v) / delta)
    lo, hi, probes = 1, top, 0
    found = []
    while lo <= hi:
        mid = (lo + hi) // 2
        probes += 1
        res = level_fptas(net, v, w, a_v + mid * delta, eps)
        if res.found:
            found.append(res)
            lo = mid + 1
        else:
            hi = mid - 1
    if not found:
        return _absent(a_v, "no level above the current assets is reachable", probes)
    best = max(found, key=lambda r: (r.achieved_assets, r.level))
    return MultiTradeResult(best.claims, best.rates, best.return_paid, best.achieved_assets,
                            best.epsilon_used, outcome=best.outcome, level=best.level, probes=probes)


def _integral(net: FinancialNetwork) -> bool:
    return (all(c.liability.denominator == 1 for c in net.claims.values())
            and all(b.external_assets.denominator == 1 for b in net.banks.values()))


def exact_level_edge_ranking(net: FinancialNetwork, v: str, w: str, epsilon) -> MultiTradeResult:
    if net.kinds() - {"edge-ranking"}:
        raise WrongPaymentKind("exact level search needs edge-ranking payments")
    if not _integral(net):
        raise WrongPaymentKind("exact level search needs integral liabilities and external assets")
    return bicriteria_fptas(net, v, w, epsilon, ONE)


def decide_fixed_rates_set(net: FinancialNetwork, v: str, w: str, claims, rates) -> TradeOutcome:
    claims = tuple(claims)
    _check_set(net, v, w, claims)
    if isinstance(rates, dict):
        rates = [rates[c] for c in claims]
    return apply_trade(net, incoming_trade(v, w, claims, [to_money(r) for r in rates]))


def subsidy_n(net: FinancialNetwork, v: str, w: str) -> int:
    """The size parameter n of the subsidized scheme: max(|V|, tradeable claims of v)."""
    return max(len(net.banks), len(tradeable(net, v, w)))


def subsidized_fptas_fixed_rates(net: FinancialNetwork, v: str, w: str, rates, delta) -> MultiTradeResult:
    delta = to_money(delta)
    if delta <= 0:
        raise SpecViolation("delta must be positive")
    items = tradeable(net, v, w)
    if not items:
        raise SpecViolation(f"{v!r} has no claims that {w!r} can buy")
    rates = {c: to_money(rates[c]) for c in items if c in rates}
    for c, a in rates.items():
        if a < 0 or a > 1:
            raise SpecViolation(f"rate {a} for {c!r} outside [0, 1]")
    items = [c for c in items if c in rates]
    rho = {c: rates[c] * net.claim(c).liability for c in items}
    pre = clear(net)
    a_v, a_w = pre.assets[v], pre.assets[w]
    x_v, x_w = net.external(v), net.external(w)
    n = subsidy_n(net, v, w)
    s = sum((net.claim(c).liability for c in net.in_claims(v)), ZERO) * delta / n
    if s == 0:
        return _absent(a_v, "no incoming liabilities")
    best = None
    steps = ceil(n / delta)
    for i in range(1, steps + 1):
        level = a_v + i * s
        cand = _subsidy_level(net, v, w, level, s, items, rho, a_w, x_v, x_w, delta, n)
        if cand is not None:
            best = cand
    if best is None:
        return _absent(a_v, "no subsidized trade at any level", steps)
    level, chosen, ret, sub_v, sub_w = best
    trade = incoming_trade(v, w, chosen, [rates[c] for c in chosen])
    subsidized = net.with_external({v: x_v + sub_v, w: x_w + sub_w})
    out = apply_trade(subsidized, trade)
    return MultiTradeResult(tuple(chosen), tuple(rates[c] for c in chosen), ret,
                            out.achieved_assets, subsidies=(sub_v, sub_w), outcome=out,
                            level=level, probes=steps,
                            note=f"step s = {s}; subsidies bounded by (2s, s)")


def _subsidy_level(net, v, w, level, s, items, rho, a_w, x_v, x_w, delta, n):
    sp = split_network(net, v, w, level, a_w)
    p = clear(sp.network).payments
    big_p = sum((p[c] for c in net.in_claims(v)), ZERO)
    w_in = sum((p[c] for c in net.in_claims(w)), ZERO)
    r = {c: rho[c] - p[c] for c in items}
    s2 = sum((abs(x) for x in r.values()), ZERO) * delta / (n * n)
    if s2 == 0:
        up = {c: 0 for c in items}
        down = dict(up)
    else:
        up = {c: ceil(r[c] / s2) for c in items}
        down = {c: floor(r[c] / s2) for c in items}
    need_v = level - s - x_v - big_p
    room_w = x_w + w_in - a_w
    # sparse 2-D table: (sum of r+ units, sum of r- units) -> (min return, mask)
    table = {(0, 0): (ZERO, 0)}
    for i, c in enumerate(items):
        nxt = dict(table)
        for (x, y), (ret, mask) in table.items():
            key = (x + up[c], y + down[c])
            cand = (ret + rho[c], mask | 1 << i)
            old = nxt.get(key)
            if old is None or cand < old:
                nxt[key] = cand
        table = nxt
    best = None
    for (x, y), (ret, mask) in table.items():
        if mask == 0 or ret <= 0 or ret > x_w:
            continue
        if s2 == 0:
            ok = ZERO >= need_v and ZERO <= room_w
        else:
            ok = x * s2 >= need_v and y * s2 <= room_w
        if not ok:
            continue
        chosen = [c for j, c in enumerate(items) if mask >> j & 1]
        net_r = sum((r[c] for c in chosen), ZERO)
        sub_v = max(ZERO, level - x_v - big_p - net_r)
        sub_w = max(ZERO, net_r - room_w)
        key = (ret, sub_v + sub_w, mask)
        if best is None or key < best[0]:
            best = (key, chosen, ret, sub_v, sub_w)
    if best is None:
        return None
    return level, best[1], best[2], best[3], best[4]
