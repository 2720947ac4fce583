"""Multi-trades of a debtor's outgoing claims (Pareto-positive trades)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product

from .clearing import clear
from .errors import InstanceTooLarge, SpecViolation, Unaffordable, WrongPaymentKind
from .lp_solver import GE, LE, OPTIMAL, LinearProgram, solve_lp
from .net_model import ONE, ZERO, FinancialNetwork, outgoing_trade, to_money
from .trade_transform import TradeOutcome, apply_trade, retarget


@dataclass(frozen=True)
class OutgoingTradeResult:
    claims: tuple[str, ...]
    rates: tuple[Fraction, ...]
    returns: tuple[Fraction, ...]
    creditor_profit_total: Fraction
    outcome: TradeOutcome | None
    note: str = ""
    traded_profit: Fraction = ZERO  # profit of the creditors of the traded claims only

    @property
    def found(self) -> bool:
        return self.outcome is not None and self.outcome.pareto_positive


def creditors_of(net: FinancialNetwork, u: str) -> list[str]:
    seen = []
    for c in net.out_claims(u):
        cr = net.claim(c).creditor
        if cr not in seen:
            seen.append(cr)
    return seen


def _check(net, u, w, claims):
    if u == w:
        raise SpecViolation("buyer must differ from the debtor")
    net.bank(w)
    if not claims:
        raise SpecViolation("claim set must be non-empty")
    for c in claims:
        cl = net.claim(c)
        if cl.debtor != u or cl.creditor == w:
            raise SpecViolation(f"claim {c!r} cannot be bought from {u!r}'s creditors by {w!r}")


def _result(net, u, w, claims, rates, note="") -> OutgoingTradeResult:
    out = apply_trade(net, outgoing_trade(u, w, claims, rates))
    profit = sum((out.deltas[c] for c in creditors_of(net, u)), ZERO)
    traded = sum((out.deltas[c] for c in {net.claim(x).creditor for x in claims}), ZERO)
    rets = tuple(a * net.claim(c).liability for c, a in zip(claims, rates))
    return OutgoingTradeResult(tuple(claims), tuple(rates), rets, profit, out, note, traded)


def decide_out_fixed(net: FinancialNetwork, u: str, w: str, claims, rates) -> OutgoingTradeResult:
    claims = tuple(claims)
    _check(net, u, w, claims)
    if isinstance(rates, dict):
        rates = [rates[c] for c in claims]
    rates = [to_money(r) for r in rates]
    total = sum((a * net.claim(c).liability for c, a in zip(claims, rates)), ZERO)
    if total > net.external(w):
        raise Unaffordable(f"returns {total} exceed buyer external assets {net.external(w)}")
    return _result(net, u, w, claims, rates)


def optimal_out_proportional(net: FinancialNetwork, u: str, w: str, claims) -> OutgoingTradeResult:
    if net.kinds() - {"proportional"}:
        raise WrongPaymentKind("outgoing LP needs proportional payments")
    claims = tuple(claims)
    _check(net, u, w, claims)
    pre = clear(net)
    post = retarget(net, claims, w)
    banks = list(net.banks)
    k = len(banks)
    pos = {b: i for i, b in enumerate(banks)}
    q = len(claims)
    nvar = k + q
    total = {b: sum((net.claim(c).liability for c in net.out_claims(b)), ZERO) for b in banks}
    creditors = creditors_of(net, u)
    traded_to = [net.claim(c).creditor for c in claims]

    def inflow(b):
        row = [ZERO] * nvar
        for c in post.in_claims(b):
            row[pos[post.claim(c).debtor]] += post.claim(c).liability
        for i, vi in enumerate(traded_to):
            if vi == b:
                row[k + i] += 1
        if b == w:
            for i in range(q):
                row[k + i] -= 1
        return row

    bounds = []
    for b in banks:
        if total[b] == 0:
            bounds.append((ONE, ONE))
        elif b == w:
            # the buyer may gain and pass funds on; pinning r'_w would exclude that
            bounds.append((pre.recovery[w], ONE))
        elif b in creditors:
            bounds.append((pre.recovery[b], ONE))
        else:
            bounds.append((ZERO, ONE))
    bounds += [(ZERO, net.claim(c).liability) for c in claims]
    cons = []
    budget = [ZERO] * k + [ONE] * q
    cons.append((budget, LE, net.external(w)))
    for b in banks:
        row = inflow(b)
        if total[b] > 0:
            rec = [-x for x in row]
            rec[pos[b]] += total[b]
            cons.append((rec, LE, net.external(b)))
        if b in creditors or b == w:
            # assets of every creditor of u and of the buyer stay at least at their old level
            cons.append((row, GE, pre.assets[b] - net.external(b)))
    agg = [ZERO] * nvar
    for b in set(traded_to):
        agg = [a + x for a, x in zip(agg, inflow(b))]
    floor_ = sum((pre.assets[b] - net.external(b) for b in set(traded_to)), ZERO)
    cons.append((agg, GE, floor_))
    res = solve_lp(LinearProgram(agg, cons, bounds))
    if res.status != OPTIMAL:
        return OutgoingTradeResult(claims, (), (), ZERO, None, f"LP {res.status}")
    rets = res.values[k:]
    # prefer the largest returns among optimal solutions
    tie = LinearProgram(budget, cons + [(agg, GE, res.objective)], bounds)
    res2 = solve_lp(tie)
    if res2.status == OPTIMAL:
        rets = res2.values[k:]
    rates = [r / net.claim(c).liability for c, r in zip(claims, rets)]
    out = _result(net, u, w, claims, rates)
    if not out.outcome.pareto_positive:
        return OutgoingTradeResult(claims, tuple(rates), out.returns, out.creditor_profit_total,
                                   None, "LP optimum is not Pareto-positive after exact re-clearing",
                                   out.traded_profit)
    return out


def grid_out_search(net: FinancialNetwork, u: str, w: str, claims, resolution=50,
                    objective: str = "all") -> OutgoingTradeResult:
    """Best Pareto-positive trade on the rate grid {0, 1/g, ..., 1}^|C|.

    ``objective`` is "all" (profit of every creditor of u) or "traded"
    (profit of the creditors of the traded claims, the LP's objective).
    """
    if objective not in ("all", "traded"):
        raise SpecViolation(f"unknown objective {objective!r}")
    score = (lambda r: r.creditor_profit_total) if objective == "all" else (lambda r: r.traded_profit)
    claims = tuple(claims)
    _check(net, u, w, claims)
    ells = [net.claim(c).liability for c in claims]
    budget = net.external(w)
    best = None
    steps = [Fraction(i, resolution) for i in range(resolution + 1)]
    for rates in product(steps, repeat=len(claims)):
        if sum((a * l for a, l in zip(rates, ells)), ZERO) > budget:
            continue
        res = _result(net, u, w, claims, list(rates))
        if res.found and (best is None or score(res) > score(best)):
            best = res
    if best is None:
        return OutgoingTradeResult(claims, (), (), ZERO, None, "no Pareto-positive grid point")
    return best


def brute_force_out_select(net: FinancialNetwork, u: str, w: str, grid_resolution=50,
                           limit: int = 12) -> OutgoingTradeResult:
    cands = [c for c in net.out_claims(u) if net.claim(c).creditor != w]
    if len(cands) > limit:
        raise InstanceTooLarge(f"{len(cands)} outgoing claims exceed the limit {limit}")
    prop = not (net.kinds() - {"proportional"})
    best = None
    for size in range(1, len(cands) + 1):
        for subset in combinations(cands, size):
            if prop:
                res = optimal_out_proportional(net, u, w, subset)
            else:
                res = grid_out_search(net, u, w, subset, grid_resolution)
            if res.found and (best is None or res.creditor_profit_total > best.creditor_profit_total):
                best = res
    if best is None:
        return OutgoingTradeResult((), (), (), ZERO, None, "no Pareto-positive subset")
    return best
