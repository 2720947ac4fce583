"""Optimal haircut rate for a single claims trade."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .clearing import clear
from .errors import SpecViolation, WrongPaymentKind
from .lp_solver import GE, LE, OPTIMAL, LinearProgram, solve_lp
from .net_model import ONE, ZERO, FinancialNetwork, incoming_trade, to_money
from .trade_transform import (
    TradeOutcome,
    apply_trade,
    budget_differences,
    retarget,
    return_network,
    split_network,
)


@dataclass(frozen=True)
class SingleTradeResult:
    alpha: Fraction | None
    return_paid: Fraction
    achieved_assets: Fraction
    outcome: TradeOutcome | None
    probes: int = 0
    note: str = ""

    @property
    def found(self) -> bool:
        return self.alpha is not None


def _check_single(net: FinancialNetwork, e: str, w: str) -> str:
    c = net.claim(e)
    net.bank(w)
    if c.creditor == w or c.debtor == w:
        raise SpecViolation(f"buyer {w!r} must differ from both endpoints of {e!r}")
    return c.creditor


def _absent(net, v, note="") -> SingleTradeResult:
    return SingleTradeResult(None, ZERO, clear(net).assets[v], None, note=note)


def _finish(net, e, w, rho, probes=0, note="") -> SingleTradeResult:
    ell = net.claim(e).liability
    alpha = rho / ell
    out = apply_trade(net, incoming_trade(net.claim(e).creditor, w, [e], [alpha]))
    v = net.claim(e).creditor
    if not out.creditor_positive:
        return SingleTradeResult(None, ZERO, out.pre_state.assets[v], None, probes,
                                 note or "candidate return is not creditor-positive")
    return SingleTradeResult(alpha, rho, out.achieved_assets, out, probes, note)


def via_return_network(net: FinancialNetwork, e: str, w: str) -> SingleTradeResult:
    """Exact optimum from the return network (valid whenever clearing is exact)."""
    v = _check_single(net, e, w)
    pre = clear(net)
    p_e = pre.payments[e]
    if net.external(w) <= p_e:
        return _absent(net, v, "buyer cannot pay more than the current payment")
    ret = return_network(net, e, w)
    st = clear(ret.network)
    a_w = ret.buyer_assets
    ell_r = ret.network.claim(ret.return_claim).liability
    ok = a_w < st.assets[w] <= a_w + ell_r and st.assets[v] > pre.assets[v]
    if not ok:
        return _absent(net, v, "return-network conditions fail")
    return _finish(net, e, w, st.payments[ret.return_claim])


def optimal_single_edge_ranking(net: FinancialNetwork, e: str, w: str) -> SingleTradeResult:
    if net.kinds() - {"edge-ranking"}:
        raise WrongPaymentKind("edge-ranking optimizer needs edge-ranking payments")
    return via_return_network(net, e, w)


def optimal_single_proportional(net: FinancialNetwork, e: str, w: str) -> SingleTradeResult:
    if net.kinds() - {"proportional"}:
        raise WrongPaymentKind("LP optimizer needs proportional payments")
    v = _check_single(net, e, w)
    pre = clear(net)
    post = retarget(net, [e], w)
    banks = list(net.banks)
    k = len(banks)
    pos = {b: i for i, b in enumerate(banks)}
    rho = k
    total = {b: sum((net.claim(c).liability for c in net.out_claims(b)), ZERO) for b in banks}
    ell_e = net.claim(e).liability
    bounds = []
    for b in banks:
        if total[b] == 0:
            bounds.append((ONE, ONE))
        elif b == w:
            bounds.append((pre.recovery[w], pre.recovery[w]))
        elif b == v:
            bounds.append((pre.recovery[v], ONE))
        else:
            bounds.append((ZERO, ONE))
    bounds.append((ZERO, min(net.external(w), ell_e)))
    cons = []

    def inflow(b):
        row = [ZERO] * (k + 1)
        for c in post.in_claims(b):
            row[pos[post.claim(c).debtor]] += post.claim(c).liability
        return row

    sign = {v: ONE, w: -ONE}
    for b in banks:
        row = inflow(b)
        row[rho] = sign.get(b, ZERO)
        if total[b] > 0:
            # r'_b L_b <= a^x_b + incoming (+rho at v, -rho at w)
            rec = [-x for x in row]
            rec[pos[b]] += total[b]
            cons.append((rec, LE, net.external(b)))
        if b in sign:
            # assets of v and w may not fall below their pre-trade level
            cons.append((row, GE, pre.assets[b] - net.external(b)))
    objective = [total[b] for b in banks] + [ZERO]
    res = solve_lp(LinearProgram(objective, cons, bounds))
    if res.status != OPTIMAL:
        # infeasible when the buyer cannot even match the current payment on e
        return _absent(net, v, f"single-trade LP is {res.status}")
    # among optimal solutions prefer the largest return
    tie = LinearProgram([ZERO] * k + [ONE], cons + [(objective, GE, res.objective)], bounds)
    res2 = solve_lp(tie)
    best = res2.values[rho] if res2.status == OPTIMAL else res.values[rho]
    if best <= pre.payments[e]:
        return _absent(net, v, "LP optimum does not exceed the current payment")
    return _finish(net, e, w, best)


def budget_test(net: FinancialNetwork, e: str, w: str, A, a_w=None):
    """Budget differences at target A for the single trade of e to w."""
    v = net.claim(e).creditor
    if a_w is None:
        a_w = clear(net).assets[w]
    sp = split_network(retarget(net, [e], w), v, w, A, a_w)
    st = clear(sp.network)
    slack = ZERO if st.tolerance is None else 2 * st.tolerance
    return budget_differences(sp, st), slack


def approx_single_general(net: FinancialNetwork, e: str, w: str, delta) -> SingleTradeResult:
    delta = to_money(delta)
    if delta <= 0:
        raise SpecViolation("delta must be positive")
    v = _check_single(net, e, w)
    pre = clear(net)
    a_v, a_w = pre.assets[v], pre.assets[w]
    ell_e = net.claim(e).liability
    cap = min(net.external(w), ell_e)
    m_v = (sum((net.claim(c).liability for c in net.in_claims(v) if c != e), ZERO)
           + net.external(v) + cap)
    top = (m_v - a_v) // delta  # targets a_v + k*delta for k = 1..top

    def test(k):
        bd, slack = budget_test(net, e, w, a_v + k * delta, a_w)
        return bd if bd.certifies(slack) and bd.d_v <= cap + slack else None

    lo, hi, best, probes = 1, top, None, 0
    while lo <= hi:
        mid = (lo + hi) // 2
        probes += 1
        bd = test(mid)
        if bd is not None:
            best = bd
            lo = mid + 1
        else:
            hi = mid - 1
    if best is None:
        return SingleTradeResult(None, ZERO, a_v, None, probes, "no target level certified")
    rho = min(best.d_v, cap)
    res = _finish(net, e, w, rho, probes)
    return res


def decide_single_fixed_alpha(net: FinancialNetwork, e: str, w: str, alpha) -> TradeOutcome:
    v = _check_single(net, e, w)
    return apply_trade(net, incoming_trade(v, w, [e], [to_money(alpha)]))


def optimal_single(net: FinancialNetwork, e: str, w: str, delta=None) -> SingleTradeResult:
    """Dispatch on the payment regime."""
    kinds = net.kinds()
    if delta is not None:
        return approx_single_general(net, e, w, delta)
    if kinds <= {"edge-ranking"}:
        return optimal_single_edge_ranking(net, e, w)
    if kinds <= {"proportional"}:
        return optimal_single_proportional(net, e, w)
    return via_return_network(net, e, w)
