"""Applying trades and the auxiliary networks used by the optimizers."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .clearing import ClearingState, clear
from .errors import SpecViolation
from .net_model import (
    INCOMING,
    ZERO,
    Bank,
    Claim,
    EdgeRanking,
    FinancialNetwork,
    GeneralMonotone,
    Proportional,
    TradeSpec,
    trade_returns,
    validate_trade,
)


@dataclass(frozen=True)
class TradeOutcome:
    trade: TradeSpec
    post_network: FinancialNetwork
    pre_state: ClearingState
    post_state: ClearingState
    deltas: dict
    return_paid: Fraction
    creditor_positive: bool
    pareto_positive: bool
    both_strict: bool

    @property
    def achieved_assets(self) -> Fraction:
        return self.post_state.assets[self.trade.focal_bank]


@dataclass(frozen=True)
class BudgetDifference:
    d_v: Fraction
    d_w: Fraction

    def certifies(self, slack: Fraction = ZERO) -> bool:
        """The budget-difference test: d_v = d_w > 0."""
        return abs(self.d_v - self.d_w) <= slack and self.d_v > slack


def fresh_id(taken, base: str) -> str:
    cand = base
    k = 1
    while cand in taken:
        k += 1
        cand = f"{base}{k}"
    return cand


def retarget(network: FinancialNetwork, claims, new_creditor: str) -> FinancialNetwork:
    moved = set(claims)
    return network.derive(claims=[
        Claim(c.id, c.debtor, new_creditor, c.liability) if c.id in moved else c
        for c in network.claims.values()
    ])


def post_trade_network(network: FinancialNetwork, trade: TradeSpec) -> FinancialNetwork:
    validate_trade(network, trade)
    returns = trade_returns(network, trade)
    rho = sum(returns, ZERO)
    w = trade.buyer
    moved = retarget(network, trade.claims, w)
    ext = {w: network.external(w) - rho}
    if trade.direction == INCOMING:
        v = trade.focal_bank
        ext[v] = network.external(v) + rho
    else:
        for cid, r in zip(trade.claims, returns):
            vi = network.claim(cid).creditor
            ext[vi] = ext.get(vi, network.external(vi)) + r
    return moved.with_external(ext)


def _slack(*states) -> Fraction:
    tols = [s.tolerance for s in states if s.tolerance is not None]
    return 2 * max(tols) if tols else ZERO


def apply_trade(network: FinancialNetwork, trade: TradeSpec) -> TradeOutcome:
    post = post_trade_network(network, trade)
    pre_state = clear(network)
    post_state = clear(post)
    slack = _slack(pre_state, post_state)
    deltas = {b: post_state.assets[b] - pre_state.assets[b] for b in network.banks}
    w = trade.buyer
    buyer_ok = deltas[w] >= -slack
    if trade.direction == INCOMING:
        dv = deltas[trade.focal_bank]
        creditor_positive = dv > slack and buyer_ok
        pareto = all(d >= -slack for d in deltas.values()) and any(d > slack for d in deltas.values())
        both = dv > slack and deltas[w] > slack
    else:
        creditors = {network.claim(c).creditor for c in network.out_claims(trade.focal_bank)}
        gains = [deltas[c] for c in creditors]
        pareto = buyer_ok and all(g >= -slack for g in gains) and any(g > slack for g in gains)
        creditor_positive = pareto
        both = any(g > slack for g in gains) and deltas[w] > slack
    return TradeOutcome(
        trade, post, pre_state, post_state, deltas,
        sum(trade_returns(network, trade), ZERO), creditor_positive, pareto, both,
    )


def classify_trade(network: FinancialNetwork, trade: TradeSpec):
    out = apply_trade(network, trade)
    return out.creditor_positive, out.pareto_positive, out.both_strict


def accumulator_network(network: FinancialNetwork, v: str, claims) -> tuple[FinancialNetwork, str]:
    claims = list(claims)
    if not claims:
        raise SpecViolation("accumulator needs a non-empty claim set")
    for cid in claims:
        if network.claim(cid).creditor != v:
            raise SpecViolation(f"claim {cid!r} is not owed to {v!r}")
    if len(set(claims)) != len(claims):
        raise SpecViolation("claims listed twice")
    hub = fresh_id(network.banks, f"{v}~acc")
    hub_claim = fresh_id(network.claims, f"{v}~acc_in")
    total = sum((network.claim(c).liability for c in claims), ZERO)
    moved = set(claims)
    new_claims = [
        Claim(c.id, c.debtor, hub, c.liability) if c.id in moved else c
        for c in network.claims.values()
    ]
    new_claims.append(Claim(hub_claim, hub, v, total))
    banks = list(network.banks.values()) + [Bank(hub, ZERO, Proportional())]
    return network.derive(banks=banks, claims=new_claims), hub_claim


@dataclass(frozen=True)
class ReturnNetwork:
    network: FinancialNetwork
    return_claim: str | None  # None when the buyer has no external assets
    pre_state: ClearingState
    buyer_assets: Fraction


def return_network(network: FinancialNetwork, e: str, w: str) -> ReturnNetwork:
    claim = network.claim(e)
    v = claim.creditor
    network.bank(w)
    if v == w or claim.debtor == w:
        raise SpecViolation("buyer must differ from both endpoints of the traded claim")
    pre = clear(network)
    a_w = pre.assets[w]
    ell_r = min(claim.liability, network.external(w))
    curve = network.curves[w]
    capped = dict(zip(curve.claims, curve.evaluate(a_w)))
    total_w = curve.breaks[-1] if curve.claims else ZERO
    keep = [c for c in curve.claims if capped[c] > 0]
    claims = []
    for c in network.claims.values():
        if c.id == e:
            claims.append(Claim(c.id, c.debtor, w, c.liability))
        elif c.debtor == w:
            if capped[c.id] > 0:
                claims.append(Claim(c.id, w, c.creditor, capped[c.id]))
        else:
            claims.append(c)
    banks = [b for b in network.banks.values() if b.id != w]
    taken = set(network.claims)
    tail = []
    equity = a_w - total_w
    if equity > 0 and ell_r > 0:
        # w keeps its pre-trade surplus, so only funds above a_w reach the return claim
        sink = fresh_id(network.banks, f"{w}~retained")
        eq_claim = fresh_id(taken, f"{w}~retained")
        taken.add(eq_claim)
        banks.append(Bank(sink, ZERO, Proportional()))
        claims.append(Claim(eq_claim, w, sink, equity))
        tail.append((eq_claim, equity, total_w))
    r_id = None
    if ell_r > 0:
        r_id = fresh_id(taken, f"{e}~return")
        claims.append(Claim(r_id, w, v, ell_r))
        tail.append((r_id, ell_r, a_w))
    pf = network.bank(w).payment
    if isinstance(pf, EdgeRanking) or len(curve.claims) <= 1:
        order = [c for c in (pf.order if isinstance(pf, EdgeRanking) else curve.claims) if c in keep]
        new_pf = EdgeRanking(tuple(order) + tuple(c for c, _, _ in tail))
    else:
        new_pf = _capped_table(curve, capped, keep, a_w, tail)
    banks.append(Bank(w, network.external(w), new_pf))
    return ReturnNetwork(network.derive(banks=banks, claims=claims), r_id, pre, a_w)


def _capped_table(curve, capped, keep, a_w, tail) -> GeneralMonotone:
    points = sorted({b for b in curve.breaks if b < a_w} | {ZERO, a_w})
    points.append(a_w + sum((ell for _, ell, begin in tail if begin == a_w), ZERO))
    points = sorted(set(points))
    table = {}
    for j, c in enumerate(curve.claims):
        if c in keep:
            table[c] = tuple((b, curve.evaluate(min(b, a_w))[j]) for b in points)
    for cid, ell, begin in tail:
        table[cid] = tuple((b, min(max(b - begin, ZERO), ell)) for b in points)
    return GeneralMonotone(table)


@dataclass(frozen=True)
class SplitNetwork:
    network: FinancialNetwork
    v: str
    w: str
    v_in: str
    v_out: str
    w_in: str
    w_out: str
    target: Fraction
    buyer_assets: Fraction
    ext_v: Fraction
    ext_w: Fraction


def split_network(network: FinancialNetwork, v: str, w: str, A, a_w) -> SplitNetwork:
    """Split v and w into in-sinks and out-sources.

    ``network`` carries the post-trade topology (traded claims already owed to
    w) and pre-trade external assets; those externals enter only through the
    budget differences.
    """
    A = Fraction(A)
    if A < 0:
        raise SpecViolation("target assets must be non-negative")
    if v == w:
        raise SpecViolation("v and w must differ")
    network.bank(v)
    network.bank(w)
    ids = set(network.banks)
    v_in, v_out = fresh_id(ids, f"{v}~in"), fresh_id(ids, f"{v}~out")
    ids |= {v_in, v_out}
    w_in, w_out = fresh_id(ids, f"{w}~in"), fresh_id(ids, f"{w}~out")
    rename_in = {v: v_in, w: w_in}
    rename_out = {v: v_out, w: w_out}
    claims = [
        Claim(c.id, rename_out.get(c.debtor, c.debtor), rename_in.get(c.creditor, c.creditor), c.liability)
        for c in network.claims.values()
    ]
    banks = []
    for b in network.banks.values():
        if b.id == v:
            banks += [Bank(v_in, ZERO, Proportional()), Bank(v_out, A, b.payment)]
        elif b.id == w:
            banks += [Bank(w_in, ZERO, Proportional()), Bank(w_out, Fraction(a_w), b.payment)]
        else:
            banks.append(b)
    net = network.derive(banks=banks, claims=claims)
    return SplitNetwork(net, v, w, v_in, v_out, w_in, w_out, A, Fraction(a_w),
                        network.external(v), network.external(w))


def budget_differences(split: SplitNetwork, state: ClearingState | None = None) -> BudgetDifference:
    if state is None:
        state = clear(split.network)
    net = split.network
    into_v = sum((state.payments[c] for c in net.in_claims(split.v_in)), ZERO)
    into_w = sum((state.payments[c] for c in net.in_claims(split.w_in)), ZERO)
    d_w = split.ext_w + into_w - split.buyer_assets
    d_v = split.target - (split.ext_v + into_v)
    return BudgetDifference(d_v, d_w)
