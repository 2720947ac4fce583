"""Brute-force oracles and reduction-instance generators for cross-validation."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

from .clearing import clear
from .errors import BadParameters, InstanceTooLarge, SpecViolation
from .net_model import (
    ONE,
    ZERO,
    Bank,
    Claim,
    EdgeRanking,
    FinancialNetwork,
    GeneralMonotone,
    Proportional,
    TradeSpec,
    build_network,
    incoming_trade,
    to_money,
)
from .trade_transform import apply_trade

KINDS = ("proportional", "edge-ranking", "general", "mixed")


@dataclass(frozen=True)
class OracleResult:
    best_assets: Fraction
    best_trade: TradeSpec | None
    search_space_size: int


# ---------------------------------------------------------------- oracles


class _Probe:
    """Evaluates the incoming trade of ``claims`` for a given total return."""

    def __init__(self, net, v, w, claims):
        self.net, self.v, self.w = net, v, w
        self.claims = tuple(claims)
        self.total = sum((net.claim(c).liability for c in claims), ZERO)
        self.cap = min(self.total, net.external(w))
        self.calls = 0
        self._memo = {}

    def outcome(self, rho):
        rho = Fraction(rho)
        if rho not in self._memo:
            self.calls += 1
            trade = incoming_trade(self.v, self.w, self.claims, rho / self.total)
            self._memo[rho] = apply_trade(self.net, trade)
        return self._memo[rho]

    def phi(self, rho):
        """Buyer's asset change; non-increasing in the return."""
        return self.outcome(rho).deltas[self.w]


def simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """The fraction with the smallest denominator in the closed interval [lo, hi]."""
    if lo > hi:
        lo, hi = hi, lo
    fl = lo.numerator // lo.denominator
    if fl == lo or fl + 1 <= hi:
        return Fraction(fl if fl == lo else fl + 1)
    # lo and hi share the integer part; recurse on reciprocals of the fractional parts
    inner = simplest_between(1 / (hi - fl), 1 / (lo - fl))
    return fl + 1 / inner


def _max_feasible_return(probe: _Probe, grid_points: int, refine: bool):
    """Largest return keeping the buyer whole, or None if none exists.

    The buyer's change phi is non-increasing in the return, so the grid cell
    holding the boundary is found by bisection over grid indices.  Refinement
    then looks for the exact boundary: phi is piecewise linear, so the line
    through two points right of the boundary usually hits it, and the simplest
    rational in the bracket catches boundaries at jumps.  A candidate r is
    accepted once phi(r) >= 0 and phi(r + eta) < 0 for a tiny eta.
    """
    cap = probe.cap
    if cap <= 0:
        return None
    if probe.phi(cap) >= 0:
        return cap
    if probe.phi(ZERO) < 0:
        return None
    g = grid_points
    lo_i, hi_i = 0, g
    while hi_i - lo_i > 1:
        mid = (lo_i + hi_i) // 2
        if probe.phi(cap * mid / g) >= 0:
            lo_i = mid
        else:
            hi_i = mid
    lo, hi = cap * lo_i / g, cap * hi_i / g
    if not refine:
        return lo
    eta = cap / (1 << 48)
    negs = [hi]

    def certified(r):
        return probe.phi(r) >= 0 and probe.phi(min(r + eta, hi)) < 0

    for _ in range(100):
        cands = []
        if len(negs) >= 2:
            n1, n2 = sorted(negs)[:2]
            f1, f2 = probe.phi(n1), probe.phi(n2)
            if f1 != f2:
                cands.append(n1 - f1 * (n2 - n1) / (f2 - f1))
        f_lo, f_hi = probe.phi(lo), probe.phi(hi)
        if f_lo > 0:
            cands.append(lo + f_lo * (hi - lo) / (f_lo - f_hi))
        cands.append(simplest_between(lo, hi))
        cands.append((lo + hi) / 2)
        for r in cands:
            if not lo <= r < hi:
                continue
            if probe.phi(r) >= 0:
                lo = r
                if certified(r):
                    return r
            else:
                hi = r
                negs.append(r)
        if hi - lo < eta:
            break
    return lo


def _best_for_set(net, v, w, claims, grid_points, refine):
    probe = _Probe(net, v, w, claims)
    rho = _max_feasible_return(probe, grid_points, refine)
    if rho is None:
        return None, probe.calls
    out = probe.outcome(rho)
    if not out.creditor_positive:
        return None, probe.calls
    return out, probe.calls


def oracle_single_alpha(net: FinancialNetwork, e: str, w: str, grid_points: int = 100,
                        refine: bool = True) -> OracleResult:
    """Best creditor-positive rate for a single claim by grid search plus exact refinement."""
    if grid_points < 2:
        raise BadParameters("grid_points must be at least 2")
    v = net.claim(e).creditor
    if w in (v, net.claim(e).debtor):
        raise SpecViolation(f"buyer {w!r} must differ from both endpoints of {e!r}")
    out, calls = _best_for_set(net, v, w, [e], grid_points, refine)
    if out is None:
        return OracleResult(clear(net).assets[v], None, calls)
    return OracleResult(out.achieved_assets, out.trade, calls)


def oracle_multi_in(net: FinancialNetwork, v: str, w: str, grid_points: int = 100,
                    refine: bool = True, limit: int = 12, target=None) -> OracleResult:
    """Best creditor-positive incoming multi-trade over all claim subsets.

    Only the total return matters for the post-trade network, so a uniform
    rate per subset loses nothing.  A subset is skipped when v's assets at the
    largest affordable return (an upper bound, since v's assets grow with the
    return) cannot beat the best found so far or the optional ``target``.
    """
    cands = [c for c in net.in_claims(v) if net.claim(c).debtor != w]
    if len(cands) > limit:
        raise InstanceTooLarge(f"{len(cands)} incoming claims exceed the limit {limit}")
    a_v = clear(net).assets[v]
    target = a_v if target is None else to_money(target)
    best, best_key, calls = None, None, 0
    for size in range(1, len(cands) + 1):
        for subset in combinations(cands, size):
            probe = _Probe(net, v, w, subset)
            if probe.cap <= 0:
                continue
            bound = probe.outcome(probe.cap).achieved_assets
            if bound <= a_v or bound < target or (best_key is not None and bound < best_key[0]):
                calls += probe.calls
                continue
            rho = _max_feasible_return(probe, grid_points, refine)
            calls += probe.calls
            if rho is None:
                continue
            out = probe.outcome(rho)
            if not out.creditor_positive:
                continue
            key = (out.achieved_assets, -out.return_paid)
            if best_key is None or key > best_key:
                best, best_key = out, key
    if best is None:
        return OracleResult(a_v, None, calls)
    return OracleResult(best.achieved_assets, best.trade, calls)


def oracle_multi_in_sets(net, v, w, grid_points=100, refine=True, limit=12):
    """Per-subset optimum: list of (claims, TradeOutcome or None, clearing calls)."""
    cands = [c for c in net.in_claims(v) if net.claim(c).debtor != w]
    if len(cands) > limit:
        raise InstanceTooLarge(f"{len(cands)} incoming claims exceed the limit {limit}")
    rows = []
    for size in range(1, len(cands) + 1):
        for subset in combinations(cands, size):
            out, calls = _best_for_set(net, v, w, subset, grid_points, refine)
            rows.append((subset, out, calls))
    return rows


def oracle_fixed_rates(net: FinancialNetwork, v: str, w: str, rates, limit: int = 12) -> OracleResult:
    """Exhaustive search over subsets with the given fixed rates (exact)."""
    cands = [c for c in net.in_claims(v) if net.claim(c).debtor != w and c in rates]
    if len(cands) > limit:
        raise InstanceTooLarge(f"{len(cands)} incoming claims exceed the limit {limit}")
    a_v = clear(net).assets[v]
    best, best_key, count = None, None, 0
    for size in range(1, len(cands) + 1):
        for subset in combinations(cands, size):
            trade = incoming_trade(v, w, subset, [to_money(rates[c]) for c in subset])
            rho = sum((a * net.claim(c).liability for c, a in zip(subset, trade.rates)), ZERO)
            if rho > net.external(w):
                continue
            count += 1
            out = apply_trade(net, trade)
            if out.creditor_positive:
                key = (out.achieved_assets, -rho)
                if best_key is None or key > best_key:
                    best, best_key = out, key
    if best is None:
        return OracleResult(a_v, None, count)
    return OracleResult(best.achieved_assets, best.trade, count)


def subset_sum_exists(values, target) -> bool:
    """Exhaustive check for a non-empty subset summing exactly to target."""
    values = list(values)
    return any(sum(s) == target for k in range(1, len(values) + 1) for s in combinations(values, k))


# ------------------------------------------------------------- generators


def _check_subset_sum(S, T):
    S = [int(b) for b in S]
    if not S:
        raise BadParameters("need at least one integer")
    if any(b <= 1 for b in S):
        raise BadParameters("all integers must exceed 1")
    if T <= 0:
        raise BadParameters("target must be positive")
    if T > sum(S):
        raise BadParameters("target exceeds the total")
    return S


def gen_subset_sum_incoming(S, T, kind: str = "edge-ranking") -> FinancialNetwork:
    """Subset-Sum instance as a variable-rate incoming trade.

    v is savable by a creditor-positive multi-trade iff some subset sums to T.
    Every bank has at most one outgoing claim, so the payment kind is cosmetic.
    """
    S = _check_subset_sum(S, T)
    pf = Proportional() if kind == "proportional" else None
    banks = [Bank("v", ZERO, pf or EdgeRanking(("e",))), Bank("w", Fraction(2 * T), pf or EdgeRanking(()))]
    claims = [Claim("e", "v", "w", Fraction(T + sum(S)))]
    for i, b in enumerate(S, 1):
        banks.append(Bank(f"b{i}", Fraction(b), pf or EdgeRanking((f"e{i}",))))
        claims.append(Claim(f"e{i}", f"b{i}", "v", Fraction(2 * b)))
    return build_network(banks, claims)


def gen_subset_sum_incoming_fixed(S, T):
    """Subset-Sum instance for fixed rates; returns (network, rates)."""
    S = _check_subset_sum(S, T)
    banks = [
        Bank("u", Fraction(T - 1), EdgeRanking(("e'",))),
        Bank("v", ZERO, EdgeRanking(("e",))),
        Bank("w", Fraction(T), EdgeRanking(())),
    ]
    claims = [Claim("e", "v", "w", Fraction(T)), Claim("e'", "u", "v", Fraction(T - 1))] if T > 1 else [
        Claim("e", "v", "w", Fraction(T))]
    rates = {"e'": ZERO} if T > 1 else {}
    for i, b in enumerate(S, 1):
        banks.append(Bank(f"b{i}", ZERO, EdgeRanking((f"e{i}",))))
        claims.append(Claim(f"e{i}", f"b{i}", "v", Fraction(b)))
        rates[f"e{i}"] = ONE
    if T == 1:
        banks[0] = Bank("u", ZERO, EdgeRanking(()))
    return build_network(banks, claims), rates


def _check_sets(m, sets, k):
    if m < 1:
        raise BadParameters("universe must be non-empty")
    if k < 1:
        raise BadParameters("k must be positive")
    if k > len(sets):
        raise BadParameters("k exceeds the number of sets")
    out = []
    for s in sets:
        s = sorted(set(int(x) for x in s))
        if not s or s[0] < 1 or s[-1] > m:
            raise BadParameters(f"set {s} is empty or not a subset of 1..{m}")
        out.append(s)
    return out


def gen_set_packing_outgoing(m: int, sets, k: int) -> FinancialNetwork:
    """Set-Packing instance for outgoing edge-ranking trades (M = m^3).

    Each S_i pays its element claims first and its big claim to w last.
    """
    sets = _check_sets(m, sets, k)
    M = Fraction(m ** 3)
    banks = [Bank("w", k * (M + m), EdgeRanking(()))]
    claims = []
    v_order = []
    for i, s in enumerate(sets, 1):
        cid = f"v-S{i}"
        v_order.append(cid)
        claims.append(Claim(cid, "v", f"S{i}", M + len(s)))
        order = []
        for j in s:
            claims.append(Claim(f"S{i}-u{j}", f"S{i}", f"u{j}", ONE))
            order.append(f"S{i}-u{j}")
        claims.append(Claim(f"S{i}-w", f"S{i}", "w", M))
        order.append(f"S{i}-w")
        banks.append(Bank(f"S{i}", ZERO, EdgeRanking(tuple(order))))
    banks.insert(0, Bank("v", ZERO, EdgeRanking(tuple(v_order))))
    for j in range(1, m + 1):
        outs = ()
        if any(j in s for s in sets):
            claims.append(Claim(f"u{j}-w", f"u{j}", "w", ONE))
            outs = (f"u{j}-w",)
        banks.append(Bank(f"u{j}", ZERO, EdgeRanking(outs)))
    return build_network(banks, claims)


def gen_set_packing_prop(m: int, sets, k: int, M=None) -> FinancialNetwork:
    """d-Set-Packing instance for outgoing proportional trades.

    M must be a positive multiple of d; the default is d * m^3.
    """
    sets = _check_sets(m, sets, k)
    d = len(sets[0])
    if any(len(s) != d for s in sets):
        raise BadParameters("all sets must have the same size")
    M = Fraction(d * m ** 3) if M is None else to_money(M)
    if M <= 0 or (M / d).denominator != 1:
        raise BadParameters("M must be a positive multiple of d")
    l = len(sets)
    oc = {j: sum(1 for s in sets if j in s) for j in range(1, m + 1)}
    banks = [Bank("v", l * M), Bank("w", k * (M + d))]
    claims = []
    for i, s in enumerate(sets, 1):
        claims.append(Claim(f"v-S{i}", "v", f"S{i}", M + d))
        banks.append(Bank(f"S{i}", ZERO))
        for j in s:
            claims.append(Claim(f"S{i}-u{j}", f"S{i}", f"u{j}", M / d + 1))
    for j in range(1, m + 1):
        banks.append(Bank(f"u{j}", ZERO))
        if oc[j]:
            claims.append(Claim(f"u{j}-w", f"u{j}", "w", oc[j] * M / d + 1))
    return build_network(banks, claims)


def _random_table(rng, outs, ells):
    """Fill random chunks of each claim in a shuffled order.

    Every claim is split into up to three pieces; funds saturate pieces one
    after another, which gives a monotone piecewise-linear function that pays
    exactly min(funds, L).
    """
    chunks = []
    for c, ell in zip(outs, ells):
        cuts = sorted({Fraction(rng.randint(1, int(ell * 4) - 1), 4) for _ in range(rng.randint(0, 2))
                       if ell * 4 > 1} - {ZERO, ell})
        edges = [ZERO] + cuts + [ell]
        chunks += [(c, hi - lo) for lo, hi in zip(edges, edges[1:])]
    rng.shuffle(chunks)
    filled = {c: ZERO for c in outs}
    table = {c: [(ZERO, ZERO)] for c in outs}
    funds = ZERO
    for c, size in chunks:
        funds += size
        filled[c] += size
        for o in outs:
            table[o].append((funds, filled[o]))
    # drop interior points where a claim's payment stays flat on both sides
    clean = {}
    for c, pts in table.items():
        keep = [pts[0]]
        for i in range(1, len(pts) - 1):
            if not (pts[i - 1][1] == pts[i][1] == pts[i + 1][1]):
                keep.append(pts[i])
        keep.append(pts[-1])
        clean[c] = tuple(keep)
    return GeneralMonotone(clean)


def random_network(n_banks: int, n_claims: int, max_liability: int = 10,
                   payment_kind: str = "mixed", seed: int = 0, max_external: int | None = None
                   ) -> FinancialNetwork:
    """Seeded random multigraph with integer liabilities and externals."""
    if n_banks < 2 and n_claims > 0:
        raise BadParameters("claims need at least two banks")
    if n_banks < 1 or n_claims < 0 or max_liability < 1:
        raise BadParameters("need n_banks >= 1, n_claims >= 0, max_liability >= 1")
    if payment_kind not in KINDS:
        raise BadParameters(f"payment_kind must be one of {KINDS}")
    rng = random.Random(seed)
    top = max_liability if max_external is None else max_external
    ids = [f"b{i}" for i in range(n_banks)]
    claims = []
    for j in range(n_claims):
        # walk a cycle first so small graphs are connected-ish
        if j < n_banks:
            d, c = ids[j], ids[(j + 1) % n_banks]
            if d == c:
                continue
        else:
            d, c = rng.sample(ids, 2)
        claims.append(Claim(f"c{j}", d, c, Fraction(rng.randint(1, max_liability))))
    banks = []
    for b in ids:
        outs = [c.id for c in claims if c.debtor == b]
        kind = payment_kind
        if kind == "mixed":
            kind = rng.choice(KINDS[:3])
        if kind == "proportional":
            pf = Proportional()
        elif kind == "edge-ranking":
            order = list(outs)
            rng.shuffle(order)
            pf = EdgeRanking(tuple(order))
        else:
            ells = [next(c.liability for c in claims if c.id == o) for o in outs]
            pf = _random_table(rng, outs, ells) if outs else GeneralMonotone({})
        banks.append(Bank(b, Fraction(rng.randint(0, top)), pf))
    return build_network(banks, claims)


def random_single_instance(kind: str, seed: int, max_banks: int = 6, max_claims: int = 10):
    """Seeded (network, claim e, buyer w) where a single trade is plausible.

    The creditor of e is in default and w holds more external assets than the
    current payment on e.  Externals are kept small so defaults are common.
    """
    rng = random.Random(seed)
    while True:
        n = rng.randint(3, max_banks)
        net = random_network(n, rng.randint(n, max_claims), 10, kind, rng.getrandbits(32), max_external=4)
        st = clear(net)
        opts = [(e, w) for e, c in sorted(net.claims.items()) for w in net.banks
                if w not in (c.debtor, c.creditor) and st.recovery[c.creditor] < 1
                and st.payments[e] < c.liability]
        if not opts:
            continue
        e, w = rng.choice(opts)
        net = net.with_external({w: st.payments[e] + rng.randint(1, 12)})
        return net, e, w


def random_multi_in_instance(kind: str, seed: int, max_in: int = 5, max_banks: int = 6):
    """Seeded (network, creditor v, buyer w) with 2..max_in tradeable incoming claims."""
    rng = random.Random(seed)
    while True:
        n = rng.randint(3, max_banks)
        net = random_network(n, rng.randint(n, 12), 10, kind, rng.getrandbits(32), max_external=4)
        st = clear(net)
        opts = []
        for v in net.banks:
            if st.recovery[v] >= 1:
                continue
            for w in net.banks:
                k = sum(1 for c in net.in_claims(v) if net.claim(c).debtor != w)
                if w != v and 2 <= k <= max_in:
                    opts.append((v, w))
        if not opts:
            continue
        v, w = rng.choice(opts)
        net = net.with_external({w: rng.randint(1, 15)})
        return net, v, w


def random_multi_out_instance(seed: int, max_creditors: int = 4):
    """Seeded proportional (network, debtor u, buyer w); u has 2..max_creditors creditors.

    The buyer is never itself a creditor of u, so creditor profit and the
    buyer's own gain stay separate.
    """
    rng = random.Random(seed)
    while True:
        n = rng.randint(4, 6)
        net = random_network(n, rng.randint(n, 11), 10, "proportional", rng.getrandbits(32),
                             max_external=4)
        st = clear(net)
        opts = []
        for u in net.banks:
            if st.recovery[u] >= 1:
                continue
            for w in net.banks:
                outs = [c for c in net.out_claims(u) if net.claim(c).creditor != w]
                creds = {net.claim(c).creditor for c in net.out_claims(u)}
                if w != u and w not in creds and outs and 2 <= len(creds) <= max_creditors:
                    opts.append((u, w))
        if not opts:
            continue
        u, w = rng.choice(opts)
        net = net.with_external({w: rng.randint(1, 15)})
        return net, u, w


# ------------------------------------------------------------- properties
# Each check takes (network, rng) and returns True (holds), False (violated)
# or None (not applicable to this network).


def random_incoming_trade(net: FinancialNetwork, rng: random.Random):
    """A random affordable incoming multi-trade, or None if the network has none."""
    options = []
    for v in net.banks:
        for w in net.banks:
            if w != v and net.external(w) > 0:
                cands = [c for c in net.in_claims(v) if net.claim(c).debtor != w]
                if cands:
                    options.append((v, w, cands))
    if not options:
        return None
    v, w, cands = rng.choice(options)
    chosen = rng.sample(cands, rng.randint(1, len(cands)))
    total = sum((net.claim(c).liability for c in chosen), ZERO)
    rho = min(total, net.external(w)) * Fraction(rng.randint(0, 20), 20)
    return incoming_trade(v, w, chosen, rho / total)


def check_no_double_strict(net, rng):
    trade = random_incoming_trade(net, rng)
    if trade is None:
        return None
    out = apply_trade(net, trade)
    return not (out.deltas[trade.focal_bank] > 0 and out.deltas[trade.buyer] > 0)


def check_pareto_payments(net, rng):
    trade = random_incoming_trade(net, rng)
    if trade is None:
        return None
    out = apply_trade(net, trade)
    if not out.creditor_positive:
        return None
    pre, post = out.pre_state.payments, out.post_state.payments
    return all(post[c] >= pre[c] for c in net.claims)


def check_integrality(net, rng):
    if net.kinds() - {"edge-ranking"}:
        return None
    if any(c.liability.denominator != 1 for c in net.claims.values()):
        return None
    if any(b.external_assets.denominator != 1 for b in net.banks.values()):
        return None
    return all(p.denominator == 1 for p in clear(net).payments.values())


def check_monotonicity(net, rng):
    b = rng.choice(list(net.banks))
    bump = Fraction(rng.randint(1, 40), rng.randint(1, 8))
    pre = clear(net).payments
    post = clear(net.with_external({b: net.external(b) + bump})).payments
    return all(post[c] >= pre[c] for c in net.claims)


def check_non_expansive(net, rng):
    sources = [b for b in net.banks if net.external(b) > 0]
    if not sources:
        return None
    b = rng.choice(sources)
    eps = net.external(b) * Fraction(rng.randint(1, 16), 16)
    pre = clear(net)
    post = clear(net.with_external({b: net.external(b) - eps}))
    sinks = [x for x in net.banks if not net.out_claims(x)]
    intake = lambda st: sum((st.payments[c] for x in sinks for c in net.in_claims(x)), ZERO)
    drop = intake(pre) - intake(post)
    return ZERO <= drop <= eps and all(post.payments[c] <= pre.payments[c] for c in net.claims)


def check_fixed_point(net, rng):
    from .clearing import is_fixed_point

    st = clear(net)
    return is_fixed_point(net, st)


def check_round_trip(net, rng):
    from .cli_io import emit_network, parse_network

    return parse_network(emit_network(net)) == net


PROPERTIES = {
    "no-double-strict": check_no_double_strict,
    "pareto-payments": check_pareto_payments,
    "integrality": check_integrality,
    "monotonicity": check_monotonicity,
    "non-expansivity": check_non_expansive,
    "fixed-point": check_fixed_point,
    "round-trip": check_round_trip,
}


def property_network(prop: str, rng: random.Random) -> FinancialNetwork:
    """A random small network suited to the given property."""
    kind = "edge-ranking" if prop == "integrality" else "mixed"
    n = rng.randint(2, 8)
    return random_network(n, rng.randint(1, 14), rng.randint(1, 12), kind, rng.getrandbits(32))


def run_property(prop: str, trials: int, seed: int, network: FinancialNetwork | None = None):
    """Run a property check; returns (passed, failed, skipped, first failing seed or None)."""
    if prop not in PROPERTIES:
        raise BadParameters(f"unknown property {prop!r}; choose from {sorted(PROPERTIES)}")
    check = PROPERTIES[prop]
    passed = failed = skipped = 0
    first = None
    for t in range(trials):
        rng = random.Random(seed * 1_000_003 + t)
        net = network if network is not None else property_network(prop, rng)
        ok = check(net, rng)
        if ok is None:
            skipped += 1
        elif ok:
            passed += 1
        else:
            failed += 1
            if first is None:
                first = seed * 1_000_003 + t
    return passed, failed, skipped, first
