"""Acceptance criteria, one test per criterion; a summary line is printed per criterion."""

import random
import time
from fractions import Fraction as F
from functools import cache

from claimtrade.clearing import clear, is_fixed_point
from claimtrade.multi_in_opt import (
    bicriteria_fptas,
    exact_level_edge_ranking,
    knapsack_view,
    subsidized_fptas_fixed_rates,
    subsidy_n,
)
from claimtrade.multi_out_opt import grid_out_search, optimal_out_proportional
from claimtrade.net_model import incoming_trade, total_liabilities
from claimtrade.single_opt import approx_single_general, optimal_single_edge_ranking, optimal_single_proportional
from claimtrade.testkit import (
    gen_set_packing_prop,
    gen_subset_sum_incoming,
    gen_subset_sum_incoming_fixed,
    oracle_fixed_rates,
    oracle_multi_in,
    oracle_single_alpha,
    random_incoming_trade,
    random_multi_in_instance,
    random_multi_out_instance,
    random_network,
    random_single_instance,
    run_property,
    subset_sum_exists,
)
from claimtrade.trade_transform import apply_trade

from conftest import ACCEPTANCE, make_ex1

KINDS = ["edge-ranking", "proportional", "mixed"]
DELTA20 = F(1, 2**20)


def record(n, ok, detail):
    ACCEPTANCE[n] = (ok, detail)
    assert ok, detail


# ------------------------------------------------------------- shared corpora


@cache
def single_corpus():
    prop, er = [], []
    for s in range(100):
        net, e, w = random_single_instance("proportional", s)
        prop.append((net, e, w, optimal_single_proportional(net, e, w),
                     approx_single_general(net, e, w, DELTA20)))
        net, e, w = random_single_instance("edge-ranking", 1000 + s)
        er.append((net, e, w, optimal_single_edge_ranking(net, e, w), oracle_single_alpha(net, e, w, 100)))
    return prop, er


@cache
def bicriteria_corpus():
    eps = F(1, 100)
    rows = []
    for s in range(100):
        net, v, w = random_multi_in_instance(KINDS[s % 3], 500 + s)
        best = oracle_multi_in(net, v, w, 50).best_assets
        t0 = time.perf_counter()
        res = bicriteria_fptas(net, v, w, eps, DELTA20)
        rows.append((net, v, w, best, res, time.perf_counter() - t0))
    return rows


@cache
def subset_sum_corpus():
    rng = random.Random(8)
    yes, no = [], []
    while len(yes) < 50 or len(no) < 50:
        n = rng.randint(2, 12)
        S = [rng.randint(2, 30) for _ in range(n)]
        T = rng.randint(1, sum(S))
        ans = subset_sum_exists(S, T)
        if (ans and len(yes) >= 50) or (not ans and len(no) >= 50):
            continue
        net = gen_subset_sum_incoming(S, T)
        L = total_liabilities(net, "v")
        if ans:
            yes.append((S, T, net, L, exact_level_edge_ranking(net, "v", "w", F(1, 100))))
        else:
            no.append((S, T, net, L, oracle_multi_in(net, "v", "w", 20, target=L)))
    return yes, no


def incoming_outcomes():
    """Every creditor-positive incoming outcome produced by the optimizers above."""
    outs = []
    for net, e, w, a, b in single_corpus()[0]:
        outs += [r.outcome for r in (a, b) if r.found]
    for net, e, w, a, _ in single_corpus()[1]:
        if a.found:
            outs.append(a.outcome)
    outs += [row[4].outcome for row in bicriteria_corpus() if row[4].found]
    outs += [row[4].outcome for row in subset_sum_corpus()[0] if row[4].found]
    return outs


# ------------------------------------------------------------------ criteria


def test_criterion_01_example_edge_ranking():
    t0 = time.perf_counter()
    net = make_ex1()
    st = clear(net)
    out = apply_trade(net, incoming_trade("v", "w", ["uv"], 1))
    elapsed = time.perf_counter() - t0
    ok = (dict(st.payments) == {"uv": 1, "vw": 1, "vy": 0, "yv": 0}
          and dict(st.assets) == {"u": 1, "v": 1, "w": 3, "y": 0}
          and dict(out.post_state.assets) == {"u": 1, "v": 4, "w": 3, "y": 2}
          and elapsed < 1)
    record(1, ok, f"exact match, {elapsed * 1000:.1f} ms")


def test_criterion_02_example_proportional():
    net = make_ex1("proportional")
    st = clear(net)
    out = apply_trade(net, incoming_trade("v", "w", ["uv"], 1))
    post = out.post_state.payments
    ok = (st.payments["vw"] == 1 and st.payments["vy"] == 1
          and post["vw"] == 2 and post["vy"] == 2)
    record(2, ok, f"pre (vw, vy) = (1, 1), post = ({post['vw']}, {post['vy']})")


def test_criterion_03_no_double_strict():
    t0 = time.perf_counter()
    applicable = violations = 0
    seed = 0
    while applicable < 1000:
        rng = random.Random(seed)
        seed += 1
        net = random_network(rng.randint(2, 8), rng.randint(1, 14), rng.randint(1, 12), "mixed",
                             rng.getrandbits(32))
        trade = random_incoming_trade(net, rng)
        if trade is None:
            continue
        applicable += 1
        d = apply_trade(net, trade).deltas
        violations += d[trade.focal_bank] > 0 and d[trade.buyer] > 0
    elapsed = time.perf_counter() - t0
    record(3, violations == 0 and elapsed < 60,
           f"{applicable} trades on {seed} networks, {violations} violations, {elapsed:.1f} s")


def test_criterion_05_single_cross_validation():
    prop, er = single_corpus()
    bad_prop = sum(1 for _, _, _, a, b in prop
                   if abs(a.achieved_assets - b.achieved_assets) > DELTA20
                   or b.achieved_assets > a.achieved_assets)
    bad_er = sum(1 for _, _, _, a, o in er
                 if a.achieved_assets != o.best_assets or a.found != (o.best_trade is not None))
    found = sum(a.found for *_, a, _ in prop), sum(a.found for *_, a, _ in er)
    record(5, bad_prop == 0 and bad_er == 0,
           f"proportional {len(prop)} ({found[0]} trades, {bad_prop} off), "
           f"edge-ranking {len(er)} ({found[1]} trades, {bad_er} off)")


def test_criterion_06_knapsack_condition():
    checks = bad = instances = 0
    for s in range(60):
        net, v, w = random_multi_in_instance(KINDS[s % 3], s)
        o = oracle_multi_in(net, v, w, 50)
        a_v = clear(net).assets[v]
        top = net.external(v) + net.external(w) + sum(net.claim(c).liability for c in net.in_claims(v))
        levels = {a_v + (top - a_v) * F(i, 12) for i in range(1, 12)}
        if o.best_assets > a_v:
            levels |= {a_v + (o.best_assets - a_v) * F(i, 6) for i in range(1, 7)}
            levels |= {o.best_assets + F(1, 1000), o.best_assets + F(1, 2)}
        levels = sorted(x for x in levels if x > a_v)
        assert len(levels) >= 10
        instances += 1
        for A in levels:
            truth = o.best_trade is not None and o.best_assets >= A
            checks += 1
            bad += knapsack_view(net, v, w, A).decide_exhaustive() != truth
    record(6, bad == 0 and instances >= 50, f"{instances} instances, {checks} levels, {bad} mismatches")


def test_criterion_07_bicriteria_fptas():
    eps = F(1, 100)
    bad = found = 0
    slowest = 0.0
    for net, v, w, best, res, el in bicriteria_corpus():
        slowest = max(slowest, el)
        ok = res.achieved_assets >= best - DELTA20 and el < 5
        if res.found:
            found += 1
            sl = sum(net.claim(c).liability for c in res.claims)
            out = res.outcome
            ok = ok and res.return_paid <= (1 + eps) * sl and res.return_paid <= net.external(w)
            ok = ok and out.post_state.exact and is_fixed_point(out.post_network, out.post_state)
        bad += not ok
    n = len(bicriteria_corpus())
    record(7, bad == 0, f"{n} instances ({found} trades), {bad} failures, slowest {slowest:.2f} s")


def test_criterion_08_subset_sum():
    yes, no = subset_sum_corpus()
    bad_yes = sum(1 for *_, L, r in yes if not (r.found and r.achieved_assets >= L))
    bad_no = sum(1 for *_, L, o in no if o.best_assets >= L)
    record(8, bad_yes == 0 and bad_no == 0 and len(yes) >= 50 and len(no) >= 50,
           f"{len(yes)} YES ({bad_yes} unsaved), {len(no)} NO ({bad_no} saved)")


def _subsidy_ok(net, v, w, rates, delta):
    res = subsidized_fptas_fixed_rates(net, v, w, rates, delta)
    oracle = oracle_fixed_rates(net, v, w, rates)
    s = sum(net.claim(c).liability for c in net.in_claims(v)) * delta / subsidy_n(net, v, w)
    ok = res.subsidies is None or (res.subsidies[0] <= 2 * s and res.subsidies[1] <= s)
    if oracle.best_trade is not None:
        ok = ok and res.found and res.level >= oracle.best_assets
    return ok, oracle.best_trade is not None


def test_criterion_09_subsidized_fixed_rates():
    delta = F(1, 10)
    rng = random.Random(9)
    yes = bad = 0
    while yes < 50:
        S = [rng.randint(2, 20) for _ in range(rng.randint(1, 8))]
        T = rng.randint(2, sum(S))
        if not subset_sum_exists(S, T):
            continue
        yes += 1
        net, rates = gen_subset_sum_incoming_fixed(S, T)
        bad += not _subsidy_ok(net, "v", "w", rates, delta)[0]
    rand = with_trade = 0
    for s in range(60):
        net, v, w = random_multi_in_instance(KINDS[s % 3], 900 + s)
        r = random.Random(s)
        rates = {c: F(r.randint(0, 4), 4) for c in net.in_claims(v)}
        ok, exists = _subsidy_ok(net, v, w, rates, delta)
        bad += not ok
        rand += 1
        with_trade += exists
    record(9, bad == 0, f"{yes} subset-sum YES and {rand} random ({with_trade} with exact trades), {bad} failures")


def test_criterion_10_outgoing_lp():
    net = gen_set_packing_prop(4, [[1, 2], [3, 4], [2, 3]], 2)
    cert = optimal_out_proportional(net, "v", "w", ["v-S1", "v-S2"])
    cert_ok = cert.found and cert.rates == (1, 1) and cert.creditor_profit_total == 2 * 2
    bad = found = 0
    for s in range(60):
        net, u, w = random_multi_out_instance(s)
        rng = random.Random(s)
        outs = [c for c in net.out_claims(u) if net.claim(c).creditor != w]
        C = rng.sample(outs, min(len(outs), rng.randint(1, 2)))
        lp = optimal_out_proportional(net, u, w, C)
        grid = grid_out_search(net, u, w, C, 50, "traded")
        tol = sum(net.claim(c).liability for c in C) / 50
        found += lp.found
        if grid.found:
            bad += not (lp.found and grid.traded_profit <= lp.traded_profit <= grid.traded_profit + tol)
    record(10, cert_ok and bad == 0,
           f"certificate profit {cert.creditor_profit_total}; 60 random ({found} trades), {bad} mismatches")


def test_criterion_11_property_suites():
    parts, ok = [], True
    for prop in ("integrality", "monotonicity", "non-expansivity"):
        trials, passed, failed = 500, 0, 0
        while passed < 500:
            passed, failed, skipped, _ = run_property(prop, trials, seed=11)
            trials += 100
        ok = ok and failed == 0
        parts.append(f"{prop} {passed}/{passed + failed}")
    record(11, ok, ", ".join(parts))


def test_criterion_04_pareto_payments():
    outs = incoming_outcomes()
    bad = sum(1 for o in outs
              if not all(o.post_state.payments[c] >= o.pre_state.payments[c] for c in o.pre_state.payments))
    record(4, bad == 0 and len(outs) > 0, f"{len(outs)} creditor-positive outcomes, {bad} with a payment drop")
