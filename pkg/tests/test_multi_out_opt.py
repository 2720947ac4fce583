"""Outgoing multi-trades: set-packing certificates, LP and grid search."""

from fractions import Fraction as F

import pytest

from claimtrade.errors import InstanceTooLarge, SpecViolation, Unaffordable, WrongPaymentKind
from claimtrade.multi_out_opt import (
    brute_force_out_select,
    creditors_of,
    decide_out_fixed,
    grid_out_search,
    optimal_out_proportional,
)
from claimtrade.testkit import gen_set_packing_outgoing, gen_set_packing_prop, random_multi_out_instance

SETS = [[1, 2], [3, 4], [2, 3]]


class TestSetPackingEdgeRanking:
    def test_disjoint_pair_is_pareto(self):
        net = gen_set_packing_outgoing(4, SETS, 2)
        res = decide_out_fixed(net, "v", "w", ["v-S1", "v-S2"], [1, 1])
        assert res.found
        # k*M + sum of set sizes with M = 4^3
        assert res.creditor_profit_total == 2 * 64 + 4

    def test_overlapping_pair_hurts_buyer(self):
        net = gen_set_packing_outgoing(4, SETS, 2)
        res = decide_out_fixed(net, "v", "w", ["v-S1", "v-S3"], [1, 1])
        assert not res.found
        assert res.outcome.deltas["w"] == -1


class TestSetPackingProportional:
    def test_lp_certificate(self):
        net = gen_set_packing_prop(4, SETS, 2)
        res = optimal_out_proportional(net, "v", "w", ["v-S1", "v-S2"])
        assert res.found and res.rates == (1, 1)
        assert res.creditor_profit_total == 2 * 2

    def test_unequal_sets_rejected(self):
        from claimtrade.errors import BadParameters
        with pytest.raises(BadParameters):
            gen_set_packing_prop(4, [[1], [2, 3]], 1)


class TestLpAgainstGrid:
    @pytest.mark.parametrize("seed", range(8))
    def test_single_claim(self, seed):
        net, u, w = random_multi_out_instance(seed)
        c = [x for x in net.out_claims(u) if net.claim(x).creditor != w][:1]
        lp = optimal_out_proportional(net, u, w, c)
        grid = grid_out_search(net, u, w, c, 50, "traded")
        if grid.found:
            tol = net.claim(c[0]).liability / 50
            assert lp.found and grid.traded_profit <= lp.traded_profit <= grid.traded_profit + tol


class TestErrorsAndHelpers:
    def test_creditors(self, ex1):
        assert creditors_of(ex1, "v") == ["w", "y"]

    def test_wrong_kind(self, ex1):
        with pytest.raises(WrongPaymentKind):
            optimal_out_proportional(ex1, "v", "u", ["vw"])

    def test_checks(self, ex1_prop):
        with pytest.raises(SpecViolation):
            decide_out_fixed(ex1_prop, "v", "v", ["vw"], [0])
        with pytest.raises(SpecViolation):
            decide_out_fixed(ex1_prop, "v", "w", ["vw"], [0])
        with pytest.raises(SpecViolation):
            grid_out_search(ex1_prop, "v", "u", ["vw"], objective="nope")

    def test_unaffordable(self, ex1_prop):
        with pytest.raises(Unaffordable):
            decide_out_fixed(ex1_prop, "v", "u", ["vw"], [1])

    def test_brute_force_limit(self, ex1_prop):
        with pytest.raises(InstanceTooLarge):
            brute_force_out_select(ex1_prop, "v", "u", limit=1)

    def test_brute_force_runs(self):
        net = gen_set_packing_prop(4, SETS, 2)
        res = brute_force_out_select(net, "v", "w")
        assert res.found and res.creditor_profit_total >= 4
