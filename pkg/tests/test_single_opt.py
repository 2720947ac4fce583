"""Single-claim trades: exact optimizers, the budget test and the FPTAS."""

from fractions import Fraction as F

import pytest

from claimtrade.errors import SpecViolation, WrongPaymentKind
from claimtrade.single_opt import (
    approx_single_general,
    budget_test,
    decide_single_fixed_alpha,
    optimal_single,
    optimal_single_edge_ranking,
    optimal_single_proportional,
    via_return_network,
)
from claimtrade.testkit import oracle_single_alpha, random_single_instance

from conftest import make_ex1


class TestEx1:
    def test_edge_ranking_optimum(self, ex1):
        res = optimal_single_edge_ranking(ex1, "uv", "w")
        assert res.found and res.alpha == 1
        assert res.achieved_assets == 4 and res.return_paid == 2

    def test_proportional_optimum(self, ex1_prop):
        res = optimal_single_proportional(ex1_prop, "uv", "w")
        assert res.found
        assert res.achieved_assets == oracle_single_alpha(ex1_prop, "uv", "w").best_assets

    def test_fptas_close(self, ex1):
        d = F(1, 2**10)
        res = approx_single_general(ex1, "uv", "w", d)
        assert 4 - d <= res.achieved_assets <= 4

    def test_dispatch(self, ex1, ex1_prop):
        assert optimal_single(ex1, "uv", "w").alpha == 1
        assert optimal_single(ex1_prop, "uv", "w").found
        assert optimal_single(ex1, "uv", "w", delta=F(1, 8)).found

    def test_fixed_alpha(self, ex1):
        assert decide_single_fixed_alpha(ex1, "uv", "w", 1).creditor_positive
        assert not decide_single_fixed_alpha(ex1, "uv", "w", 0).creditor_positive

    def test_budget_test_at_target(self, ex1):
        bd, slack = budget_test(ex1, "uv", "w", 4)
        assert slack == 0 and bd.certifies()
        bd, _ = budget_test(ex1, "uv", "w", 5)
        assert not bd.certifies()


class TestAbsent:
    def test_poor_buyer(self):
        net = make_ex1(w_external=1)
        # the current payment on uv is 1 so w cannot offer more
        assert not via_return_network(net, "uv", "w").found
        assert not optimal_single_proportional(make_ex1("proportional", 1), "uv", "w").found

    def test_already_paid_claim(self, ex1):
        # a trade of vw to u cannot raise w's assets above the full liability
        assert not optimal_single(ex1, "vw", "u").found


class TestErrors:
    def test_wrong_kind(self, ex1, ex1_prop):
        with pytest.raises(WrongPaymentKind):
            optimal_single_edge_ranking(ex1_prop, "uv", "w")
        with pytest.raises(WrongPaymentKind):
            optimal_single_proportional(ex1, "uv", "w")

    def test_buyer_on_claim(self, ex1):
        with pytest.raises(SpecViolation):
            optimal_single(ex1, "uv", "u")

    def test_bad_delta(self, ex1):
        with pytest.raises(SpecViolation):
            approx_single_general(ex1, "uv", "w", 0)


class TestAgainstOracle:
    @pytest.mark.parametrize("seed", range(15))
    def test_general_kinds_within_delta(self, seed):
        net, e, w = random_single_instance("general", 3000 + seed)
        d = F(1, 2**12)
        res = approx_single_general(net, e, w, d)
        exact = via_return_network(net, e, w)
        best = oracle_single_alpha(net, e, w, 60).best_assets
        assert res.achieved_assets <= exact.achieved_assets
        assert exact.achieved_assets == best
        assert res.achieved_assets >= best - d
