"""Network construction, validation and payment functions."""

from fractions import Fraction as F

import pytest

from claimtrade.errors import (
    DanglingEndpoint,
    DuplicateId,
    FundsOutOfRange,
    MonotonicityViolation,
    NonPositiveLiability,
    ParseError,
    PaymentFunctionMismatch,
    SelfLoop,
    UnknownBank,
    Unaffordable,
    SpecViolation,
)
from claimtrade.net_model import (
    Bank,
    Claim,
    EdgeRanking,
    GeneralMonotone,
    Proportional,
    build_network,
    evaluate_payment,
    incoming_trade,
    outgoing_trade,
    tabulate,
    to_money,
    total_liabilities,
    validate_trade,
)


class TestBuildNetwork:
    def test_ex1_is_valid(self, ex1):
        assert set(ex1.banks) == {"u", "v", "w", "y"}
        assert ex1.external("w") == 2
        assert ex1.out_claims("v") == ("vw", "vy")

    def test_trivial_network(self):
        net = build_network([Bank("a", F(5))], [])
        assert net.external("a") == 5 and not net.claims

    def test_self_loop(self):
        with pytest.raises(SelfLoop):
            build_network([Bank("a", F(0))], [Claim("c", "a", "a", F(1))])

    def test_duplicate_ids(self):
        with pytest.raises(DuplicateId):
            build_network([Bank("a", F(0)), Bank("a", F(1))], [])
        with pytest.raises(DuplicateId):
            build_network([Bank("a", F(0)), Bank("b", F(0))],
                          [Claim("c", "a", "b", F(1)), Claim("c", "b", "a", F(1))])

    def test_dangling_endpoint(self):
        with pytest.raises(DanglingEndpoint):
            build_network([Bank("a", F(0))], [Claim("c", "a", "z", F(1))])

    def test_non_positive_liability(self):
        with pytest.raises(NonPositiveLiability):
            build_network([Bank("a", F(0)), Bank("b", F(0))], [Claim("c", "a", "b", F(0))])

    def test_negative_external(self):
        with pytest.raises(FundsOutOfRange):
            build_network([Bank("a", F(-1))], [])

    def test_ranking_must_be_permutation(self):
        banks = [Bank("a", F(0), EdgeRanking(("x",))), Bank("b", F(0)), Bank("c", F(0))]
        claims = [Claim("x", "a", "b", F(1)), Claim("y", "a", "c", F(1))]
        with pytest.raises(PaymentFunctionMismatch):
            build_network(banks, claims)

    def test_multi_edges_allowed(self):
        net = build_network([Bank("a", F(3)), Bank("b", F(0))],
                            [Claim("x", "a", "b", F(1)), Claim("y", "a", "b", F(2))])
        assert net.out_claims("a") == ("x", "y")

    def test_numbers_are_exact(self):
        net = build_network([Bank("a", "1/3"), Bank("b", 0.5)], [Claim("c", "a", "b", "2.25")])
        assert net.external("a") == F(1, 3)
        assert net.external("b") == F(1, 2)
        assert net.claim("c").liability == F(9, 4)


def _two_claim_bank(table):
    banks = [Bank("a", F(4), GeneralMonotone(table)), Bank("b", F(0)), Bank("c", F(0))]
    claims = [Claim("x", "a", "b", F(2)), Claim("y", "a", "c", F(2))]
    return build_network(banks, claims)


class TestGeneralMonotone:
    def test_valid_table(self):
        net = _two_claim_bank({"x": ((F(0), F(0)), (F(2), F(1)), (F(4), F(2))),
                               "y": ((F(0), F(0)), (F(2), F(1)), (F(4), F(2)))})
        assert evaluate_payment(net, "a", F(1)) == {"x": F(1, 2), "y": F(1, 2)}

    def test_decreasing_rejected(self):
        with pytest.raises(MonotonicityViolation):
            _two_claim_bank({"x": ((F(0), F(0)), (F(2), F(2)), (F(4), F(1))),
                             "y": ((F(0), F(0)), (F(2), F(0)), (F(4), F(3)))})

    def test_sum_condition_rejected(self):
        with pytest.raises(MonotonicityViolation):
            _two_claim_bank({"x": ((F(0), F(0)), (F(4), F(1))),
                             "y": ((F(0), F(0)), (F(4), F(1)))})

    def test_table_must_cover_claims(self):
        with pytest.raises(PaymentFunctionMismatch):
            _two_claim_bank({"x": ((F(0), F(0)), (F(2), F(2)))})


class TestLiabilitiesAndPayments:
    def test_total_liabilities(self, ex1):
        assert total_liabilities(ex1, "v") == 4
        assert total_liabilities(ex1, "u") == 2
        assert total_liabilities(ex1, "w") == 0
        with pytest.raises(UnknownBank):
            total_liabilities(ex1, "nope")

    def test_edge_ranking_fills_in_order(self, ex1):
        assert evaluate_payment(ex1, "v", F(1)) == {"vw": 1, "vy": 0}
        assert evaluate_payment(ex1, "v", F(3)) == {"vw": 2, "vy": 1}

    def test_proportional_split(self, ex1_prop):
        assert evaluate_payment(ex1_prop, "v", F(2)) == {"vw": 1, "vy": 1}

    def test_zero_funds(self, ex1, ex1_prop):
        for net in (ex1, ex1_prop):
            for b in net.banks:
                assert all(p == 0 for p in evaluate_payment(net, b, F(0)).values())

    def test_funds_out_of_range(self, ex1):
        # v can hold at most a^x + incoming liabilities = 0 + 4
        with pytest.raises(FundsOutOfRange):
            evaluate_payment(ex1, "v", F(5))
        with pytest.raises(FundsOutOfRange):
            evaluate_payment(ex1, "v", F(-1))

    def test_tabulate_matches_ranking(self, ex1):
        table = tabulate(ex1, "v")
        general = ex1.derive(banks=[b if b.id != "v" else Bank("v", b.external_assets, table)
                                    for b in ex1.banks.values()])
        for k in range(0, 17):
            b = F(k, 4)
            assert evaluate_payment(general, "v", b) == evaluate_payment(ex1, "v", b)


class TestMoney:
    def test_parse_forms(self):
        assert to_money("3/4") == F(3, 4)
        assert to_money("0.125") == F(1, 8)
        assert to_money(7) == 7

    def test_zero_denominator(self):
        with pytest.raises(ParseError):
            to_money("3/0")


class TestTradeSpec:
    def test_scalar_rate_broadcast(self):
        t = incoming_trade("v", "w", ["a", "b"], "1/2")
        assert t.rates == (F(1, 2), F(1, 2))

    def test_incoming_checks(self, ex1):
        validate_trade(ex1, incoming_trade("v", "w", ["uv"], 1))
        with pytest.raises(SpecViolation):
            validate_trade(ex1, incoming_trade("v", "w", ["vw"], 1))
        with pytest.raises(SpecViolation):
            validate_trade(ex1, incoming_trade("v", "v", ["uv"], 1))
        with pytest.raises(SpecViolation):
            validate_trade(ex1, incoming_trade("v", "w", [], 1))

    def test_buyer_cannot_be_debtor(self, ex1):
        with pytest.raises(SpecViolation):
            validate_trade(ex1, incoming_trade("v", "y", ["yv"], 0))

    def test_outgoing_checks(self, ex1):
        validate_trade(ex1, outgoing_trade("v", "u", ["vy"], 0))
        with pytest.raises(SpecViolation):
            validate_trade(ex1, outgoing_trade("v", "w", ["vw"], 0))

    def test_unaffordable(self, ex1):
        rich = ex1.with_external({"w": F(1)})
        with pytest.raises(Unaffordable):
            validate_trade(rich, incoming_trade("v", "w", ["uv"], 1))

    def test_rate_cap(self, ex1):
        big = ex1.with_external({"w": F(10)})
        with pytest.raises(SpecViolation):
            validate_trade(big, incoming_trade("v", "w", ["uv"], "11/10"))
        validate_trade(big, incoming_trade("v", "w", ["uv"], "11/10", rate_cap="6/5"))
