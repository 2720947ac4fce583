"""Exact clearing and claims trades in financial networks."""

from .clearing import ClearingState, clear, clear_edge_ranking, clear_general, clear_proportional
from .errors import ClaimTradeError
from .multi_in_opt import (
    MultiTradeResult,
    bicriteria_fptas,
    decide_fixed_rates_set,
    exact_level_edge_ranking,
    knapsack_view,
    level_fptas,
    optimal_multi_in_fixed_set,
    subsidized_fptas_fixed_rates,
)
from .multi_out_opt import (
    OutgoingTradeResult,
    brute_force_out_select,
    decide_out_fixed,
    grid_out_search,
    optimal_out_proportional,
)
from .net_model import (
    Bank,
    Claim,
    EdgeRanking,
    FinancialNetwork,
    GeneralMonotone,
    Proportional,
    TradeSpec,
    build_network,
    evaluate_payment,
    incoming_trade,
    outgoing_trade,
    total_liabilities,
)
from .single_opt import SingleTradeResult, approx_single_general, optimal_single
from .trade_transform import TradeOutcome, apply_trade, classify_trade

__version__ = "0.1.0"
