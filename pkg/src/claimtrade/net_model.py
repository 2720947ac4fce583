"""Financial network data model: banks, claims, payment functions, trade specs.

All amounts are exact rationals (``fractions.Fraction``).  Networks are
immutable once built; derived networks are produced with ``build_network``.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, Union

from .errors import (
    DanglingEndpoint,
    DuplicateId,
    FundsOutOfRange,
    MonotonicityViolation,
    NonPositiveLiability,
    ParseError,
    PaymentFunctionMismatch,
    SelfLoop,
    SpecViolation,
    Unaffordable,
    UnknownBank,
    UnknownClaim,
)

Money = Fraction
ZERO = Fraction(0)
ONE = Fraction(1)


def to_money(x) -> Fraction:
    """Exact conversion of int, Fraction, decimal string or "p/q" string."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise ParseError(f"not a number: {x!r}")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        # floats are accepted only when they are exactly representable decimals
        return Fraction(repr(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"malformed number {x!r}: {exc}") from None
    try:
        return Fraction(x)
    except (TypeError, ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"malformed number {x!r}: {exc}") from None


@dataclass(frozen=True)
class Claim:
    id: str
    debtor: str
    creditor: str
    liability: Fraction


@dataclass(frozen=True)
class Proportional:
    kind = "proportional"


@dataclass(frozen=True)
class EdgeRanking:
    order: tuple[str, ...]
    kind = "edge-ranking"


@dataclass(frozen=True)
class GeneralMonotone:
    # claim id -> ((funds, payment), ...) with strictly increasing funds
    table: Mapping[str, tuple[tuple[Fraction, Fraction], ...]]
    kind = "general"

    def __hash__(self):
        return hash(tuple(sorted(self.table.items())))


PaymentFunction = Union[Proportional, EdgeRanking, GeneralMonotone]


@dataclass(frozen=True)
class Bank:
    id: str
    external_assets: Fraction
    payment: PaymentFunction = field(default_factory=Proportional)


def _interp(points, b):
    """Piecewise-linear interpolation, constant beyond the last point."""
    xs = [p[0] for p in points]
    if b >= xs[-1]:
        return points[-1][1]
    i = bisect_left(xs, b)
    if xs[i] == b:
        return points[i][1]
    (x0, y0), (x1, y1) = points[i - 1], points[i]
    return y0 + (y1 - y0) * (b - x0) / (x1 - x0)


class Curve:
    """A bank's payment function as a piecewise-linear map funds -> payments.

    ``breaks`` are strictly increasing funds levels starting at 0 and ending at
    L_v; ``values[k][j]`` is the payment on ``claims[j]`` at ``breaks[k]``.
    Beyond the last breakpoint payments stay constant.
    """

    __slots__ = ("claims", "breaks", "values")

    def __init__(self, claims, breaks, values):
        self.claims = tuple(claims)
        self.breaks = tuple(breaks)
        self.values = tuple(tuple(row) for row in values)

    def evaluate(self, funds: Fraction) -> tuple[Fraction, ...]:
        br = self.breaks
        if not self.claims:
            return ()
        if funds >= br[-1]:
            return self.values[-1]
        if funds <= 0:
            return self.values[0]
        k = bisect_left(br, funds)
        if br[k] == funds:
            return self.values[k]
        t = (funds - br[k - 1]) / (br[k] - br[k - 1])
        lo, hi = self.values[k - 1], self.values[k]
        return tuple(a + (b - a) * t for a, b in zip(lo, hi))

    def left_piece(self, funds: Fraction):
        """Affine piece valid on [lo, funds]: (lo, base values at lo, slopes)."""
        br = self.breaks
        n = len(self.claims)
        if n == 0 or funds <= 0:
            return ZERO, (ZERO,) * n, (ZERO,) * n
        if funds > br[-1]:
            return br[-1], self.values[-1], (ZERO,) * n
        k = bisect_left(br, funds)
        lo, hi = self.values[k - 1], self.values[k]
        width = br[k] - br[k - 1]
        return br[k - 1], lo, tuple((b - a) / width for a, b in zip(lo, hi))


class FinancialNetwork:
    """Validated, immutable network.  Build with :func:`build_network`."""

    def __init__(self, banks: dict[str, Bank], claims: dict[str, Claim]):
        self._banks = MappingProxyType(banks)
        self._claims = MappingProxyType(claims)
        out = {b: [] for b in banks}
        inc = {b: [] for b in banks}
        for c in claims.values():
            out[c.debtor].append(c.id)
            inc[c.creditor].append(c.id)
        self._out = {b: tuple(v) for b, v in out.items()}
        self._in = {b: tuple(v) for b, v in inc.items()}
        self._cache: dict = {}

    @property
    def banks(self) -> Mapping[str, Bank]:
        return self._banks

    @property
    def claims(self) -> Mapping[str, Claim]:
        return self._claims

    def bank(self, bid: str) -> Bank:
        try:
            return self._banks[bid]
        except KeyError:
            raise UnknownBank(f"unknown bank {bid!r}") from None

    def claim(self, cid: str) -> Claim:
        try:
            return self._claims[cid]
        except KeyError:
            raise UnknownClaim(f"unknown claim {cid!r}") from None

    def out_claims(self, bid: str) -> tuple[str, ...]:
        self.bank(bid)
        return self._out[bid]

    def in_claims(self, bid: str) -> tuple[str, ...]:
        self.bank(bid)
        return self._in[bid]

    def external(self, bid: str) -> Fraction:
        return self.bank(bid).external_assets

    def kinds(self) -> set[str]:
        """Payment kinds of banks with two or more outgoing claims."""
        return {b.payment.kind for b in self._banks.values() if len(self._out[b.id]) > 1}

    @cached_property
    def curves(self) -> dict[str, Curve]:
        return {bid: _make_curve(self, bid) for bid in self._banks}

    def max_funds(self, bid: str) -> Fraction:
        return self.external(bid) + sum((self._claims[c].liability for c in self._in[bid]), ZERO)

    def derive(self, banks: Iterable[Bank] | None = None, claims: Iterable[Claim] | None = None):
        """A new validated network with the given banks and/or claims replaced."""
        return build_network(
            self._banks.values() if banks is None else banks,
            self._claims.values() if claims is None else claims,
        )

    def with_external(self, changes: Mapping[str, Fraction]) -> "FinancialNetwork":
        banks = [
            Bank(b.id, changes[b.id], b.payment) if b.id in changes else b
            for b in self._banks.values()
        ]
        return self.derive(banks=banks)

    def __eq__(self, other):
        if not isinstance(other, FinancialNetwork):
            return NotImplemented
        return dict(self._banks) == dict(other._banks) and dict(self._claims) == dict(other._claims)

    def __hash__(self):
        return hash((tuple(self._banks.items()), tuple(self._claims.items())))

    def __repr__(self):
        return f"FinancialNetwork({len(self._banks)} banks, {len(self._claims)} claims)"


def _make_curve(net: FinancialNetwork, bid: str) -> Curve:
    bank = net.bank(bid)
    outs = net._out[bid]
    ells = [net._claims[c].liability for c in outs]
    if not outs:
        return Curve((), (ZERO,), ((),))
    total = sum(ells, ZERO)
    pf = bank.payment
    if len(outs) == 1 or isinstance(pf, Proportional):
        return Curve(outs, (ZERO, total), ((ZERO,) * len(outs), tuple(ells)))
    if isinstance(pf, EdgeRanking):
        lmap = dict(zip(outs, ells))
        order = pf.order
        prefix = {}
        acc = ZERO
        breaks = [ZERO]
        for c in order:
            prefix[c] = acc
            acc += lmap[c]
            breaks.append(acc)
        rows = [
            tuple(min(max(b - prefix[c], ZERO), lmap[c]) for c in outs) for b in breaks
        ]
        return Curve(outs, breaks, rows)
    pts = sorted({ZERO, total} | {x for c in outs for x, _ in pf.table[c]})
    rows = [tuple(_interp(pf.table[c], b) for c in outs) for b in pts]
    # drop breakpoints past L_v: payments are constant there
    keep = [i for i, b in enumerate(pts) if b <= total]
    return Curve(outs, [pts[i] for i in keep], [rows[i] for i in keep])


def _check_table(bid, pf: GeneralMonotone, outs, ells):
    if set(pf.table) != set(outs):
        raise PaymentFunctionMismatch(
            f"bank {bid!r}: table covers {sorted(pf.table)} but outgoing claims are {sorted(outs)}"
        )
    for c, ell in zip(outs, ells):
        pts = pf.table[c]
        if not pts or pts[0][0] != 0:
            raise MonotonicityViolation(f"bank {bid!r}, claim {c!r}: table must start at funds 0")
        for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
            if x1 <= x0:
                raise MonotonicityViolation(f"claim {c!r}: funds breakpoints not increasing")
            if y1 < y0:
                raise MonotonicityViolation(f"claim {c!r}: payment decreases at funds {x1}")
        for _, y in pts:
            if y < 0 or y > ell:
                raise MonotonicityViolation(f"claim {c!r}: payment {y} outside [0, {ell}]")
    total = sum(ells, ZERO)
    grid = sorted({ZERO, total} | {x for c in outs for x, _ in pf.table[c]})
    for b in grid:
        s = sum((_interp(pf.table[c], b) for c in outs), ZERO)
        if s != min(b, total):
            raise MonotonicityViolation(
                f"bank {bid!r}: payments at funds {b} sum to {s}, expected {min(b, total)}"
            )


def build_network(banks: Iterable[Bank], claims: Iterable[Claim]) -> FinancialNetwork:
    bank_map: dict[str, Bank] = {}
    for b in banks:
        if b.id in bank_map:
            raise DuplicateId(f"duplicate bank id {b.id!r}")
        ext = to_money(b.external_assets)
        if ext < 0:
            raise FundsOutOfRange(f"bank {b.id!r}: negative external assets {ext}")
        if ext is not b.external_assets:
            b = Bank(b.id, ext, b.payment)
        bank_map[b.id] = b
    claim_map: dict[str, Claim] = {}
    for c in claims:
        if c.id in claim_map:
            raise DuplicateId(f"duplicate claim id {c.id!r}")
        for end in (c.debtor, c.creditor):
            if end not in bank_map:
                raise DanglingEndpoint(f"claim {c.id!r} references unknown bank {end!r}")
        if c.debtor == c.creditor:
            raise SelfLoop(f"claim {c.id!r} has debtor = creditor = {c.debtor!r}")
        ell = to_money(c.liability)
        if ell <= 0:
            raise NonPositiveLiability(f"claim {c.id!r} has liability {ell}")
        if ell is not c.liability:
            c = Claim(c.id, c.debtor, c.creditor, ell)
        claim_map[c.id] = c
    net = FinancialNetwork(bank_map, claim_map)
    for b in bank_map.values():
        outs = net._out[b.id]
        pf = b.payment
        if isinstance(pf, EdgeRanking):
            if sorted(pf.order) != sorted(outs) or len(set(pf.order)) != len(pf.order):
                raise PaymentFunctionMismatch(
                    f"bank {b.id!r}: ranking {list(pf.order)} is not a permutation of {list(outs)}"
                )
        elif isinstance(pf, GeneralMonotone):
            _check_table(b.id, pf, outs, [claim_map[c].liability for c in outs])
        elif not isinstance(pf, Proportional):
            raise PaymentFunctionMismatch(f"bank {b.id!r}: unknown payment function {pf!r}")
    return net


def total_liabilities(network: FinancialNetwork, bank: str) -> Fraction:
    return sum((network.claims[c].liability for c in network.out_claims(bank)), ZERO)


def evaluate_payment(network: FinancialNetwork, bank: str, funds) -> dict[str, Fraction]:
    funds = to_money(funds)
    if funds < 0 or funds > network.max_funds(bank):
        raise FundsOutOfRange(
            f"bank {bank!r}: funds {funds} outside [0, {network.max_funds(bank)}]"
        )
    curve = network.curves[bank]
    return dict(zip(curve.claims, curve.evaluate(funds)))


def tabulate(network: FinancialNetwork, bank: str) -> GeneralMonotone:
    """The bank's payment function written out as a GeneralMonotone table."""
    curve = network.curves[bank]
    return GeneralMonotone(
        {c: tuple((b, row[j]) for b, row in zip(curve.breaks, curve.values))
         for j, c in enumerate(curve.claims)}
    )


INCOMING = "incoming"
OUTGOING = "outgoing"


@dataclass(frozen=True)
class TradeSpec:
    direction: str
    focal_bank: str
    buyer: str
    claims: tuple[str, ...]
    rates: tuple[Fraction, ...]
    rate_cap: Fraction = ONE


def incoming_trade(v, w, claims, rates, rate_cap=ONE) -> TradeSpec:
    claims = tuple(claims)
    if not isinstance(rates, (list, tuple)):
        rates = (rates,) * len(claims)
    return TradeSpec(INCOMING, v, w, claims, tuple(to_money(r) for r in rates), to_money(rate_cap))


def outgoing_trade(u, w, claims, rates, rate_cap=ONE) -> TradeSpec:
    claims = tuple(claims)
    if not isinstance(rates, (list, tuple)):
        rates = (rates,) * len(claims)
    return TradeSpec(OUTGOING, u, w, claims, tuple(to_money(r) for r in rates), to_money(rate_cap))


def trade_returns(network: FinancialNetwork, trade: TradeSpec) -> tuple[Fraction, ...]:
    return tuple(a * network.claim(c).liability for c, a in zip(trade.claims, trade.rates))


def validate_trade(network: FinancialNetwork, trade: TradeSpec) -> None:
    v, w = trade.focal_bank, trade.buyer
    network.bank(v)
    network.bank(w)
    if v == w:
        raise SpecViolation("buyer must differ from the focal bank")
    if not trade.claims:
        raise SpecViolation("a trade needs at least one claim")
    if len(set(trade.claims)) != len(trade.claims):
        raise SpecViolation("claims listed twice")
    if len(trade.rates) != len(trade.claims):
        raise SpecViolation("one rate per traded claim required")
    for cid, a in zip(trade.claims, trade.rates):
        c = network.claim(cid)
        if a < 0 or a > trade.rate_cap:
            raise SpecViolation(f"rate {a} for {cid!r} outside [0, {trade.rate_cap}]")
        if trade.direction == INCOMING:
            if c.creditor != v:
                raise SpecViolation(f"claim {cid!r} is not owed to {v!r}")
            if c.debtor == w:
                raise SpecViolation(f"claim {cid!r} is owed by the buyer {w!r}")
        elif trade.direction == OUTGOING:
            if c.debtor != v:
                raise SpecViolation(f"claim {cid!r} is not owed by {v!r}")
            if c.creditor == w:
                raise SpecViolation(f"claim {cid!r} is owed to the buyer {w!r}")
        else:
            raise SpecViolation(f"unknown direction {trade.direction!r}")
    rho = sum(trade_returns(network, trade), ZERO)
    if rho > network.external(w):
        raise Unaffordable(f"return {rho} exceeds buyer external assets {network.external(w)}")
