"""JSON network/report formats and the ``claimtrade`` command line."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import testkit
from .clearing import ClearingState, clear
from .errors import ClaimTradeError, ParseError
from .multi_in_opt import (
    bicriteria_fptas,
    decide_fixed_rates_set,
    optimal_multi_in_fixed_set,
    subsidized_fptas_fixed_rates,
)
from .multi_out_opt import brute_force_out_select, decide_out_fixed, optimal_out_proportional
from .net_model import (
    Bank,
    Claim,
    EdgeRanking,
    FinancialNetwork,
    GeneralMonotone,
    Proportional,
    build_network,
    to_money,
)
from .single_opt import decide_single_fixed_alpha, optimal_single

FORMAT_VERSION = "1"
EXIT_OK, EXIT_ERROR, EXIT_NO_TRADE = 0, 1, 2


def fmt(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def num(x: Fraction, digits: int = 12) -> dict:
    """Exact fraction string plus a decimal rendering for humans."""
    x = Fraction(x)
    return {"exact": fmt(x), "decimal": _decimal(x, digits)}


def _decimal(x: Fraction, digits: int) -> str:
    sign = "-" if x < 0 else ""
    x = abs(x)
    scaled = round(x * 10 ** digits)
    whole, frac = divmod(scaled, 10 ** digits)
    tail = str(frac).rjust(digits, "0").rstrip("0")
    return f"{sign}{whole}.{tail}" if tail else f"{sign}{whole}"


# ------------------------------------------------------------------ parsing


def _field(obj, key, where):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"{where}: missing field {key!r}")
    return obj[key]


def _money(value, where):
    if isinstance(value, dict) and "exact" in value:
        value = value["exact"]
    if isinstance(value, bool) or not isinstance(value, (int, str, float)):
        raise ParseError(f"{where}: expected a number, got {value!r}")
    try:
        return to_money(value)
    except ParseError as exc:
        raise ParseError(f"{where}: {exc}") from None


def _payment(doc, where):
    kind = _field(doc, "kind", where)
    if kind == "proportional":
        return Proportional()
    if kind == "edge-ranking":
        order = _field(doc, "order", where)
        if not isinstance(order, list):
            raise ParseError(f"{where}.order: expected a list of claim ids")
        return EdgeRanking(tuple(str(c) for c in order))
    if kind == "general":
        table = _field(doc, "table", where)
        if not isinstance(table, dict):
            raise ParseError(f"{where}.table: expected an object keyed by claim id")
        out = {}
        for cid, pts in table.items():
            if not isinstance(pts, list):
                raise ParseError(f"{where}.table.{cid}: expected a list of [funds, payment] pairs")
            rows = []
            for k, pt in enumerate(pts):
                if not isinstance(pt, list) or len(pt) != 2:
                    raise ParseError(f"{where}.table.{cid}[{k}]: expected [funds, payment]")
                rows.append((_money(pt[0], f"{where}.table.{cid}[{k}]"),
                             _money(pt[1], f"{where}.table.{cid}[{k}]")))
            out[str(cid)] = tuple(rows)
        return GeneralMonotone(out)
    raise ParseError(f"{where}.kind: unknown payment kind {kind!r}")


def network_from_doc(doc) -> FinancialNetwork:
    if not isinstance(doc, dict):
        raise ParseError("network document must be a JSON object")
    version = str(doc.get("version", FORMAT_VERSION))
    if version != FORMAT_VERSION:
        raise ParseError(f"unsupported format version {version!r}")
    banks, claims = [], []
    for i, b in enumerate(_field(doc, "banks", "document")):
        where = f"banks[{i}]"
        pay = b.get("payments", {"kind": "proportional"}) if isinstance(b, dict) else None
        banks.append(Bank(str(_field(b, "id", where)),
                          _money(b.get("external_assets", 0), f"{where}.external_assets"),
                          _payment(pay, f"{where}.payments")))
    for i, c in enumerate(_field(doc, "claims", "document")):
        where = f"claims[{i}]"
        claims.append(Claim(str(_field(c, "id", where)), str(_field(c, "debtor", where)),
                            str(_field(c, "creditor", where)),
                            _money(_field(c, "liability", where), f"{where}.liability")))
    return build_network(banks, claims)


def parse_network(text: str) -> FinancialNetwork:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return network_from_doc(doc)


def network_to_doc(net: FinancialNetwork) -> dict:
    banks = []
    for b in net.banks.values():
        pf = b.payment
        if isinstance(pf, EdgeRanking):
            pay = {"kind": "edge-ranking", "order": list(pf.order)}
        elif isinstance(pf, GeneralMonotone):
            pay = {"kind": "general",
                   "table": {c: [[fmt(x), fmt(y)] for x, y in pf.table[c]] for c in net.out_claims(b.id)}}
        else:
            pay = {"kind": "proportional"}
        banks.append({"id": b.id, "external_assets": fmt(b.external_assets), "payments": pay})
    claims = [{"id": c.id, "debtor": c.debtor, "creditor": c.creditor, "liability": fmt(c.liability)}
              for c in net.claims.values()]
    return {"version": FORMAT_VERSION, "banks": banks, "claims": claims}


def emit_network(net: FinancialNetwork) -> str:
    return json.dumps(network_to_doc(net), indent=2) + "\n"


def parse_rates(text: str) -> dict:
    """Rates file: {claim: rate} or a document with a ``rates`` member."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"rates, line {exc.lineno}: {exc.msg}") from None
    if isinstance(doc, dict) and isinstance(doc.get("rates"), dict):
        doc = doc["rates"]
    if not isinstance(doc, dict):
        raise ParseError("rates must be an object mapping claim ids to rates")
    return {str(k): _money(v, f"rates.{k}") for k, v in doc.items()}


# ------------------------------------------------------------------ reports


def clearing_report(state: ClearingState) -> dict:
    return {
        "payments": {c: num(p) for c, p in state.payments.items()},
        "assets": {b: num(a) for b, a in state.assets.items()},
        "recovery": {b: num(r) for b, r in state.recovery.items()},
        "exact": state.exact,
    }


def outcome_report(out) -> dict:
    t = out.trade
    return {
        "clearing": clearing_report(out.post_state),
        "pre_clearing": clearing_report(out.pre_state),
        "trade": {"direction": t.direction, "focal_bank": t.focal_bank, "buyer": t.buyer,
                  "claims": list(t.claims), "rates": [num(a) for a in t.rates],
                  "return": num(out.return_paid)},
        "deltas": {b: num(d) for b, d in out.deltas.items()},
        "flags": {"creditor_positive": out.creditor_positive, "pareto_positive": out.pareto_positive,
                  "both_strict": out.both_strict},
    }


# ---------------------------------------------------------------------- CLI


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from None


def _load(path) -> FinancialNetwork:
    return parse_network(_read(path))


def _ids(text):
    return [s for s in (x.strip() for x in text.split(",")) if s]


def _emit(report, summary, code=EXIT_OK):
    json.dump(report, sys.stdout, indent=2)
    sys.stdout.write("\n")
    print(summary, file=sys.stderr)
    return code


def _no_trade(report, note):
    report["trade"] = None
    report["note"] = note
    return _emit(report, f"no trade: {note}", EXIT_NO_TRADE)


def cmd_clear(args):
    st = clear(_load(args.file))
    return _emit({"clearing": clearing_report(st)}, f"cleared {len(st.assets)} banks")


def cmd_single(args):
    net = _load(args.file)
    v = net.claim(args.claim).creditor
    if args.alpha is not None:
        out = decide_single_fixed_alpha(net, args.claim, args.buyer, to_money(args.alpha))
        rep = outcome_report(out)
        if not out.creditor_positive:
            return _no_trade(rep, "the given rate is not creditor-positive")
        return _emit(rep, f"{v} reaches assets {fmt(out.achieved_assets)}")
    delta = to_money(args.delta) if args.delta is not None else None
    res = optimal_single(net, args.claim, args.buyer, delta)
    if not res.found:
        return _no_trade({"clearing": clearing_report(clear(net))}, res.note or "no creditor-positive rate")
    rep = outcome_report(res.outcome)
    rep["guarantees"] = {"delta": num(delta) if delta is not None else None, "probes": res.probes}
    return _emit(rep, f"alpha = {fmt(res.alpha)}, {v} reaches assets {fmt(res.achieved_assets)}")


def _multi_report(net, res, extra):
    if not res.found:
        return _no_trade({"clearing": clearing_report(clear(net))}, res.note or "no trade found")
    rep = outcome_report(res.outcome)
    rep["guarantees"] = extra
    if res.subsidies is not None:
        rep["guarantees"]["subsidies"] = {"creditor": num(res.subsidies[0]), "buyer": num(res.subsidies[1])}
    if res.level is not None:
        rep["guarantees"]["level"] = num(res.level)
    return _emit(rep, f"traded {', '.join(res.claims)}; assets {fmt(res.achieved_assets)}")


def cmd_multi_in(args):
    net = _load(args.file)
    v, w = args.creditor, args.buyer
    delta = to_money(args.delta) if args.delta is not None else None
    if args.rates:
        rates = parse_rates(_read(args.rates))
        if args.choose_fixed:
            if delta is None:
                raise ParseError("--choose-fixed needs --delta")
            res = subsidized_fptas_fixed_rates(net, v, w, rates, delta)
            return _multi_report(net, res, {"delta": num(delta)})
        claims = _ids(args.claims) if args.claims else list(rates)
        out = decide_fixed_rates_set(net, v, w, claims, rates)
        rep = outcome_report(out)
        if not out.creditor_positive:
            return _no_trade(rep, "the fixed-rate trade is not creditor-positive")
        return _emit(rep, f"{v} reaches assets {fmt(out.achieved_assets)}")
    if args.choose:
        if args.epsilon is None or delta is None:
            raise ParseError("--choose needs --epsilon and --delta")
        eps = to_money(args.epsilon)
        res = bicriteria_fptas(net, v, w, eps, delta)
        return _multi_report(net, res, {"epsilon": num(eps), "delta": num(delta)})
    if not args.claims:
        raise ParseError("give --claims, --choose or --rates")
    res = optimal_multi_in_fixed_set(net, v, w, _ids(args.claims), delta)
    return _multi_report(net, res, {"delta": num(delta) if delta is not None else None})


def cmd_multi_out(args):
    net = _load(args.file)
    u, w = args.debtor, args.buyer
    if args.brute_force:
        res = brute_force_out_select(net, u, w)
    else:
        claims = _ids(args.claims or "")
        if args.rates:
            rates = parse_rates(_read(args.rates))
            res = decide_out_fixed(net, u, w, claims, rates)
        else:
            res = optimal_out_proportional(net, u, w, claims)
    if not res.found:
        rep = outcome_report(res.outcome) if res.outcome is not None else {"clearing": clearing_report(clear(net))}
        return _no_trade(rep, res.note or "no Pareto-positive trade")
    rep = outcome_report(res.outcome)
    rep["creditor_profit_total"] = num(res.creditor_profit_total)
    return _emit(rep, f"creditors of {u} gain {fmt(res.creditor_profit_total)} in total")


def _int_list(text):
    return [int(x) for x in _ids(text)]


def _sets(text):
    return [_int_list(part) for part in text.split(";") if part.strip()]


def cmd_generate(args):
    g = args.generator
    extra = {}
    if g == "subset-sum":
        net = testkit.gen_subset_sum_incoming(_int_list(args.values), args.target, args.kind)
    elif g == "subset-sum-fixed":
        net, rates = testkit.gen_subset_sum_incoming_fixed(_int_list(args.values), args.target)
        extra["rates"] = {c: fmt(a) for c, a in rates.items()}
    elif g == "set-packing":
        net = testkit.gen_set_packing_outgoing(args.universe, _sets(args.sets), args.k)
    elif g == "set-packing-prop":
        net = testkit.gen_set_packing_prop(args.universe, _sets(args.sets), args.k, args.M)
    else:
        net = testkit.random_network(args.banks, args.claims, args.max_liability, args.kind, args.seed)
    doc = network_to_doc(net)
    doc.update(extra)
    return _emit(doc, f"generated {g}: {len(net.banks)} banks, {len(net.claims)} claims")


def cmd_verify(args):
    network = None if args.file == "random" else _load(args.file)
    results, ok = {}, True
    for prop in _ids(args.properties):
        passed, failed, skipped, first = testkit.run_property(prop, args.trials, args.seed, network)
        results[prop] = {"passed": passed, "failed": failed, "skipped": skipped, "first_failure": first}
        ok = ok and failed == 0
    summary = "; ".join(f"{p}: {r['passed']} pass, {r['failed']} fail" for p, r in results.items())
    return _emit({"properties": results, "ok": ok}, summary, EXIT_OK if ok else EXIT_ERROR)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="claimtrade", description="Clearing and claims trades in financial networks.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("clear", help="compute the maximal clearing state")
    c.add_argument("file")
    c.set_defaults(func=cmd_clear)

    t = sub.add_parser("trade", help="evaluate or optimize a claims trade")
    tsub = t.add_subparsers(dest="trade_kind", required=True)

    s = tsub.add_parser("single")
    s.add_argument("file")
    s.add_argument("--claim", required=True)
    s.add_argument("--buyer", required=True)
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--alpha")
    g.add_argument("--optimize", action="store_true")
    s.add_argument("--delta")
    s.set_defaults(func=cmd_single)

    mi = tsub.add_parser("multi-in")
    mi.add_argument("file")
    mi.add_argument("--creditor", required=True)
    mi.add_argument("--buyer", required=True)
    mi.add_argument("--claims")
    mi.add_argument("--uniform", action="store_true")
    mi.add_argument("--choose", action="store_true")
    mi.add_argument("--rates")
    mi.add_argument("--choose-fixed", action="store_true")
    mi.add_argument("--epsilon")
    mi.add_argument("--delta")
    mi.set_defaults(func=cmd_multi_in)

    mo = tsub.add_parser("multi-out")
    mo.add_argument("file")
    mo.add_argument("--debtor", required=True)
    mo.add_argument("--buyer", required=True)
    mo.add_argument("--claims")
    g = mo.add_mutually_exclusive_group(required=True)
    g.add_argument("--rates")
    g.add_argument("--optimize", action="store_true")
    g.add_argument("--brute-force", action="store_true")
    mo.set_defaults(func=cmd_multi_out)

    gen = sub.add_parser("generate", help="emit a reduction or random instance")
    gen.add_argument("generator", choices=["subset-sum", "subset-sum-fixed", "set-packing",
                                           "set-packing-prop", "random"])
    gen.add_argument("--values", help="comma-separated integers (subset-sum)")
    gen.add_argument("--target", type=int)
    gen.add_argument("--universe", type=int)
    gen.add_argument("--sets", help="sets separated by ';', elements by ','")
    gen.add_argument("--k", type=int)
    gen.add_argument("--M")
    gen.add_argument("--banks", type=int, default=5)
    gen.add_argument("--claims", type=int, default=8)
    gen.add_argument("--max-liability", type=int, default=10)
    gen.add_argument("--kind", default=None)
    gen.add_argument("--seed", type=int, default=0)
    gen.set_defaults(func=cmd_generate)

    ver = sub.add_parser("verify", help="run property checks")
    ver.add_argument("file", help="network file, or 'random' for generated networks")
    ver.add_argument("--properties", required=True, help=f"comma list of {sorted(testkit.PROPERTIES)}")
    ver.add_argument("--trials", type=int, default=100)
    ver.add_argument("--seed", type=int, default=0)
    ver.set_defaults(func=cmd_verify)
    return p


def run_cli(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        if args.command == "generate":
            _default_generate_args(args)
        return args.func(args)
    except (ClaimTradeError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


def _default_generate_args(args):
    if args.kind is None:
        args.kind = "edge-ranking" if args.generator == "subset-sum" else "mixed"
    needs = {
        "subset-sum": ("values", "target"),
        "subset-sum-fixed": ("values", "target"),
        "set-packing": ("universe", "sets", "k"),
        "set-packing-prop": ("universe", "sets", "k"),
    }.get(args.generator, ())
    missing = [n for n in needs if getattr(args, n) is None]
    if missing:
        raise ParseError(f"generate {args.generator}: missing --{', --'.join(missing)}")


def main() -> None:
    sys.exit(run_cli())
