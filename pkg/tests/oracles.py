"""Independent float oracles used to cross-check the exact implementations."""

from claimtrade.net_model import EdgeRanking, GeneralMonotone


def _interp(points, b):
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        if b <= x1:
            return y0 + (y1 - y0) * (b - x0) / (x1 - x0)
    return points[-1][1]


def float_payments(net, bank, funds):
    outs = list(net.out_claims(bank))
    ells = {c: float(net.claim(c).liability) for c in outs}
    pf = net.bank(bank).payment
    if not outs:
        return {}
    if isinstance(pf, EdgeRanking):
        left, res = funds, {}
        for c in pf.order:
            res[c] = min(ells[c], max(left, 0.0))
            left -= res[c]
        return res
    if isinstance(pf, GeneralMonotone):
        return {c: _interp([(float(x), float(y)) for x, y in pf.table[c]], funds) for c in outs}
    total = sum(ells.values())
    return {c: ells[c] * min(1.0, funds / total) for c in outs}


def kleene_float(net, max_iter=200000, tol=1e-13):
    """Plain Kleene iteration downward from full payment (greatest fixed point)."""
    pay = {c: float(cl.liability) for c, cl in net.claims.items()}
    for _ in range(max_iter):
        assets = {b: float(net.external(b)) + sum(pay[c] for c in net.in_claims(b)) for b in net.banks}
        new = {}
        for b in net.banks:
            new.update(float_payments(net, b, assets[b]))
        if max((abs(new[c] - pay[c]) for c in pay), default=0.0) < tol:
            pay = new
            break
        pay = new
    assets = {b: float(net.external(b)) + sum(pay[c] for c in net.in_claims(b)) for b in net.banks}
    return pay, assets
