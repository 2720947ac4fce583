"""Pure-Python knapsack kernel (reference implementation and fallback)."""


def knapsack_max_value(values, weights, capacity):
    """Max total value with total weight <= capacity over subsets of items.

    Integer inputs.  Ties: smaller weight, then smaller item bitmask.
    Returns (value, weight, mask) or None if even the empty set is infeasible.
    """
    if capacity < 0:
        return None
    top = sum(values)
    inf = None
    best_w = [inf] * (top + 1)
    best_m = [0] * (top + 1)
    best_w[0] = 0
    reach = 0
    for i, (v, w) in enumerate(zip(values, weights)):
        bit = 1 << i
        for val in range(reach, -1, -1):
            bw = best_w[val]
            if bw is None:
                continue
            cw = bw + w
            if cw > capacity:
                continue
            t = val + v
            cm = best_m[val] | bit
            old = best_w[t]
            if old is None or cw < old or (cw == old and cm < best_m[t]):
                best_w[t] = cw
                best_m[t] = cm
        reach += v
    for val in range(top, -1, -1):
        if best_w[val] is not None:
            return val, best_w[val], best_m[val]
    return None
