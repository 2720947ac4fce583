"""Knapsack kernel selection: compiled int64 kernel when built, else pure Python.

The compiled kernel handles instances whose scaled integers fit in int64 and
with at most 62 items; anything larger goes to the pure-Python kernel, which
works with arbitrary-precision integers.
"""

from fractions import Fraction
from math import lcm

from . import _knapsack_py

try:
    from . import _knapsack_ext
except ImportError:  # extension not built
    _knapsack_ext = None

BACKEND = "compiled" if _knapsack_ext is not None else "python"
_LIMIT = 1 << 62


def knapsack_max_value(values, weights, capacity, backend=None):
    """Integer knapsack: max value with weight <= capacity; see _knapsack_py."""
    use = backend or BACKEND
    if use == "compiled" and _knapsack_ext is not None:
        if (len(values) <= 62 and 0 <= capacity < _LIMIT
                and sum(values) < _LIMIT and sum(weights) < _LIMIT):
            return _knapsack_ext.knapsack_max_value(values, weights, capacity)
    return _knapsack_py.knapsack_max_value(values, weights, capacity)


def rational_knapsack(int_values, weights, capacity, backend=None):
    """Knapsack with integer values and rational weights/capacity."""
    capacity = Fraction(capacity)
    if capacity < 0:
        return None
    ws = [Fraction(w) for w in weights]
    den = lcm(capacity.denominator, *(w.denominator for w in ws)) if ws else capacity.denominator
    iw = [int(w * den) for w in ws]
    cap = int(capacity * den)
    # weights above the capacity can never be used; keep the integers small
    res = knapsack_max_value(int_values, [min(w, cap + 1) for w in iw], cap, backend)
    if res is None:
        return None
    val, wt, mask = res
    return val, Fraction(wt, den), mask
