from fractions import Fraction


def solve(a, b):
    """Solve a x = b exactly by Gaussian elimination; None if singular."""
    n = len(b)
    m = [list(row) + [rhs] for row, rhs in zip(a, b)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        pr = m[col]
        inv = 1 / Fraction(pr[col])
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col] * inv
                row = m[r]
                for k in range(col, n + 1):
                    if pr[k]:
                        row[k] -= f * pr[k]
    return [m[i][n] / m[i][i] for i in range(n)]
