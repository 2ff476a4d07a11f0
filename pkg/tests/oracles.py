"""Exact-arithmetic oracles shared by the unit and acceptance tests."""

from fractions import Fraction


def fraction_null_vector(rows):
    """Exact null vector (last entry 1) of an r x (r+1) rational system by Gauss-Jordan."""
    A = [list(r) for r in rows]
    r = len(A)
    for i in range(r):
        piv = next(k for k in range(i, r) if A[k][i] != 0)
        A[i], A[piv] = A[piv], A[i]
        A[i] = [v / A[i][i] for v in A[i]]
        for k in range(r):
            if k != i and A[k][i] != 0:
                A[k] = [a - A[k][i] * b for a, b in zip(A[k], A[i])]
    return [-A[i][r] for i in range(r)] + [Fraction(1)]


def taylor(poles, residues, k):
    """k-th Taylor coefficient at 0 of sum r / (z - p) for real rational p, r."""
    return sum(-Fraction(res) / Fraction(p) ** (k + 1) for p, res in zip(poles, residues))


def toeplitz_pade_denominator(poles, n, m):
    """Classical (n - m, m) Padé denominator: sum_j q_j c_{k-j} = 0 for k = n-m+1..n."""
    c = lambda k: taylor(poles, [1] * len(poles), k) if k >= 0 else Fraction(0)
    rows = [[c(k - j) for j in range(m + 1)] for k in range(n - m + 1, n + 1)]
    q = fraction_null_vector(rows)
    return [v / q[0] for v in q]
