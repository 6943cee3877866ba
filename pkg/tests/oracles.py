"""Slow reference implementations used as test oracles.

Everything here is written from the definitions with exact rational or
plain-loop arithmetic and shares no code with the package.
"""
from fractions import Fraction
from math import comb


def binomial_two_sided(s, n):
    """P(|2K - n| >= |s|) for K ~ Binomial(n, 1/2), by full enumeration."""
    hits = sum(comb(n, k) for k in range(n + 1) if abs(2 * k - n) >= abs(s))
    return Fraction(hits, 2 ** n)


def hypergeom_two_sided(n, r, c, k_obs):
    """Two-sided tail of the 2x2 count ``k`` with margins ``r, c``, ordered by |n k - r c|."""
    lo, hi = max(0, r + c - n), min(r, c)
    weight = {k: comb(r, k) * comb(n - r, c - k) for k in range(lo, hi + 1)}
    total = sum(weight.values())
    obs = abs(n * k_obs - r * c)
    return Fraction(sum(w for k, w in weight.items() if abs(n * k - r * c) >= obs), total)


def popcount(x):
    return bin(x).count("1")


def hadamard_entry(i, j):
    return -1 if popcount(i & j) % 2 else 1


def digits(u, d):
    """First ``d`` binary digits of ``u`` in (0, 1] via the interval ((j)/2^d, (j+1)/2^d]."""
    u = Fraction(u)
    scale = 2 ** d
    for j in range(scale):
        if Fraction(j, scale) < u <= Fraction(j + 1, scale):
            return [(j >> (d - 1 - k)) & 1 for k in range(d)]
    raise ValueError(f"{u} outside (0, 1]")


def symmetry_loop(us, vs, a, b):
    """S for interaction (a, b): sum over points of the product of selected +-1 digits."""
    d1, d2 = len(a), len(b)
    total = 0
    for u, v in zip(us, vs):
        du, dv = digits(u, d1), digits(v, d2)
        term = 1
        for k in range(d1):
            if a[k]:
                term *= 2 * du[k] - 1
        for k in range(d2):
            if b[k]:
                term *= 2 * dv[k] - 1
        total += term
    return total


def counts_loop(us, vs, d1, d2):
    """Cell counts indexed by packed digits (u digits high, v digits low)."""
    out = [0] * 2 ** (d1 + d2)
    for u, v in zip(us, vs):
        cell = 0
        for bit in digits(u, d1) + digits(v, d2):
            cell = 2 * cell + bit
        out[cell] += 1
    return out


def pearson_chisq(grid):
    rows = [sum(r) for r in grid]
    cols = [sum(c) for c in zip(*grid)]
    n = sum(rows)
    stat = 0.0
    for i, r in enumerate(rows):
        for j, c in enumerate(cols):
            e = r * c / n
            stat += (grid[i][j] - e) ** 2 / e
    return stat
