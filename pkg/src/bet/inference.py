"""Null distributions of symmetry statistics and the Max BET procedures.

Two-sided p-values order outcomes by ``|S - E[S]|``. Exact tails are summed
in log space relative to the largest term; results below ``1e-300`` are
floored at the smallest normal double and flagged.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import special, stats

from .errors import (DegenerateVariance, DepthMismatch, EmptyMarginError,
                     InfeasibleCell, MarginMismatch, OutOfRange,
                     ParityViolation, SampleTooSmall)
from .expansion import EMPIRICAL, KNOWN_CDF, BitMatrix
from .interactions import (ContingencyTable, InteractionIndex, SymmetryStats,
                           contingency, enumerate_cross, symmetry_from_table)

FLOOR_THRESHOLD = 1e-300
FLOOR_VALUE = sys.float_info.min

BINOMIAL = "binomial-exact"
HYPERGEOM = "hypergeom-exact"
FISHER = "fisher-2x2"
NORMAL = "normal-approx"


def _floor(p: float) -> float:
    return FLOOR_VALUE if p < FLOOR_THRESHOLD else min(p, 1.0)


def is_floored(p: float) -> bool:
    return p <= FLOOR_VALUE


def bonferroni(p: float, m: float) -> float:
    """``min(1, m * p)``."""
    return min(1.0, m * p)


@lru_cache(maxsize=64)
def _log_comb_table(n: int) -> np.ndarray:
    lf = special.gammaln(np.arange(n + 1, dtype=float) + 1.0)
    return lf[n] - lf - lf[::-1]


def binomial_pvalue(s: int, n: int) -> float:
    """Two-sided exact p-value of ``S`` when ``(S + n) / 2 ~ Binomial(n, 1/2)``."""
    s, n = int(s), int(n)
    if n < 1 or abs(s) > n:
        raise OutOfRange(f"|s| = {abs(s)} exceeds n = {n}")
    if (s + n) % 2:
        raise ParityViolation(f"s = {s} and n = {n} differ in parity")
    if s == 0:
        return 1.0
    # both tails hold the same mass: 2 * P(K <= (n - |s|) / 2)
    kmax = (n - abs(s)) // 2
    logc = _log_comb_table(n)[: kmax + 1]
    top = float(logc.max())
    total = math.fsum(np.exp(logc - top).tolist())
    if top < 700.0:
        p = math.ldexp(2.0 * total * math.exp(top), -n)
    else:
        p = math.exp(top + math.log(2.0 * total) - n * math.log(2.0))
    return _floor(p)


@lru_cache(maxsize=4096)
def _hypergeom_tails(n: int, r: int, c: int) -> tuple:
    """Support start ``k0`` and the two-sided p-value for every feasible ``k``."""
    k0, k1 = max(0, r + c - n), min(r, c)
    k = np.arange(k0, k1 + 1)
    lf = special.gammaln(np.arange(n + 1, dtype=float) + 1.0)
    logw = -(lf[k] + lf[r - k] + lf[c - k] + lf[n - r - c + k])
    w = np.exp(logw - logw.max())
    # |n*k - r*c| is exact integer arithmetic for the two-sided ordering
    dist = np.abs(n * k - r * c)
    order = np.argsort(-dist, kind="stable")
    # farthest (smallest) terms are accumulated first
    cum = np.cumsum(w[order])
    d_sorted = dist[order]
    last_of_group = np.searchsorted(-d_sorted, -d_sorted, side="right") - 1
    pvals = np.empty(k.size)
    pvals[order] = cum[last_of_group] / cum[-1]
    return k0, tuple(_floor(float(p)) for p in pvals)


def _fisher_k(s: int, n: int, r: int, c: int) -> int:
    num = s - n + 2 * r + 2 * c
    if num % 4:
        raise InfeasibleCell(f"s = {s} is not reachable with n = {n}, r_pos = {r}, c_pos = {c}")
    k = num // 4
    if not max(0, r + c - n) <= k <= min(r, c):
        raise InfeasibleCell(f"implied cell count {k} outside the feasible range")
    return k


def fisher_2x2_pvalue(s: int, n: int, r_pos: int, c_pos: int) -> float:
    """Two-sided conditional (Fisher) p-value for one interaction.

    ``r_pos`` and ``c_pos`` count observations where the ``A`` and ``B``
    factors of the interaction are positive; the count ``k`` of observations
    positive in both is hypergeometric and ``S = 4k - 2 r_pos - 2 c_pos + n``.
    """
    s, n, r, c = int(s), int(n), int(r_pos), int(c_pos)
    if not (0 < r < n and 0 < c < n):
        raise InfeasibleCell(f"margins r_pos = {r}, c_pos = {c} must lie strictly inside (0, {n})")
    k = _fisher_k(s, n, r, c)
    k0, pvals = _hypergeom_tails(n, r, c)
    return pvals[k - k0]


def hypergeom_pvalue(s: int, n: int) -> float:
    """Two-sided exact p-value when ``(S + n) / 4 ~ Hypergeometric(n, n/2, n/2)``."""
    s, n = int(s), int(n)
    if n < 2 or n % 2:
        raise MarginMismatch(f"balanced margins need an even sample size, got n = {n}")
    if abs(s) > n:
        raise OutOfRange(f"|s| = {abs(s)} exceeds n = {n}")
    if (s + n) % 4:
        raise ParityViolation(f"s + n = {s + n} is not a multiple of 4")
    return fisher_2x2_pvalue(s, n, n // 2, n // 2)


def expected_symmetry(n: int, r_pos: int, c_pos: int) -> float:
    return 4.0 * r_pos * c_pos / n - 2.0 * r_pos - 2.0 * c_pos + n


def normal_approx_pvalue(s: int, n: int, r_pos: int, c_pos: int,
                         continuity: bool = False) -> tuple[float, float]:
    """Normal approximation to the conditional null of ``S``.

    Returns ``(z, p)`` with ``p = 2 * (1 - Phi(|z|))``. With ``continuity``
    the deviation is shrunk by 2 (one unit of the hypergeometric count).
    """
    n, r, c = int(n), int(r_pos), int(c_pos)
    var = r * c * (n - r) * (n - c) / (n * n * (n - 1.0)) if n > 1 else 0.0
    if var <= 0.0:
        raise DegenerateVariance(f"zero variance with n = {n}, r_pos = {r}, c_pos = {c}")
    sd = 4.0 * math.sqrt(var)
    dev = s - expected_symmetry(n, r, c)
    if continuity:
        dev = math.copysign(max(abs(dev) - 2.0, 0.0), dev)
    z = dev / sd
    p = 2.0 * float(stats.norm.sf(abs(z)))
    return z, _floor(p)


@dataclass(frozen=True)
class SymmetryTestResult:
    index: InteractionIndex
    s: int
    p: float
    method: str
    z: Optional[float] = None

    @property
    def floored(self) -> bool:
        return is_floored(self.p)

    @property
    def depth(self) -> int:
        return max(self.index.d1, self.index.d2)

    def sort_key(self):
        return (self.p, -abs(self.s), self.index.packed)

    def to_dict(self) -> dict:
        return {"interaction": self.index.label, "depth": self.depth, "s": self.s,
                "z": self.z, "p": self.p, "method": self.method}


@dataclass(frozen=True)
class BetResult:
    """Outcome of a Max BET or two-stage BET.

    For the single-depth Max BET ``p_adjusted = min(1, n_tests * min p)``.
    For the two-stage search ``depth_p`` holds the within-depth adjusted
    p-values and ``p_adjusted = min(1, d_max * min(depth_p))``.
    """

    d1: int
    d2: int
    per_interaction: tuple
    strongest: SymmetryTestResult
    p_adjusted: float
    n_tests: int
    d_max: Optional[int] = None
    depth_p: tuple = field(default=())

    @property
    def s_extreme(self) -> int:
        return self.strongest.s

    @property
    def interaction(self) -> InteractionIndex:
        return self.strongest.index

    def to_dict(self) -> dict:
        return {
            "d1": self.d1, "d2": self.d2, "d_max": self.d_max,
            "n_tests": self.n_tests,
            "strongest": self.strongest.index.label,
            "s": self.strongest.s, "z": self.strongest.z,
            "p_raw": self.strongest.p,
            "p_adjusted": self.p_adjusted,
            "depth_p": list(self.depth_p),
            "per_interaction": [r.to_dict() for r in self.per_interaction],
        }


def test_interaction(stats_: SymmetryStats, idx: InteractionIndex, provenance: str,
                     method: str = "exact", continuity: bool = False) -> SymmetryTestResult:
    """Test symmetry of one cross interaction given all statistics at its depth."""
    s, n = stats_[idx], stats_.n
    if provenance == KNOWN_CDF:
        if method == "exact":
            return SymmetryTestResult(idx, s, binomial_pvalue(s, n), BINOMIAL)
        dev = abs(s) - 1.0 if continuity and s else abs(s)
        z = math.copysign(max(dev, 0.0), s) / math.sqrt(n)
        return SymmetryTestResult(idx, s, _floor(2.0 * float(stats.norm.sf(abs(z)))), NORMAL, z)
    if provenance != EMPIRICAL:
        raise ValueError(f"unknown provenance {provenance!r}")
    r = (n + stats_.marginal_u(idx)) // 2
    c = (n + stats_.marginal_v(idx)) // 2
    if method == "exact":
        if 2 * r == n and 2 * c == n:
            return SymmetryTestResult(idx, s, hypergeom_pvalue(s, n), HYPERGEOM)
        return SymmetryTestResult(idx, s, fisher_2x2_pvalue(s, n, r, c), FISHER)
    z, p = normal_approx_pvalue(s, n, r, c, continuity)
    return SymmetryTestResult(idx, s, p, NORMAL, z)


test_interaction.__test__ = False  # not a pytest test


def _check_method(method: str):
    if method not in ("exact", "normal"):
        raise ValueError(f"unknown method {method!r}")


def _check_size(n: int, depth: int):
    if n < 1 << depth:
        raise SampleTooSmall(f"n = {n} is below 2**{depth} = {1 << depth}")


def max_bet_from_stats(stats_: SymmetryStats, provenance: str, method: str = "exact",
                       continuity: bool = False) -> BetResult:
    _check_method(method)
    _check_size(stats_.n, max(stats_.d1, stats_.d2))
    results = tuple(test_interaction(stats_, idx, provenance, method, continuity)
                    for idx in enumerate_cross(stats_.d1, stats_.d2))
    best = min(results, key=SymmetryTestResult.sort_key)
    return BetResult(stats_.d1, stats_.d2, results, best,
                     bonferroni(best.p, len(results)), len(results))


def max_bet(bits_u: BitMatrix, bits_v: BitMatrix, d1: int, d2: int, provenance: str,
            method: str = "exact", continuity: bool = False) -> BetResult:
    """Max BET at depths ``(d1, d2)`` with Bonferroni over all cross interactions.

    Known-CDF data use the exact binomial null; empirical ranks use the
    hypergeometric null, falling back to per-interaction Fisher tests when the
    margins are unbalanced. ``method="normal"`` replaces exact tails by the
    normal approximation.
    """
    if bits_u.n != bits_v.n:
        raise DepthMismatch("sample sizes differ")
    _check_size(bits_u.n, max(d1, d2))
    t = contingency(bits_u, bits_v, d1, d2)
    return max_bet_from_stats(symmetry_from_table(t), provenance, method, continuity)


def added_interactions(d: int) -> tuple:
    """Cross interactions at depth ``(d, d)`` involving ``A_d`` or ``B_d``."""
    return tuple(i for i in enumerate_cross(d, d) if i.a[-1] or i.b[-1])


def two_stage_from_stats(stats_by_depth, provenance: str, method: str = "exact",
                         continuity: bool = False) -> BetResult:
    _check_method(method)
    d_max = len(stats_by_depth)
    _check_size(stats_by_depth[0].n, d_max)
    results, depth_p, best_per_depth = [], [], []
    for d, st in enumerate(stats_by_depth, start=1):
        res = [test_interaction(st, idx, provenance, method, continuity)
               for idx in added_interactions(d)]
        best = min(res, key=SymmetryTestResult.sort_key)
        depth_p.append(bonferroni(best.p, len(res)))
        best_per_depth.append(best)
        results.extend(res)
    d_best = min(range(d_max), key=lambda i: (depth_p[i],) + best_per_depth[i].sort_key())
    return BetResult(d_max, d_max, tuple(results), best_per_depth[d_best],
                     bonferroni(depth_p[d_best], d_max), len(results),
                     d_max=d_max, depth_p=tuple(depth_p))


def two_stage_bet(bits_u: BitMatrix, bits_v: BitMatrix, d_max: int, provenance: str,
                  method: str = "exact", continuity: bool = False) -> BetResult:
    """Depth sweep ``d = 1 .. d_max`` testing only newly added interactions.

    Each depth is Bonferroni-adjusted over its added interactions, and the
    smallest depth-wise p-value is multiplied by ``d_max``.
    """
    if bits_u.n != bits_v.n:
        raise DepthMismatch("sample sizes differ")
    if d_max < 1:
        raise ValueError("d_max must be at least 1")
    _check_size(bits_u.n, d_max)
    stats_by_depth = [symmetry_from_table(contingency(bits_u, bits_v, d, d))
                      for d in range(1, d_max + 1)]
    return two_stage_from_stats(stats_by_depth, provenance, method, continuity)


@dataclass(frozen=True)
class ChiSquareResult:
    stat: float
    df: int
    p: float


def chisq_test(t: ContingencyTable) -> ChiSquareResult:
    """Pearson chi-square test of independence on the full table."""
    grid = t.grid().astype(float)
    rows, cols = grid.sum(axis=1), grid.sum(axis=0)
    if np.any(rows == 0) or np.any(cols == 0):
        raise EmptyMarginError("a row or column total is zero")
    n = grid.sum()
    expected = np.outer(rows, cols) / n
    stat = float(((grid - expected) ** 2 / expected).sum())
    df = ((1 << t.d1) - 1) * ((1 << t.d2) - 1)
    return ChiSquareResult(stat, df, float(stats.chi2.sf(stat, df)))


def chisq_from_symmetry(stats_: SymmetryStats) -> float:
    """``(1/n) * sum of squared cross statistics``; equals Pearson's statistic on equal-margin tables."""
    ms = [i.packed for i in enumerate_cross(stats_.d1, stats_.d2)]
    vals = stats_.values[ms].astype(float)
    return float(np.dot(vals, vals) / stats_.n)
