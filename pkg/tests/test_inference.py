import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bet import inference as inf
from bet.errors import (DegenerateVariance, EmptyMarginError, InfeasibleCell, MarginMismatch,
                        OutOfRange, ParityViolation, SampleTooSmall)
from bet.expansion import (EMPIRICAL, KNOWN_CDF, BitMatrix, SampleSet, binary_expand,
                           empirical_copula)
from bet.interactions import ContingencyTable, InteractionIndex, symmetry_from_table

from oracles import binomial_two_sided, hypergeom_two_sided, pearson_chisq


def test_bonferroni_caps_at_one():
    assert inf.bonferroni(0.01, 5) == pytest.approx(0.05)
    assert inf.bonferroni(0.3, 5) == 1.0


@given(st.integers(1, 80).flatmap(
    lambda n: st.tuples(st.just(n), st.integers(0, n).map(lambda k: 2 * k - n))))
def test_binomial_matches_enumeration(case):
    n, s = case
    assert inf.binomial_pvalue(s, n) == pytest.approx(float(binomial_two_sided(s, n)),
                                                      rel=1e-12, abs=0)


def test_binomial_extremes_exact():
    assert inf.binomial_pvalue(40, 40) == 2 / 2 ** 40
    assert inf.binomial_pvalue(-40, 40) == 2 / 2 ** 40
    assert inf.binomial_pvalue(0, 40) == 1.0


def test_binomial_errors():
    with pytest.raises(ParityViolation):
        inf.binomial_pvalue(3, 10)
    with pytest.raises(OutOfRange):
        inf.binomial_pvalue(12, 10)


def test_binomial_floor():
    p = inf.binomial_pvalue(2000, 2000)
    assert p == inf.FLOOR_VALUE
    assert inf.is_floored(p)


@given(st.integers(2, 40).flatmap(lambda n: st.tuples(
    st.just(n), st.integers(1, n - 1), st.integers(1, n - 1), st.integers(0, n))))
def test_fisher_matches_enumeration(case):
    n, r, c, k = case
    if not max(0, r + c - n) <= k <= min(r, c):
        return
    s = 4 * k - 2 * r - 2 * c + n
    ref = float(hypergeom_two_sided(n, r, c, k))
    assert inf.fisher_2x2_pvalue(s, n, r, c) == pytest.approx(ref, rel=1e-12)


def test_fisher_agrees_with_scipy():
    from scipy.stats import fisher_exact
    n, r, c, k = 30, 12, 17, 10
    table = [[k, r - k], [c - k, n - r - c + k]]
    s = 4 * k - 2 * r - 2 * c + n
    assert inf.fisher_2x2_pvalue(s, n, r, c) == pytest.approx(fisher_exact(table)[1], rel=1e-9)


def test_hypergeom_small_case():
    # n = 8, balanced margins, k = 4 is the most extreme count: 2 / C(8, 4)
    assert inf.hypergeom_pvalue(8, 8) == pytest.approx(2 / 70, rel=1e-14)
    assert inf.hypergeom_pvalue(0, 8) == 1.0


def test_hypergeom_errors():
    with pytest.raises(MarginMismatch):
        inf.hypergeom_pvalue(1, 7)
    with pytest.raises(ParityViolation):
        inf.hypergeom_pvalue(2, 8)
    with pytest.raises(InfeasibleCell):
        inf.fisher_2x2_pvalue(2, 10, 0, 5)


def test_normal_approx_star_value():
    z, p = inf.normal_approx_pvalue(56, 256, 128, 128)
    assert z == pytest.approx(56 / (4 * math.sqrt(128 ** 4 / (256 ** 2 * 255))))
    assert p == pytest.approx(2 * (1 - 0.5 * (1 + math.erf(z / math.sqrt(2)))), rel=1e-9)


def test_normal_approx_continuity_and_degenerate():
    z0, _ = inf.normal_approx_pvalue(20, 100, 50, 50)
    z1, _ = inf.normal_approx_pvalue(20, 100, 50, 50, continuity=True)
    assert z1 < z0
    assert z1 == pytest.approx(z0 * 18 / 20)
    with pytest.raises(DegenerateVariance):
        inf.normal_approx_pvalue(0, 10, 10, 5)


def _table_stats(grid, d1, d2):
    return symmetry_from_table(ContingencyTable(d1, d2, np.asarray(grid).ravel()))


def test_max_bet_known_cdf_uses_binomial():
    stats_ = _table_stats([[6, 10], [10, 6], [6, 10], [9, 7]], 2, 1)
    res = inf.max_bet_from_stats(stats_, KNOWN_CDF)
    assert res.n_tests == 3
    assert res.strongest.index.label == "A2B1"
    assert res.strongest.s == -14
    assert res.strongest.method == inf.BINOMIAL
    assert res.p_adjusted == pytest.approx(3 * float(binomial_two_sided(14, 64)), rel=1e-12)


def test_max_bet_empirical_balanced_is_hypergeom():
    bm = BitMatrix.from_cells(np.arange(16) % 4, 2)
    bv = BitMatrix.from_cells((np.arange(16) // 4) % 4, 2)
    res = inf.max_bet(bm, bv, 2, 2, EMPIRICAL)
    assert {r.method for r in res.per_interaction} == {inf.HYPERGEOM}
    assert res.n_tests == 9


def test_max_bet_empirical_unbalanced_uses_fisher():
    rng = np.random.default_rng(1)
    cop = empirical_copula(SampleSet(rng.random(37), rng.random(37)))
    bu, bv = binary_expand(cop, 2)
    res = inf.max_bet(bu, bv, 2, 2, EMPIRICAL)
    assert inf.FISHER in {r.method for r in res.per_interaction}


def test_tie_break_prefers_lowest_packed_index():
    # all cross statistics zero -> every p is 1; the first index wins
    stats_ = _table_stats(np.ones((4, 4), dtype=int) * 4, 2, 2)
    res = inf.max_bet_from_stats(stats_, EMPIRICAL)
    assert res.strongest.index == InteractionIndex.from_packed(5, 2, 2)
    assert res.p_adjusted == 1.0


def test_sample_too_small():
    bm = BitMatrix.from_cells([0, 1, 2], 2)
    with pytest.raises(SampleTooSmall):
        inf.max_bet(bm, bm, 2, 2, KNOWN_CDF)


def test_added_interaction_counts():
    assert [len(inf.added_interactions(d)) for d in range(1, 5)] == [1, 8, 40, 176]
    for d in range(1, 5):
        assert sum(len(inf.added_interactions(k)) for k in range(1, d + 1)) == (2 ** d - 1) ** 2


def test_two_stage_adjustment():
    rng = np.random.default_rng(4)
    x = rng.random(128)
    cop = empirical_copula(SampleSet(x, x + 0.05 * rng.normal(size=128)))
    bu, bv = binary_expand(cop, 3)
    res = inf.two_stage_bet(bu, bv, 3, EMPIRICAL)
    assert res.d_max == 3
    assert res.n_tests == 1 + 8 + 40
    assert res.p_adjusted == pytest.approx(min(1.0, 3 * min(res.depth_p)))
    assert res.strongest.index.label == "A1B1"


def test_chisq_matches_loop_and_identity():
    grid4 = np.array([[3, 5, 8, 2], [7, 1, 4, 6], [2, 2, 9, 3], [4, 4, 4, 4]])
    res = inf.chisq_test(ContingencyTable(2, 2, grid4.ravel()))
    assert res.stat == pytest.approx(pearson_chisq(grid4.tolist()), rel=1e-12)
    assert res.df == 9
    eq = np.array([[5, 3], [3, 5]])
    stats_ = _table_stats(eq, 1, 1)
    assert inf.chisq_from_symmetry(stats_) == pytest.approx(pearson_chisq(eq.tolist()))


def test_chisq_empty_margin():
    with pytest.raises(EmptyMarginError):
        inf.chisq_test(ContingencyTable(1, 1, [0, 0, 3, 4]))


def test_result_dict_keys():
    stats_ = _table_stats([[6, 10], [10, 6], [6, 10], [9, 7]], 2, 1)
    d = inf.max_bet_from_stats(stats_, KNOWN_CDF).to_dict()
    assert d["strongest"] == "A2B1"
    assert len(d["per_interaction"]) == 3
    assert d["s"] == -14
