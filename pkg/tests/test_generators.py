import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from bet.errors import UnknownScenario
from bet.expansion import SampleSet, binary_expand, known_cdf_copula, uniform_cdf
from bet.generators import (SCENARIOS, ScenarioSpec, gamma_d, sample_bex, sample_null,
                            sample_scenario, substream)
from bet.interactions import InteractionIndex, contingency, symmetry_from_table


def _gamma_loop(x, y, d):
    half = 2.0 ** -d
    centres = [(i - 0.5) / 2 ** (d - 1) for i in range(1, 2 ** (d - 1) + 1)]
    total = 0.0
    for ci in centres:
        for cj in centres:
            if abs(x - ci) <= half and abs(y - cj) <= half:
                total += abs(x - ci) - abs(y - cj)
    return total


def test_gamma_known_value():
    assert gamma_d(0.5, 0.25, 1) == pytest.approx(-0.25)


def test_gamma_matches_double_loop():
    rng = np.random.default_rng(0)
    pts = rng.random((50, 2))
    for d in (1, 2, 3):
        got = gamma_d(pts[:, 0], pts[:, 1], d)
        ref = [_gamma_loop(x, y, d) for x, y in pts]
        assert_allclose(got, ref, atol=1e-15)


@pytest.mark.parametrize("level", [1, 2, 3])
def test_bex_points_on_zero_set(level):
    s = sample_bex(level, 200, seed=level)
    assert_allclose(gamma_d(s.x, s.y, level), 0.0, atol=1e-12)
    assert np.all((s.x >= 0) & (s.x <= 1) & (s.y >= 0) & (s.y <= 1))


@pytest.mark.parametrize("level", [1, 2, 3, 4])
def test_bex_all_positive_for_its_interaction(level):
    s = sample_bex(level, 300, seed=10 + level)
    cop = known_cdf_copula(SampleSet(1.0 - s.x, 1.0 - s.y), uniform_cdf, uniform_cdf)
    depth = level + 1
    bu, bv = binary_expand(cop, depth)
    a = tuple(int(k in (level, level + 1)) for k in range(1, depth + 1))
    idx = InteractionIndex(a, a)
    assert symmetry_from_table(contingency(bu, bv, depth, depth))[idx] == 300


def test_substream_is_keyed_and_reproducible():
    a = substream(7, 1, 2, 3).random(4)
    assert_array_equal(a, substream(7, 1, 2, 3).random(4))
    assert not np.array_equal(a, substream(7, 1, 2, 4).random(4))
    assert not np.array_equal(a, substream(8, 1, 2, 3).random(4))


@pytest.mark.parametrize("name", SCENARIOS)
def test_scenarios_reproducible(name):
    spec = ScenarioSpec(name, 3)
    a = sample_scenario(spec, 64, seed=11)
    b = sample_scenario(spec, 64, seed=11)
    assert a.n == 64
    assert_array_equal(a.x, b.x)
    assert_array_equal(a.y, b.y)


def test_noise_scale():
    assert ScenarioSpec("linear", 4).sigma == pytest.approx(0.1)
    s = sample_scenario(ScenarioSpec("linear", 10), 20000, seed=1)
    # y - x = 6 * N(0, sigma) with sigma = 0.25
    assert np.std(s.y - s.x) == pytest.approx(1.5, rel=0.03)


def test_local_scenario_structure():
    s = sample_scenario(ScenarioSpec("local", 1), 5000, seed=2)
    near = np.abs(s.y - s.x) < 0.075
    # about 0.085 of points would fall this close to the diagonal under independence
    assert near.mean() > 0.15
    outside = (s.x < 0) | (s.x > 1)
    assert near[outside].mean() < 0.1


def test_scenario_validation():
    with pytest.raises(UnknownScenario):
        ScenarioSpec("spiral", 1)
    with pytest.raises(ValueError):
        ScenarioSpec("linear", 11)


def test_null_is_uniform():
    s = sample_null(4000, seed=3)
    assert abs(s.x.mean() - 0.5) < 0.02
    assert abs(np.corrcoef(s.x, s.y)[0, 1]) < 0.05
