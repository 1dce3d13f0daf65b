import math

import numpy as np
import pytest

from periodic_gp import ScheduleDomainError

from periodic_gp.analysis import (
    InfoGainReport,
    RegretTrace,
    bound_dominance,
    greedy_gamma,
    info_gain_logdet,
    rank_estimate,
    rearrangement_check,
    regret_bound_constant,
    regret_bound_curve,
    regret_trace,
    theorem2_bound,
)
from periodic_gp.environments import SyntheticPeriodicEnv, sample_synthetic
from periodic_gp.kernels import Matern, PeriodicTime, Product, SquaredExponential
from periodic_gp.policies import Empirical, FiniteArm, uniform_grid

GRID = uniform_grid(10.0, 21)


def small_env():
    grid = np.array([[0.0], [1.0], [2.0]])
    table = np.array([[3.0, 7.0, 5.0], [1.0, 0.0, 2.0]])
    return SyntheticPeriodicEnv(grid, 2, table, 0.0, 0)


# -- regret -------------------------------------------------------------------


def test_regret_trace_by_hand():
    tr = regret_trace(small_env(), [0, 0, 1, 2], policy="x")
    np.testing.assert_array_equal(tr.instantaneous, [4.0, 1.0, 0.0, 0.0])
    np.testing.assert_array_equal(tr.cumulative, [4.0, 5.0, 5.0, 5.0])
    assert tr.total == 5.0 and tr.policy == "x"


def test_regret_trace_offset_start():
    tr = regret_trace(small_env(), [2], start=2)
    assert tr.total == 0.0


def test_regret_trace_accepts_vectors():
    tr = regret_trace(small_env(), [[1.0], [2.0]])
    np.testing.assert_array_equal(tr.instantaneous, [0.0, 0.0])


def test_regret_never_negative():
    env = sample_synthetic(GRID, 7, seed=3)
    rng = np.random.default_rng(0)
    tr = regret_trace(env, list(rng.integers(0, 21, 50)))
    assert np.all(tr.instantaneous >= 0)
    assert np.all(np.diff(tr.cumulative) >= 0)


def test_regret_length_mismatch():
    with pytest.raises(ValueError):
        regret_trace(small_env(), [0, 1], T=3)


# -- log-determinant gain ---------------------------------------------------


def test_logdet_examples():
    assert info_gain_logdet([[1.0]], 1.0) == pytest.approx(0.34657359027997265, abs=1e-15)
    assert info_gain_logdet(np.zeros((3, 3)), 1.0) == 0.0
    assert info_gain_logdet(np.eye(4), 1.0) == pytest.approx(2 * math.log(2), abs=1e-14)
    assert info_gain_logdet(np.ones((2, 2)), 1.0) == pytest.approx(0.5 * math.log(3), abs=1e-14)


def test_logdet_rejects_asymmetric():
    with pytest.raises(ValueError):
        info_gain_logdet([[1.0, 0.5], [0.0, 1.0]], 1.0)


# -- rearrangement check ------------------------------------------------------


def random_pairs(rng, T, box=5.0):
    return np.column_stack([rng.uniform(-box, box, T), np.arange(1, T + 1)])


def test_period_one_zero_slack(rng):
    X = random_pairs(rng, 10)
    k = Product(SquaredExponential(1.0), PeriodicTime(10.0, 1))
    rep = rearrangement_check(X, k, 1.0, 1)
    assert abs(rep.bound_slack) < 1e-9


def test_independent_phases_zero_slack(rng):
    X = random_pairs(rng, 4)
    k = Product(SquaredExponential(1.0), PeriodicTime(0.05, 2))
    rep = rearrangement_check(X, k, 1.0, 2)
    assert abs(rep.bound_slack) < 1e-6


def test_slack_nonnegative_random_draws():
    rng = np.random.default_rng(77)
    for _ in range(100):
        k = Product(Matern(1.5, rng.uniform(0.2, 3)), PeriodicTime(rng.uniform(0.3, 10), 3))
        rep = rearrangement_check(random_pairs(rng, 12), k, rng.uniform(0.1, 2), 3)
        assert rep.bound_slack >= -1e-9
        assert len(rep.phase_gains) == 3


@pytest.mark.parametrize("bad_times", [[1, 2, 4, 3], [0, 1, 2, 3]])
def test_rearrangement_needs_ordered_times(bad_times):
    X = np.column_stack([np.zeros(4), bad_times])
    with pytest.raises(ValueError):
        rearrangement_check(X, Product(SquaredExponential(), PeriodicTime(1.0, 2)), 1.0, 2)


def test_rearrangement_needs_whole_periods(rng):
    with pytest.raises(ValueError):
        rearrangement_check(random_pairs(rng, 5), Product(SquaredExponential(), PeriodicTime(1.0, 2)), 1.0, 2)


def test_report_slack():
    assert InfoGainReport(1.0, [0.4, 0.8]).bound_slack == pytest.approx(0.2)


# -- greedy gain --------------------------------------------------------------


def test_greedy_budget_one():
    assert greedy_gamma(SquaredExponential(), GRID, 1, 1.0) == pytest.approx(0.5 * math.log(2))


def test_greedy_full_budget_matches_logdet():
    cand = uniform_grid(4.0, 7)
    full = info_gain_logdet(SquaredExponential()(cand), 0.5)
    assert greedy_gamma(SquaredExponential(), cand, 7, 0.5) == pytest.approx(full, abs=1e-10)


def test_greedy_beats_random_subsets():
    rng = np.random.default_rng(5)
    k = SquaredExponential(1.0)
    g = greedy_gamma(k, GRID, 5, 1.0)
    for _ in range(50):
        idx = rng.choice(len(GRID), 5, replace=False)
        assert g >= info_gain_logdet(k(GRID[idx]), 1.0) - 1e-12


def test_greedy_monotone_in_budget():
    values = [greedy_gamma(SquaredExponential(), GRID, b, 1.0) for b in range(0, 8)]
    assert values[0] == 0.0
    assert all(b >= a for a, b in zip(values, values[1:]))


def test_greedy_bad_budget():
    with pytest.raises(ValueError):
        greedy_gamma(SquaredExponential(), GRID, 22, 1.0)


# -- bounds -------------------------------------------------------------------


def test_period_gain_bound():
    assert theorem2_bound(1.5, 4) == 6.0
    with pytest.raises(ValueError):
        theorem2_bound(-1.0, 4)


def test_bound_constant():
    assert regret_bound_constant(1.0) == pytest.approx(11.541560327111707, rel=1e-14)


def test_bound_curve():
    zero = regret_bound_curve(5, FiniteArm(21), 0.0, 1.0)
    assert zero == [pytest.approx(1.6449340668482264, abs=1e-15)] * 5
    curve = regret_bound_curve(50, FiniteArm(21), 2.0, 1.0)
    assert all(b > a for a, b in zip(curve, curve[1:]))
    t = 10
    expected = math.sqrt(11.541560327111707 * t * FiniteArm(21)(t) * 2.0) + math.pi**2 / 6
    assert curve[t - 1] == pytest.approx(expected, rel=1e-14)


def test_rank_estimate():
    assert rank_estimate(np.eye(5)) == 5
    assert rank_estimate(np.ones((4, 4))) == 1
    assert rank_estimate(np.zeros((3, 3))) == 0
    t = np.arange(1, 61, dtype=float)
    assert rank_estimate(PeriodicTime(2.0, 5)(t)) == 5


def test_bound_dominance():
    a = RegretTrace(np.array([1.0, 1.0]), np.array([1.0, 2.0]))
    b = RegretTrace(np.array([3.0, 0.0]), np.array([3.0, 3.0]))
    assert bound_dominance([a, b], [2.5, 2.5]) == 0.5
    assert math.isnan(bound_dominance([], [1.0]))


def test_empirical_bound_curve_starts_at_valid_step():
    with pytest.raises(ScheduleDomainError):
        regret_bound_curve(3, Empirical(), 1.0, 1.0)
