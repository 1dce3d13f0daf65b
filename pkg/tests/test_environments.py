from pathlib import Path

import numpy as np
import pytest

from periodic_gp.environments import (
    ReplayEnv,
    SyntheticPeriodicEnv,
    best_mean,
    load_replay,
    query,
    sample_synthetic,
)
from periodic_gp.kernels import PeriodicTime, Product, SquaredExponential
from periodic_gp.policies import uniform_grid

DATA = Path(__file__).parent / "data"
GRID = uniform_grid(10.0, 101)


def write_csv(tmp_path, text, name="r.csv"):
    path = tmp_path / name
    path.write_text(text)
    return path


# -- synthetic ----------------------------------------------------------------


@pytest.mark.parametrize("period", [1, 3, 20, 24])
def test_mean_is_periodic(period):
    env = sample_synthetic(GRID, period, seed=5)
    for j in (0, 37, 100):
        for t in range(1, 60):
            assert env.mean(j, t) == env.mean(j, t + period)
            assert env.mean(j, t) == env.mean(j, t + 3 * period)


def test_period_one_has_single_row():
    env = sample_synthetic(GRID, 1, seed=0)
    assert env.mean_table.shape == (1, 101)
    np.testing.assert_array_equal(env.mean_row(1), env.mean_row(17))


def test_marginal_variance_near_one():
    grid = uniform_grid(10.0, 11)
    sq = [np.mean(sample_synthetic(grid, 6, noise_variance=0.0, seed=s).mean_table ** 2)
          for s in range(200)]
    assert abs(np.mean(sq) - 1.0) < 0.15


def test_noiseless_query_equals_mean():
    env = sample_synthetic(GRID, 5, noise_variance=0.0, seed=3)
    for t in (1, 4, 9):
        r = query(env, 12, t)
        assert r.value == env.mean(12, t) and r.step == t and r.action == 12


def test_noise_has_right_moments():
    env = sample_synthetic(GRID, 5, noise_variance=1.0, seed=3)
    rng = np.random.default_rng(0)
    draws = np.array([env.query(40, 2, rng).value for _ in range(100_000)])
    assert abs(draws.mean() - env.mean(40, 2)) < 0.02
    assert abs(draws.var() - 1.0) < 0.02


def test_keyed_noise_is_reproducible():
    env = sample_synthetic(GRID, 5, seed=8)
    other = sample_synthetic(GRID, 5, seed=8)
    assert env.query(3, 7).value == other.query(3, 7).value
    assert env.query(3, 7).value == env.query([GRID[3, 0]], 7).value
    assert env.query(3, 7).value != env.query(3, 8).value


def test_seeds_give_distinct_tables():
    a = sample_synthetic(GRID, 5, seed=1).mean_table
    b = sample_synthetic(GRID, 5, seed=2).mean_table
    np.testing.assert_array_equal(a, sample_synthetic(GRID, 5, seed=1).mean_table)
    assert not np.array_equal(a, b)


def test_custom_kernel_and_smoothness():
    k = Product(SquaredExponential(3.0), PeriodicTime(1.0, 4))
    env = sample_synthetic(GRID, 4, kernel=k, seed=0)
    # a long action length scale makes neighbouring grid values close
    assert np.max(np.abs(np.diff(env.mean_table, axis=1))) < 0.2


def test_best_mean_ties_low_index():
    env = SyntheticPeriodicEnv(np.array([[0.0], [1.0], [2.0]]), 1,
                               np.array([[3.0, 7.0, 7.0]]), 0.0, 0)
    assert best_mean(env, 1) == (1, 7.0)


def test_best_mean_example():
    env = SyntheticPeriodicEnv(np.array([[0.0], [1.0], [2.0]]), 1,
                               np.array([[3.0, 7.0, 5.0]]), 0.0, 0)
    assert env.best_mean(4) == (1, 7.0)


@pytest.mark.parametrize("bad", [0, -2, 1.5])
def test_bad_steps(bad):
    env = sample_synthetic(GRID, 3, seed=0)
    with pytest.raises(ValueError):
        env.mean(0, bad)


def test_off_grid_action():
    env = sample_synthetic(GRID, 3, seed=0)
    with pytest.raises(KeyError):
        env.query([0.05], 1)
    with pytest.raises(KeyError):
        env.query(101, 1)


def test_bad_construction():
    with pytest.raises(ValueError):
        SyntheticPeriodicEnv(np.zeros((3, 1)), 2, np.zeros((3, 3)), 1.0, 0)
    with pytest.raises(ValueError):
        sample_synthetic(GRID, 0)
    with pytest.raises(ValueError):
        sample_synthetic(np.array([[0.0], [0.0]]), 2)


# -- replay -------------------------------------------------------------------


def test_replay_lookup_and_regret_units(tmp_path):
    path = write_csv(tmp_path, "time,a,b\n1,1,4\n2,6,2\n3,3,3\n")
    env = load_replay(path, standardize="none")
    assert isinstance(env, ReplayEnv)
    assert env.query(0, 2).value == 6.0
    assert env.best_mean(1) == (1, 4.0)
    assert env.best_mean(3) == (0, 3.0)
    with pytest.raises(IndexError):
        env.query(0, 4)


def test_toy_fixture():
    env = load_replay(DATA / "toy_replay.csv")
    assert env.arm_names == ["north", "centre", "south"]
    assert env.n_steps == 10
    assert all(env.best_mean(t)[0] == 2 for t in range(1, 11))


def test_carry_forward_and_leading_mean(tmp_path):
    path = write_csv(tmp_path, "time,a,b\n1,,1\n2,2,NA\n3,4,3\n4,NA,\n")
    raw = load_replay(path).raw_table
    np.testing.assert_array_equal(raw[:, 0], [3.0, 2.0, 4.0, 4.0])
    np.testing.assert_array_equal(raw[:, 1], [1.0, 1.0, 3.0, 3.0])


def test_per_arm_standardization(tmp_path):
    rng = np.random.default_rng(1)
    body = "\n".join(f"{i},{a:.6f},{b:.6f}" for i, (a, b) in
                     enumerate(rng.normal([5.0, -2.0], [2.0, 0.5], size=(30, 2)), 1))
    path = write_csv(tmp_path, "time,x,y\n" + body + "\n")
    env = load_replay(path, standardize="per-arm", warmup=30)
    np.testing.assert_allclose(env.reward_table.mean(axis=0), 0.0, atol=1e-12)
    np.testing.assert_allclose(env.reward_table.std(axis=0), 1.0, atol=1e-12)
    np.testing.assert_array_equal(env.mean_row(3), env.raw_table[2])


def test_global_standardization_keeps_ranking(tmp_path):
    path = write_csv(tmp_path, "time,a,b\n1,1,4\n2,6,2\n3,3,3\n")
    env = load_replay(path, standardize="global", warmup=3)
    np.testing.assert_array_equal(np.argmax(env.reward_table, axis=1), [1, 0, 0])
    assert abs(env.reward_table.mean()) < 1e-12


def test_warmup_window_only(tmp_path):
    path = write_csv(tmp_path, "time,a,b\n1,0,2\n2,2,0\n3,100,100\n")
    env = load_replay(path, standardize="global", warmup=2)
    assert env.shift[0] == 1.0 and env.scale[0] == 1.0


@pytest.mark.parametrize("text", [
    "",
    "when,a,b\n1,1,2\n",
    "time,a\n1,1\n",
    "time,a,a\n1,1,2\n",
    "time,a,b\n1,1\n",
    "time,a,b\n1,x,2\n",
    "time,a,b\n1,inf,2\n",
    "time,a,b\n1,NA,2\n2,NA,3\n",
    "time,a,b\n",
])
def test_malformed_replay(tmp_path, text):
    with pytest.raises(ValueError):
        load_replay(write_csv(tmp_path, text))


def test_unknown_standardization():
    with pytest.raises(ValueError):
        load_replay(DATA / "toy_replay.csv", standardize="minmax")
