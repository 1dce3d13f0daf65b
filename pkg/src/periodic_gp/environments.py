"""Reward sources with an exactly periodic mean, plus a recorded-data replay."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_positive, jittered_cholesky
from .kernels import PeriodicTime, Product, SquaredExponential
from .policies import check_grid

__all__ = [
    "SyntheticPeriodicEnv",
    "ReplayEnv",
    "RewardSample",
    "sample_synthetic",
    "load_replay",
    "query",
    "best_mean",
]

MISSING_MARKERS = {"", "NA"}


@dataclass(frozen=True)
class RewardSample:
    value: float
    step: int
    action: int


def _matrix_sqrt(K):
    L, _ = jittered_cholesky(K)
    return L


@dataclass
class SyntheticPeriodicEnv:
    """Environment whose mean reward ``f(a, t)`` repeats every ``period`` steps.

    ``mean_table[i, j]`` is ``f(grid[j], t)`` for every ``t`` with
    ``(t - 1) % period == i``. Observation noise is keyed by ``(t, j)``:
    two policies that play the same action at the same step see the same
    noisy reward.
    """

    grid: np.ndarray
    period: int
    mean_table: np.ndarray
    noise_variance: float
    noise_seed: int
    _noise_rows: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.mean_table.shape != (self.period, self.grid.shape[0]):
            raise ValueError(
                f"mean_table shape {self.mean_table.shape} does not match "
                f"(period, grid size) = ({self.period}, {self.grid.shape[0]})"
            )
        if not np.all(np.isfinite(self.mean_table)):
            raise ValueError("mean_table contains non-finite values")

    @property
    def n_actions(self):
        return self.grid.shape[0]

    def index_of(self, action):
        """Grid index of ``action``.

        Python/numpy integers are taken as grid indices; anything else must be
        an action vector present on the grid.
        """
        if isinstance(action, (int, np.integer)) and not isinstance(action, bool):
            return _check_index(int(action), self.n_actions)
        a = np.atleast_1d(np.asarray(action, dtype=float))
        hits = np.flatnonzero(np.all(self.grid == a, axis=1))
        if hits.size == 0:
            raise KeyError(f"action {a.tolist()} is not on the grid")
        return int(hits[0])

    def mean(self, index, t):
        _check_step(t)
        return float(self.mean_table[(t - 1) % self.period, index])

    def mean_row(self, t):
        _check_step(t)
        return self.mean_table[(t - 1) % self.period]

    def noise(self, index, t):
        if self.noise_variance == 0:
            return 0.0
        row = self._noise_rows.get(t)
        if row is None:
            rng = np.random.default_rng([self.noise_seed, t])
            row = rng.standard_normal(self.n_actions) * math.sqrt(self.noise_variance)
            self._noise_rows[t] = row
        return float(row[index])

    def query(self, action, t, rng=None):
        """Noisy reward; with ``rng`` the noise is drawn from it instead."""
        j = self.index_of(action)
        f = self.mean(j, t)
        if rng is None:
            eps = self.noise(j, t)
        else:
            eps = rng.normal(0.0, math.sqrt(self.noise_variance))
        return RewardSample(f + eps, t, j)

    def best_mean(self, t):
        row = self.mean_row(t)
        j = int(np.argmax(row))
        return j, float(row[j])


def sample_synthetic(grid, period, kernel=None, noise_variance=1.0, seed=0):
    """Draw an exactly periodic mean table from a zero-mean product-kernel GP.

    Over the full product grid ``times x actions`` the Gram matrix is the
    Kronecker product of the time Gram and the action Gram, so a draw is
    ``L_time @ Z @ L_action.T`` with ``Z`` standard normal.

    Parameters
    ----------
    grid : ndarray of shape (n_actions, d)
    period : int
    kernel : Product, optional
        Defaults to a unit squared-exponential action kernel times a periodic
        time kernel with length scale 10 and the given period.
    noise_variance : float
    seed : int or sequence of int
        Seeds both the mean table and the per-step noise stream.
    """
    grid = check_grid(grid)
    period = check_positive(period, "period", integer=True)
    if noise_variance < 0 or not np.isfinite(noise_variance):
        raise ValueError(f"noise_variance must be finite and >= 0, got {noise_variance}")
    if kernel is None:
        kernel = Product(SquaredExponential(1.0), PeriodicTime(10.0, period))
    if not isinstance(kernel, Product):
        raise TypeError("kernel must be a Product kernel")
    ss = np.random.SeedSequence(seed)
    table_seed, noise_seed = ss.spawn(2)
    rng = np.random.default_rng(table_seed)
    times = np.arange(1, period + 1, dtype=float)
    L_time = _matrix_sqrt(kernel.time_kernel(times))
    L_action = _matrix_sqrt(kernel.action_kernel(grid))
    Z = rng.standard_normal((period, grid.shape[0]))
    mean_table = L_time @ Z @ L_action.T
    return SyntheticPeriodicEnv(
        grid=grid,
        period=period,
        mean_table=mean_table,
        noise_variance=float(noise_variance),
        noise_seed=int(noise_seed.generate_state(1)[0]),
    )


# ---------------------------------------------------------------------------
# replay
# ---------------------------------------------------------------------------


@dataclass
class ReplayEnv:
    """Recorded rewards: one row per step, one column per arm.

    ``reward_table`` holds the values handed to policies (after optional
    standardization); ``raw_table`` keeps the recorded units and is what
    regret is measured in. With standardization off the two coincide.
    """

    arm_names: list
    raw_table: np.ndarray
    reward_table: np.ndarray
    shift: np.ndarray
    scale: np.ndarray
    times: list

    @property
    def n_actions(self):
        return self.raw_table.shape[1]

    @property
    def n_steps(self):
        return self.raw_table.shape[0]

    def _row(self, t):
        _check_step(t)
        if t > self.n_steps:
            raise IndexError(f"step {t} beyond the {self.n_steps} recorded steps")
        return t - 1

    def index_of(self, action):
        a = np.atleast_1d(np.asarray(action))
        if a.size != 1:
            raise KeyError(f"replay actions are arm indices, got {a.tolist()}")
        return _check_index(int(a[0]), self.n_actions)

    def mean(self, index, t):
        return float(self.raw_table[self._row(t), index])

    def mean_row(self, t):
        return self.raw_table[self._row(t)]

    def query(self, action, t, rng=None):
        j = self.index_of(action)
        return RewardSample(float(self.reward_table[self._row(t), j]), t, j)

    def best_mean(self, t):
        row = self.mean_row(t)
        j = int(np.argmax(row))
        return j, float(row[j])


def _parse_cell(text, row, col):
    text = text.strip()
    if text in MISSING_MARKERS:
        return np.nan
    try:
        value = float(text)
    except ValueError:
        raise ValueError(f"row {row}, column {col}: non-numeric cell {text!r}") from None
    if not np.isfinite(value):
        raise ValueError(f"row {row}, column {col}: non-finite cell {text!r}")
    return value


def _impute(table):
    """Carry the last observation forward per arm; leading gaps get the arm mean."""
    table = table.copy()
    for j in range(table.shape[1]):
        col = table[:, j]
        observed = ~np.isnan(col)
        if not observed.any():
            raise ValueError(f"arm column {j} has no observed values")
        fill = col[observed].mean()
        last = np.nan
        for i in range(col.shape[0]):
            if np.isnan(col[i]):
                col[i] = fill if np.isnan(last) else last
            else:
                last = col[i]
    return table


def load_replay(path, standardize="none", warmup=48):
    """Load a replay CSV.

    The header is ``time,<arm_1>,...,<arm_m>``; each following row holds a
    time stamp (used for ordering only, so rows are kept in file order) and
    ``m`` rewards. Empty fields and ``NA`` mark missing values.

    ``standardize`` is ``"none"``, ``"global"`` (one shift and scale over
    all warm-up cells, which keeps arm rankings) or ``"per-arm"`` (each
    column centred and scaled by its own warm-up statistics).
    """
    if standardize not in ("none", "global", "per-arm"):
        raise ValueError(f"unknown standardization {standardize!r}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[0].lower() != "time" or any(not h for h in header[1:]):
        raise ValueError(f"{path}: malformed header {rows[0]!r}")
    arms = header[1:]
    if len(arms) < 2:
        raise ValueError(f"{path}: need at least 2 arms, found {len(arms)}")
    if len(set(arms)) != len(arms):
        raise ValueError(f"{path}: duplicate arm names in header")
    times, values = [], []
    for i, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise ValueError(f"{path}: row {i} has {len(row)} fields, expected {len(header)}")
        times.append(row[0].strip())
        values.append([_parse_cell(c, i, k) for k, c in enumerate(row[1:], start=2)])
    if not values:
        raise ValueError(f"{path}: no data rows")
    raw = _impute(np.array(values, dtype=float))

    n_warm = min(int(warmup), raw.shape[0]) if warmup else raw.shape[0]
    window = raw[:n_warm]
    m = raw.shape[1]
    if standardize == "global":
        shift = np.full(m, window.mean())
        scale = np.full(m, window.std())
    elif standardize == "per-arm":
        shift = window.mean(axis=0)
        scale = window.std(axis=0)
    else:
        shift, scale = np.zeros(m), np.ones(m)
    scale = np.where(scale > 0, scale, 1.0)
    rewards = (raw - shift) / scale if standardize != "none" else raw.copy()
    return ReplayEnv(arms, raw, rewards, shift, scale, times)


# ---------------------------------------------------------------------------
# functional interface
# ---------------------------------------------------------------------------


def query(env, action, t, rng=None):
    return env.query(action, t, rng)


def best_mean(env, t):
    return env.best_mean(t)


def _check_step(t):
    if int(t) != t or t < 1:
        raise ValueError(f"time step must be a positive integer, got {t!r}")


def _check_index(j, n):
    if not 0 <= j < n:
        raise KeyError(f"arm index {j} out of range [0, {n})")
    return j
