"""UCB action-selection policies over a finite action grid.

Every policy is a scikit-learn style estimator: constructor arguments are
plain parameters (``get_params``/``set_params``/``clone`` work), and the
learned state lives in trailing-underscore attributes created by ``reset``.
A run alternates ``select_action(t, grid)`` and ``update(t, action, reward)``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import (
    ScheduleDomainError,
    check_actions,
    check_positive,
    check_unit_interval,
    make_pairs,
)
from .gp import IncrementalGPRegressor
from .kernels import (
    ActionOnly,
    DecayTime,
    Linear,
    PeriodicTime,
    Product,
    SquaredExponential,
    SquaredExponentialTime,
)

__all__ = [
    "FiniteArm",
    "ContinuousBox",
    "Empirical",
    "beta",
    "uniform_grid",
    "check_grid",
    "GPUCB",
    "PeriodicGPUCB",
    "ContextualGPUCB",
    "ResettingGPUCB",
    "TimeVaryingGPUCB",
    "OraclePolicy",
    "POLICY_CLASSES",
]


# ---------------------------------------------------------------------------
# exploration schedules
# ---------------------------------------------------------------------------


def _check_step(t):
    if t < 1:
        raise ScheduleDomainError(f"time step must be >= 1, got {t}")


@dataclass(frozen=True)
class FiniteArm:
    """``beta_t = 2 log(n_arms * t^2 * pi^2 / (6 delta))``."""

    arm_count: int
    delta: float = 0.1
    theoretical = True

    def __post_init__(self):
        check_positive(self.arm_count, "arm_count", integer=True)
        check_unit_interval(self.delta, "delta")

    def __call__(self, t):
        _check_step(t)
        return 2.0 * math.log(self.arm_count * t * t * math.pi**2 / (6.0 * self.delta))

    def get_params(self, deep=True):
        return asdict(self)


@dataclass(frozen=True)
class ContinuousBox:
    """Schedule for a compact convex action set inside ``[-v/2, v/2]^d``."""

    d: int = 1
    v: float = 10.0
    delta: float = 0.1
    c1: float = 1.0
    c2: float = 1.0
    theoretical = True

    def __post_init__(self):
        check_positive(self.d, "d", integer=True)
        check_positive(self.v, "v")
        check_unit_interval(self.delta, "delta")
        check_positive(self.c1, "c1")
        check_positive(self.c2, "c2")

    def __call__(self, t):
        _check_step(t)
        d, tt = self.d, float(t) * t
        inner = math.log(self.c1 * d * math.pi**2 * tt / (3.0 * self.delta))
        if inner <= 0:
            raise ScheduleDomainError("c1 * d * pi^2 t^2 / (3 delta) must exceed 1")
        value = 2.0 * math.log(math.pi**2 * tt / (3.0 * self.delta)) + 2.0 * d * math.log(
            self.c2 * self.v * d * tt * math.sqrt(inner)
        )
        if not value > 0:
            raise ScheduleDomainError(f"schedule is non-positive at t={t}: {value}")
        return value

    def get_params(self, deep=True):
        return asdict(self)


@dataclass(frozen=True)
class Empirical:
    """Hand-tuned schedule ``beta_t = a * log(b * t)``; defined once ``b t > 1``."""

    a: float = 0.8
    b: float = 0.4
    theoretical = False

    def __post_init__(self):
        check_positive(self.a, "a")
        check_positive(self.b, "b")

    @property
    def first_valid_step(self):
        """Smallest integer ``t`` with ``b * t > 1``."""
        return math.floor(1.0 / self.b) + 1

    def __call__(self, t):
        _check_step(t)
        if self.b * t <= 1.0:
            raise ScheduleDomainError(
                f"empirical schedule needs b*t > 1, got b={self.b}, t={t}"
            )
        return self.a * math.log(self.b * t)

    def get_params(self, deep=True):
        return asdict(self)


def beta(schedule, t):
    return schedule(t)


# ---------------------------------------------------------------------------
# action grids
# ---------------------------------------------------------------------------


def uniform_grid(box_width=10.0, points=101, d=1):
    """Regular grid over ``[-box_width/2, box_width/2]^d`` in lexicographic order."""
    check_positive(box_width, "box_width")
    check_positive(points, "points", integer=True)
    check_positive(d, "d", integer=True)
    axis = np.linspace(-box_width / 2.0, box_width / 2.0, points)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def check_grid(grid):
    grid = check_actions(grid, name="action grid")
    if np.unique(grid, axis=0).shape[0] != grid.shape[0]:
        raise ValueError("action grid contains duplicate actions")
    return grid


# ---------------------------------------------------------------------------
# policies
# ---------------------------------------------------------------------------


class _UCBPolicy(BaseEstimator):
    """Shared machinery; subclasses provide ``_pair_kernel``."""

    def _pair_kernel(self):
        raise NotImplementedError

    def reset(self):
        kernel = self._pair_kernel()
        if self.exploration not in ("sqrt", "inverse_sqrt"):
            raise ValueError(
                f"exploration must be 'sqrt' or 'inverse_sqrt', got {self.exploration!r}"
            )
        if isinstance(self.action_kernel, Linear) and getattr(
            self.beta_schedule, "theoretical", False
        ):
            warnings.warn(
                "Linear action kernel has unbounded prior variance; the "
                "theoretical beta schedule assumes k <= 1",
                stacklevel=2,
            )
        self.gp_ = IncrementalGPRegressor(kernel, self.noise_variance).reset()
        self.current_step_ = 1
        return self

    def _ensure_state(self):
        if not hasattr(self, "gp_"):
            self.reset()

    def beta_t(self, t):
        """Exploration weight used at step ``t``.

        The empirical schedule is undefined for the first few steps; there
        the value at its first valid step is used instead.
        """
        first = getattr(self.beta_schedule, "first_valid_step", 1)
        return self.beta_schedule(max(t, first))

    def ucb_scores(self, t, grid):
        """``mean + w * std`` at every grid action paired with time ``t``."""
        self._ensure_state()
        b = self.beta_t(t)
        weight = math.sqrt(b) if self.exploration == "sqrt" else 1.0 / math.sqrt(b)
        mean, var = self.gp_.predict_mean_var(make_pairs(grid, t))
        return mean + weight * np.sqrt(var)

    def select_index(self, t, grid):
        self._ensure_state()
        if t < self.current_step_:
            raise ValueError(f"step {t} precedes current step {self.current_step_}")
        return int(np.argmax(self.ucb_scores(t, grid)))

    def select_action(self, t, grid):
        grid = check_actions(grid, name="action grid")
        return grid[self.select_index(t, grid)]

    def update(self, t, action, reward):
        """Absorb the reward observed for ``action`` at step ``t``."""
        self._ensure_state()
        action = np.atleast_1d(np.asarray(action, dtype=float))
        self.gp_.observe(np.append(action, float(t)), reward)
        self.current_step_ = int(t) + 1
        return self

    step = update

    def warm_start(self, actions, times, rewards):
        """Pre-load ``(action, time, reward)`` triples before a run."""
        actions = check_actions(actions)
        for a, t, r in zip(actions, times, rewards):
            self.update(t, a, r)
        return self


class GPUCB(_UCBPolicy):
    """Stationary GP-UCB: the kernel ignores time."""

    def __init__(self, action_kernel=SquaredExponential(1.0), beta_schedule=Empirical(),
                 noise_variance=1.0, exploration="sqrt"):
        self.action_kernel = action_kernel
        self.beta_schedule = beta_schedule
        self.noise_variance = noise_variance
        self.exploration = exploration

    def _pair_kernel(self):
        return ActionOnly(self.action_kernel)


class PeriodicGPUCB(_UCBPolicy):
    """GP-UCB with a periodic kernel over time multiplying the action kernel.

    Parameters
    ----------
    action_kernel : Kernel
    beta_schedule : FiniteArm, ContinuousBox or Empirical
    noise_variance : float
    period : int
        Assumed period of the environment, in steps.
    time_length_scale : float
        Length scale of the periodic time kernel.
    kernel_form : {"standard", "double"}
        ``"double"`` uses ``sin^2(pi lag / (2 period))``; comparison only.
    exploration : {"sqrt", "inverse_sqrt"}
        Multiplier of the posterior std: ``sqrt(beta_t)`` or ``beta_t ** -0.5``.
    """

    def __init__(self, action_kernel=SquaredExponential(1.0), beta_schedule=Empirical(),
                 noise_variance=1.0, period=20, time_length_scale=10.0,
                 kernel_form="standard", exploration="sqrt"):
        self.action_kernel = action_kernel
        self.beta_schedule = beta_schedule
        self.noise_variance = noise_variance
        self.period = period
        self.time_length_scale = time_length_scale
        self.kernel_form = kernel_form
        self.exploration = exploration

    def _pair_kernel(self):
        return Product(
            self.action_kernel,
            PeriodicTime(self.time_length_scale, self.period, self.kernel_form),
        )


class ContextualGPUCB(_UCBPolicy):
    """Contextual GP-UCB with the raw time step as context (SE kernel on time)."""

    def __init__(self, action_kernel=SquaredExponential(1.0), beta_schedule=Empirical(),
                 noise_variance=1.0, time_length_scale=10.0, exploration="sqrt"):
        self.action_kernel = action_kernel
        self.beta_schedule = beta_schedule
        self.noise_variance = noise_variance
        self.time_length_scale = time_length_scale
        self.exploration = exploration

    def _pair_kernel(self):
        return Product(self.action_kernel, SquaredExponentialTime(self.time_length_scale))


class ResettingGPUCB(_UCBPolicy):
    """GP-UCB that forgets its history every ``block_size`` steps.

    The reset happens right after absorbing step ``t`` whenever
    ``(t - reset_phase) % block_size == 0``.
    """

    def __init__(self, action_kernel=SquaredExponential(1.0), beta_schedule=Empirical(),
                 noise_variance=1.0, block_size=15, reset_phase=0, exploration="sqrt"):
        self.action_kernel = action_kernel
        self.beta_schedule = beta_schedule
        self.noise_variance = noise_variance
        self.block_size = block_size
        self.reset_phase = reset_phase
        self.exploration = exploration

    def _pair_kernel(self):
        check_positive(self.block_size, "block_size", integer=True)
        return ActionOnly(self.action_kernel)

    def update(self, t, action, reward):
        super().update(t, action, reward)
        if (int(t) - self.reset_phase) % self.block_size == 0:
            self.gp_.reset()
        return self

    step = update


class TimeVaryingGPUCB(_UCBPolicy):
    """GP-UCB whose kernel decays as ``(1 - epsilon) ** (|t - t'| / 2)``."""

    def __init__(self, action_kernel=SquaredExponential(1.0), beta_schedule=Empirical(),
                 noise_variance=1.0, epsilon=0.01, exploration="sqrt"):
        self.action_kernel = action_kernel
        self.beta_schedule = beta_schedule
        self.noise_variance = noise_variance
        self.epsilon = epsilon
        self.exploration = exploration

    def _pair_kernel(self):
        return Product(self.action_kernel, DecayTime(self.epsilon))


class OraclePolicy(BaseEstimator):
    """Plays the environment's best action every step (zero regret reference)."""

    def __init__(self, env=None):
        self.env = env

    def reset(self):
        self.current_step_ = 1
        return self

    def select_index(self, t, grid):
        return int(self.env.best_mean(t)[0])

    def select_action(self, t, grid):
        return np.asarray(grid)[self.select_index(t, grid)]

    def update(self, t, action, reward):
        self.current_step_ = int(t) + 1
        return self

    step = update

    def warm_start(self, actions, times, rewards):
        return self


POLICY_CLASSES = {
    "periodic": PeriodicGPUCB,
    "gp": GPUCB,
    "contextual": ContextualGPUCB,
    "resetting": ResettingGPUCB,
    "time_varying": TimeVaryingGPUCB,
    "oracle": OraclePolicy,
}
