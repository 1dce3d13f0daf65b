"""Gaussian-process UCB bandits for environments with periodic rewards."""

__version__ = "0.1.0"

from .analysis import info_gain_logdet, rearrangement_check, regret_trace  # noqa: E402
from ._validation import NumericalDegeneracyError, ScheduleDomainError  # noqa: E402
from .environments import ReplayEnv, SyntheticPeriodicEnv, load_replay, sample_synthetic  # noqa: E402
from .gp import IncrementalGPRegressor  # noqa: E402
from .kernels import (  # noqa: E402
    ActionOnly,
    DecayTime,
    Linear,
    Matern,
    PeriodicTime,
    Product,
    SquaredExponential,
    SquaredExponentialTime,
)
from .policies import (  # noqa: E402
    GPUCB,
    ContextualGPUCB,
    ContinuousBox,
    Empirical,
    FiniteArm,
    PeriodicGPUCB,
    ResettingGPUCB,
    TimeVaryingGPUCB,
    uniform_grid,
)

__all__ = [
    "NumericalDegeneracyError",
    "ScheduleDomainError",
    "IncrementalGPRegressor",
    "ActionOnly",
    "DecayTime",
    "Linear",
    "Matern",
    "PeriodicTime",
    "Product",
    "SquaredExponential",
    "SquaredExponentialTime",
    "GPUCB",
    "ContextualGPUCB",
    "ContinuousBox",
    "Empirical",
    "FiniteArm",
    "PeriodicGPUCB",
    "ResettingGPUCB",
    "TimeVaryingGPUCB",
    "uniform_grid",
    "SyntheticPeriodicEnv",
    "ReplayEnv",
    "sample_synthetic",
    "load_replay",
    "regret_trace",
    "info_gain_logdet",
    "rearrangement_check",
]
