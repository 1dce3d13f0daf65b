"""Covariance functions over actions, time indices and action-time pairs.

Three kinds of kernel live here:

* action kernels (``SquaredExponential``, ``Matern``, ``Linear``) act on
  arrays of shape ``(n, d)``;
* time kernels (``PeriodicTime``, ``DecayTime``, ``SquaredExponentialTime``)
  act on 1-D arrays of integer time steps;
* pair kernels (``Product`` and ``ActionOnly``) act on action-time pairs laid
  out as rows ``[a_1, ..., a_d, t]``.

Every kernel is a frozen dataclass; calling it returns a Gram matrix, so
``k(X)`` is the square Gram of ``X`` and ``k(X, Y)`` the cross-covariance.
All pairwise quantities are formed from explicit coordinate differences, never
from ``|x|^2 + |y|^2 - 2 x.y``, so ``k(x, y) == k(y, x)`` holds bit-for-bit.
"""
from __future__ import annotations

from dataclasses import dataclass, fields
from typing import ClassVar

import numpy as np

from ._validation import (
    check_actions,
    check_pairs,
    check_positive,
    check_times,
    check_unit_interval,
)

__all__ = [
    "Kernel",
    "SquaredExponential",
    "Matern",
    "Linear",
    "PeriodicTime",
    "DecayTime",
    "SquaredExponentialTime",
    "Product",
    "ActionOnly",
    "eval_time_kernel",
    "eval_action_kernel",
    "eval_product_kernel",
    "gram",
    "cross_gram",
]


class Kernel:
    """Base class. Subclasses set ``kind`` and implement ``_gram``."""

    kind: ClassVar[str] = ""
    #: ``k(x, x) == 1`` and ``k(x, y) <= 1`` everywhere
    bounded: ClassVar[bool] = True

    def _check(self, X):
        raise NotImplementedError

    def _gram(self, X, Y):
        raise NotImplementedError

    def __call__(self, X, Y=None):
        X = self._check(X)
        Y = X if Y is None else self._check(Y)
        self._check_compatible(X, Y)
        return self._gram(X, Y)

    def diag(self, X):
        """Prior variances ``k(x, x)`` for every row of ``X``."""
        X = self._check(X)
        return np.ones(X.shape[0])

    def _check_compatible(self, X, Y):
        if X.ndim == 2 and X.shape[1] != Y.shape[1]:
            raise ValueError(
                f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]} columns"
            )

    def get_params(self, deep=True):
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _sq_dist(A, B):
    diff = A[:, None, :] - B[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _abs_lag(s, u):
    return np.abs(s[:, None] - u[None, :])


# ---------------------------------------------------------------------------
# action kernels
# ---------------------------------------------------------------------------


class _ActionKernel(Kernel):
    kind = "action"

    def _check(self, X):
        return check_actions(X)


@dataclass(frozen=True)
class SquaredExponential(_ActionKernel):
    """``exp(-|a - a'|^2 / (2 l^2))``."""

    length_scale: float = 1.0

    def __post_init__(self):
        check_positive(self.length_scale, "length_scale")

    def _gram(self, X, Y):
        return np.exp(-_sq_dist(X, Y) / (2.0 * self.length_scale**2))


@dataclass(frozen=True)
class Matern(_ActionKernel):
    """Matérn kernel for half-integer smoothness ``nu`` in {0.5, 1.5, 2.5}."""

    nu: float = 2.5
    length_scale: float = 1.0

    def __post_init__(self):
        if self.nu not in (0.5, 1.5, 2.5):
            raise ValueError(f"nu must be one of 0.5, 1.5, 2.5, got {self.nu!r}")
        check_positive(self.length_scale, "length_scale")

    def _gram(self, X, Y):
        r = np.sqrt(_sq_dist(X, Y)) / self.length_scale
        if self.nu == 0.5:
            return np.exp(-r)
        if self.nu == 1.5:
            z = np.sqrt(3.0) * r
            return (1.0 + z) * np.exp(-z)
        z = np.sqrt(5.0) * r
        return (1.0 + z + z * z / 3.0) * np.exp(-z)


@dataclass(frozen=True)
class Linear(_ActionKernel):
    """Dot-product kernel ``a . a'``.

    Not bounded by one: prior variance at ``a`` is ``|a|^2``.
    """

    bounded: ClassVar[bool] = False

    def _gram(self, X, Y):
        return np.einsum("ik,jk->ij", X, Y)

    def diag(self, X):
        X = self._check(X)
        return np.einsum("ik,ik->i", X, X)


# ---------------------------------------------------------------------------
# time kernels
# ---------------------------------------------------------------------------


class _TimeKernel(Kernel):
    kind = "time"

    def _check(self, X):
        return check_times(X)

    def _check_compatible(self, X, Y):
        pass


@dataclass(frozen=True)
class PeriodicTime(_TimeKernel):
    """Periodic kernel on integer time steps.

    ``form="standard"`` gives ``exp(-(2/l^2) sin^2(pi |t - t'| / period))``,
    which repeats every ``period`` steps. ``form="double"`` replaces the
    denominator by ``2 * period`` (repeats every ``2 * period`` steps) and is
    kept only for comparison runs.

    The lag is reduced modulo the repetition length and folded into
    ``[0, cycle/2]`` before the sine is taken, so shifting either argument by
    a whole period returns an identical float.
    """

    length_scale: float = 10.0
    period: int = 20
    form: str = "standard"

    def __post_init__(self):
        check_positive(self.length_scale, "length_scale")
        check_positive(self.period, "period", integer=True)
        if self.form not in ("standard", "double"):
            raise ValueError(f"form must be 'standard' or 'double', got {self.form!r}")

    @property
    def cycle(self):
        return self.period if self.form == "standard" else 2 * self.period

    def _gram(self, s, u):
        lag = np.mod(_abs_lag(s, u), self.cycle)
        lag = np.minimum(lag, self.cycle - lag)
        return np.exp(-(2.0 / self.length_scale**2) * np.sin(np.pi * lag / self.cycle) ** 2)


@dataclass(frozen=True)
class DecayTime(_TimeKernel):
    """Forgetting kernel ``(1 - epsilon) ** (|t - t'| / 2)`` of time-varying GP-UCB."""

    epsilon: float = 0.01

    def __post_init__(self):
        check_unit_interval(self.epsilon, "epsilon", closed_left=True)

    def _gram(self, s, u):
        return (1.0 - self.epsilon) ** (_abs_lag(s, u) / 2.0)


@dataclass(frozen=True)
class SquaredExponentialTime(_TimeKernel):
    """Squared-exponential kernel on the raw time index (time as a context)."""

    length_scale: float = 10.0

    def __post_init__(self):
        check_positive(self.length_scale, "length_scale")

    def _gram(self, s, u):
        lag = _abs_lag(s, u)
        return np.exp(-(lag * lag) / (2.0 * self.length_scale**2))


# ---------------------------------------------------------------------------
# pair kernels
# ---------------------------------------------------------------------------


class _PairKernel(Kernel):
    kind = "pair"

    def _check(self, X):
        return check_pairs(X)


@dataclass(frozen=True)
class Product(_PairKernel):
    """``k((a, t), (a', t')) = k_action(a, a') * k_time(t, t')``."""

    action_kernel: Kernel
    time_kernel: Kernel

    def __post_init__(self):
        if getattr(self.action_kernel, "kind", None) != "action":
            raise TypeError("action_kernel must be an action kernel")
        if getattr(self.time_kernel, "kind", None) != "time":
            raise TypeError("time_kernel must be a time kernel")

    @property
    def bounded(self):
        return self.action_kernel.bounded

    def _gram(self, X, Y):
        KA = self.action_kernel._gram(X[:, :-1], Y[:, :-1])
        KT = self.time_kernel._gram(X[:, -1], Y[:, -1])
        return KA * KT

    def diag(self, X):
        X = self._check(X)
        return self.action_kernel.diag(X[:, :-1])


@dataclass(frozen=True)
class ActionOnly(_PairKernel):
    """Pair kernel that ignores the time column (stationary GP-UCB)."""

    action_kernel: Kernel

    def __post_init__(self):
        if getattr(self.action_kernel, "kind", None) != "action":
            raise TypeError("action_kernel must be an action kernel")

    @property
    def bounded(self):
        return self.action_kernel.bounded

    def _gram(self, X, Y):
        return self.action_kernel._gram(X[:, :-1], Y[:, :-1])

    def diag(self, X):
        X = self._check(X)
        return self.action_kernel.diag(X[:, :-1])


# ---------------------------------------------------------------------------
# functional interface
# ---------------------------------------------------------------------------


def eval_time_kernel(kernel, t, t2):
    if kernel.kind != "time":
        raise TypeError("expected a time kernel")
    return float(kernel([t], [t2])[0, 0])


def eval_action_kernel(kernel, a, a2):
    if kernel.kind != "action":
        raise TypeError("expected an action kernel")
    a = np.atleast_1d(np.asarray(a, dtype=float))
    a2 = np.atleast_1d(np.asarray(a2, dtype=float))
    if a.ndim != 1 or a.shape != a2.shape:
        raise ValueError(f"action dimension mismatch: {a.shape} vs {a2.shape}")
    return float(kernel(a[None, :], a2[None, :])[0, 0])


def eval_product_kernel(kernel, s, s2):
    """Evaluate a pair kernel at two ``(action, t)`` tuples or flat rows."""
    if kernel.kind != "pair":
        raise TypeError("expected a pair kernel")
    x, x2 = _as_row(s), _as_row(s2)
    if x.shape != x2.shape:
        raise ValueError(f"action dimension mismatch: {x.shape} vs {x2.shape}")
    return float(kernel(x[None, :], x2[None, :])[0, 0])


def _as_row(s):
    if isinstance(s, tuple) and len(s) == 2:
        a, t = s
        return np.append(np.atleast_1d(np.asarray(a, dtype=float)), float(t))
    return np.asarray(s, dtype=float).ravel()


def _stack_inputs(kernel, inputs):
    if kernel.kind == "pair" and isinstance(inputs, (list, tuple)) and inputs and all(
        isinstance(s, tuple) for s in inputs
    ):
        rows = [_as_row(s) for s in inputs]
        if len({r.shape for r in rows}) != 1:
            raise ValueError("inputs are heterogeneous in dimension")
        return np.vstack(rows)
    if isinstance(inputs, (list, tuple)):
        if len(inputs) == 0:
            raise ValueError("inputs must be nonempty")
        shapes = {np.shape(x) for x in inputs}
        if len(shapes) != 1:
            raise ValueError("inputs are heterogeneous in kind or dimension")
    return inputs


def gram(kernel, inputs):
    """Square Gram matrix of ``kernel`` over ``inputs``."""
    return kernel(_stack_inputs(kernel, inputs))


def cross_gram(kernel, inputs, query):
    """Vector ``[k(x_i, query)]_i`` over the rows of ``inputs``."""
    X = kernel._check(_stack_inputs(kernel, inputs))
    if kernel.kind == "pair":
        q = _as_row(query)[None, :]
    elif kernel.kind == "action":
        q = np.atleast_1d(np.asarray(query, dtype=float))[None, :]
    else:
        q = np.atleast_1d(np.asarray(query, dtype=float))
    q = kernel._check(q)
    kernel._check_compatible(X, q)
    return kernel._gram(X, q)[:, 0]
