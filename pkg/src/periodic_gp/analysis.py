"""Regret accounting and numerical checks of the information-gain theory."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_pairs, check_positive, check_symmetric, jittered_cholesky
from .gp import IncrementalGPRegressor
from .kernels import ActionOnly, Product

__all__ = [
    "RegretTrace",
    "InfoGainReport",
    "regret_trace",
    "info_gain_logdet",
    "rearrangement_check",
    "greedy_gamma",
    "theorem2_bound",
    "regret_bound_curve",
    "regret_bound_constant",
    "rank_estimate",
    "bound_dominance",
]


@dataclass
class RegretTrace:
    instantaneous: np.ndarray
    cumulative: np.ndarray
    policy: str = ""
    replication: int = 0
    seed: int | None = None
    start: int = 1

    @property
    def total(self):
        return float(self.cumulative[-1]) if len(self.cumulative) else 0.0


@dataclass
class InfoGainReport:
    observed_gain: float
    phase_gains: list
    greedy_gamma_A: float = math.nan
    tau_times_gamma: float = math.nan
    bound_slack: float = field(init=False)

    def __post_init__(self):
        self.bound_slack = float(sum(self.phase_gains) - self.observed_gain)


def regret_trace(env, actions, T=None, *, start=1, policy="", replication=0, seed=None):
    """Per-step regret of playing ``actions`` at steps ``start .. start + T - 1``.

    ``actions`` are grid/arm indices or action vectors understood by
    ``env.index_of``.
    """
    if T is None:
        T = len(actions)
    if len(actions) != T:
        raise ValueError(f"got {len(actions)} actions for horizon {T}")
    inst = np.empty(T)
    for k, a in enumerate(actions):
        t = start + k
        j = env.index_of(a)
        inst[k] = env.best_mean(t)[1] - env.mean(j, t)
    return RegretTrace(inst, np.cumsum(inst), policy, replication, seed, start)


def info_gain_logdet(gram, noise_variance):
    """``0.5 * log det(I + gram / noise_variance)`` via a Cholesky factor."""
    noise_variance = check_positive(noise_variance, "noise_variance")
    K = check_symmetric(np.atleast_2d(np.asarray(gram, dtype=float)), atol=1e-10)
    M = np.eye(K.shape[0]) + K / noise_variance
    L, _ = jittered_cholesky(M)
    return float(np.sum(np.log(np.diag(L))))


def rearrangement_check(X, kernel, noise_variance, period, strict=True):
    """Compare the joint information gain with the sum of per-phase gains.

    ``X`` holds action-time pairs whose times run ``1 .. T`` in order with
    ``T`` a multiple of ``period``. The joint gain uses the full product-kernel
    Gram; phase ``i`` contributes the gain of the action-kernel Gram over the
    actions played at times congruent to ``i`` modulo ``period``.

    With ``strict`` a negative slack beyond ``-1e-9`` raises ``AssertionError``.
    """
    if not isinstance(kernel, Product):
        raise TypeError("kernel must be a Product kernel")
    period = check_positive(period, "period", integer=True)
    X = check_pairs(X)
    T = X.shape[0]
    if T % period:
        raise ValueError(f"horizon {T} is not a multiple of the period {period}")
    times = X[:, -1]
    if not np.array_equal(times, np.arange(1, T + 1)):
        raise ValueError("time column must be 1..T in order")
    observed = info_gain_logdet(kernel(X), noise_variance)
    phases = []
    for i in range(period):
        A = X[i::period, :-1]
        phases.append(info_gain_logdet(kernel.action_kernel(A), noise_variance))
    report = InfoGainReport(observed, phases)
    if strict and report.bound_slack < -1e-9:
        raise AssertionError(
            f"per-phase gains fall short of the joint gain by {-report.bound_slack:.3e}"
        )
    return report


def greedy_gamma(action_kernel, candidates, budget, noise_variance):
    """Greedy lower estimate of the maximal information gain from ``budget`` points.

    Points are chosen without replacement; each step takes the candidate with
    the largest posterior variance (equivalently the largest marginal gain),
    lowest index first on ties.
    """
    candidates = np.asarray(candidates, dtype=float)
    if candidates.ndim == 1:
        candidates = candidates[:, None]
    budget = int(budget)
    if not 0 <= budget <= candidates.shape[0]:
        raise ValueError(f"budget {budget} outside [0, {candidates.shape[0]}]")
    pairs = np.column_stack([candidates, np.ones(candidates.shape[0])])
    gp = IncrementalGPRegressor(ActionOnly(action_kernel), noise_variance).reset()
    available = np.ones(candidates.shape[0], dtype=bool)
    for _ in range(budget):
        _, var = gp.predict_mean_var(pairs)
        var = np.where(available, var, -np.inf)
        j = int(np.argmax(var))
        available[j] = False
        gp.observe(pairs[j], 0.0)
    return gp.info_gain_


def theorem2_bound(greedy_gamma_K, period):
    """Upper estimate ``period * gamma`` of the action-time information gain."""
    if greedy_gamma_K < 0:
        raise ValueError("gamma must be non-negative")
    check_positive(period, "period", integer=True)
    return period * greedy_gamma_K


def regret_bound_constant(noise_variance):
    """``8 / log(1 + 1 / noise_variance)``."""
    noise_variance = check_positive(noise_variance, "noise_variance")
    return 8.0 / math.log1p(1.0 / noise_variance)


def regret_bound_curve(T, schedule, gamma, noise_variance):
    """``sqrt(c3 * t * beta_t * gamma) + pi^2 / 6`` for ``t = 1 .. T``."""
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    c3 = regret_bound_constant(noise_variance)
    return [math.sqrt(c3 * t * schedule(t) * gamma) + math.pi**2 / 6.0 for t in range(1, T + 1)]


def rank_estimate(gram, rel_tol=1e-8):
    """Number of singular values above ``rel_tol`` times the largest one."""
    s = np.linalg.svd(np.atleast_2d(np.asarray(gram, dtype=float)), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rel_tol * s[0]))


def bound_dominance(traces, curve):
    """Fraction of traces whose cumulative regret stays below ``curve`` throughout."""
    curve = np.asarray(curve, dtype=float)
    if not traces:
        return math.nan
    hits = [np.all(tr.cumulative <= curve[: len(tr.cumulative)]) for tr in traces]
    return float(np.mean(hits))
