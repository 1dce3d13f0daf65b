"""Incremental Gaussian-process regression over action-time pairs."""
from __future__ import annotations

import numpy as np
from scipy.linalg import solve_triangular
from sklearn.base import BaseEstimator, RegressorMixin

from ._validation import (
    NumericalDegeneracyError,
    check_pairs,
    check_positive,
    jittered_cholesky,
)
from .kernels import Kernel

__all__ = ["IncrementalGPRegressor", "VARIANCE_SLACK"]

#: negative posterior variances down to this value are treated as roundoff
VARIANCE_SLACK = 1e-10


class IncrementalGPRegressor(RegressorMixin, BaseEstimator):
    """Zero-mean GP regressor that absorbs observations one at a time.

    The Cholesky factor ``L`` of ``K + noise_variance * I`` is grown by a
    border update per observation, so absorbing the ``n``-th point costs
    ``O(n^2)``. Alongside ``L`` the regressor keeps ``v = L^{-1} y``; the
    posterior mean is then ``(L^{-1} k_q) . v``.

    Each absorbed observation also adds ``0.5 * log(1 + var_before / noise)``
    to :attr:`info_gain_`, where ``var_before`` is the posterior variance at
    the new input just before it was observed. The running sum equals
    ``0.5 * log det(I + K / noise)``.

    Parameters
    ----------
    kernel : Kernel
        Pair kernel acting on rows ``[a_1, ..., a_d, t]``.
    noise_variance : float, default=1.0
        Variance of the Gaussian observation noise.

    Attributes
    ----------
    X_ : ndarray of shape (n_observations, n_features)
    y_ : ndarray of shape (n_observations,)
    L_ : ndarray of shape (n_observations, n_observations)
    info_gain_ : float
    """

    def __init__(self, kernel: Kernel, noise_variance: float = 1.0):
        self.kernel = kernel
        self.noise_variance = noise_variance

    # -- state -----------------------------------------------------------

    def reset(self):
        """Discard all observations and return to the prior."""
        if not isinstance(self.kernel, Kernel) or self.kernel.kind != "pair":
            raise TypeError("kernel must be a pair kernel (Product or ActionOnly)")
        check_positive(self.noise_variance, "noise_variance")
        self._n = 0
        self._cap = 0
        self._X = None
        self._y = np.empty(0)
        self._L = np.empty((0, 0))
        self._v = np.empty(0)
        self.n_features_in_ = None
        self.info_gain_ = 0.0
        self.jitter_ = 0.0
        return self

    def _ensure_state(self):
        if not hasattr(self, "_n"):
            self.reset()

    @property
    def n_observations_(self):
        self._ensure_state()
        return self._n

    @property
    def X_(self):
        self._ensure_state()
        return self._X[: self._n].copy() if self._n else np.empty((0, 0))

    @property
    def y_(self):
        self._ensure_state()
        return self._y[: self._n].copy()

    @property
    def L_(self):
        self._ensure_state()
        return self._L[: self._n, : self._n].copy()

    @property
    def alpha_(self):
        """Solution of ``(K + noise I) alpha = y``."""
        self._ensure_state()
        if self._n == 0:
            return np.empty(0)
        L = self._L[: self._n, : self._n]
        return solve_triangular(L, self._v[: self._n], lower=True, trans="T")

    def _grow(self, n_features):
        cap = max(16, 2 * self._cap)
        X = np.empty((cap, n_features))
        y = np.empty(cap)
        L = np.zeros((cap, cap))
        v = np.empty(cap)
        if self._n:
            n = self._n
            X[:n] = self._X[:n]
            y[:n] = self._y[:n]
            L[:n, :n] = self._L[:n, :n]
            v[:n] = self._v[:n]
        self._X, self._y, self._L, self._v, self._cap = X, y, L, v, cap

    # -- fitting -----------------------------------------------------------

    def fit(self, X, y):
        """Reset, then absorb the rows of ``X`` in order."""
        self.reset()
        return self.partial_fit(X, y)

    def partial_fit(self, X, y):
        """Absorb additional observations without discarding earlier ones."""
        self._ensure_state()
        X = check_pairs(X, n_features=self.n_features_in_)
        y = np.atleast_1d(np.asarray(y, dtype=float))
        if y.shape != (X.shape[0],):
            raise ValueError(f"y has shape {y.shape}, expected ({X.shape[0]},)")
        if not np.all(np.isfinite(y)):
            raise ValueError("targets contain non-finite values")
        for x, target in zip(X, y):
            self._observe_one(x, target)
        return self

    def observe(self, s, y):
        """Absorb a single pair ``s = [a_1, ..., a_d, t]`` with reward ``y``."""
        return self.partial_fit(np.asarray(s, dtype=float).reshape(1, -1), [y])

    def _observe_one(self, x, target):
        if self._n == 0:
            self.n_features_in_ = x.shape[0]
        if self._n == self._cap:
            self._grow(x.shape[0])
        n = self._n
        xr = x[None, :]
        kss = self.kernel._gram(xr, xr)[0, 0]
        if n:
            L = self._L[:n, :n]
            k = self.kernel._gram(self._X[:n], xr)[:, 0]
            c = solve_triangular(L, k, lower=True)
            var_before = kss - c @ c
        else:
            c = np.empty(0)
            var_before = kss
        pivot = var_before + self.noise_variance + self.jitter_

        self._X[n] = x
        self._y[n] = target
        self._n = n + 1
        if pivot > 0 and np.isfinite(pivot):
            d = np.sqrt(pivot)
            self._L[n, :n] = c
            self._L[n, n] = d
            self._v[n] = (target - c @ self._v[:n]) / d
        else:
            self._refactor()
        self.info_gain_ += 0.5 * np.log1p(max(var_before, 0.0) / self.noise_variance)

    def _refactor(self):
        n = self._n
        X = self._X[:n]
        M = self.kernel._gram(X, X) + self.noise_variance * np.eye(n)
        L, jitter = jittered_cholesky(M)
        self.jitter_ = jitter
        self._L[:n, :n] = L
        self._v[:n] = solve_triangular(L, self._y[:n], lower=True)

    # -- prediction --------------------------------------------------------

    def predict_mean_var(self, X):
        """Posterior means and variances at the rows of ``X``."""
        self._ensure_state()
        X = check_pairs(X, n_features=self.n_features_in_)
        prior = self.kernel.diag(X)
        if self._n == 0:
            return np.zeros(X.shape[0]), prior
        n = self._n
        Kq = self.kernel._gram(self._X[:n], X)
        W = solve_triangular(self._L[:n, :n], Kq, lower=True)
        mean = W.T @ self._v[:n]
        var = prior - np.einsum("ij,ij->j", W, W)
        if np.any(var < -VARIANCE_SLACK):
            raise NumericalDegeneracyError(
                f"posterior variance {var.min():.3e} below -{VARIANCE_SLACK:g}"
            )
        return mean, np.maximum(var, 0.0)

    def predict(self, X, return_std=False):
        mean, var = self.predict_mean_var(X)
        if return_std:
            return mean, np.sqrt(var)
        return mean

    def predict_one(self, s):
        mean, var = self.predict_mean_var(np.asarray(s, dtype=float).reshape(1, -1))
        return float(mean[0]), float(var[0])

    def info_gain(self):
        self._ensure_state()
        return self.info_gain_
