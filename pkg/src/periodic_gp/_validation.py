"""Input validation helpers shared by kernels, the GP regressor and policies."""
from __future__ import annotations

import numbers

import numpy as np


class NumericalDegeneracyError(ArithmeticError):
    """Raised when a factorization or variance cannot be repaired by jitter."""


class ScheduleDomainError(ValueError):
    """Raised when an exploration schedule is evaluated outside its domain."""


def check_positive(value, name, *, integer=False):
    if integer:
        if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < 1:
            raise ValueError(f"{name} must be a positive integer, got {value!r}")
        return int(value)
    if not isinstance(value, numbers.Real) or not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)


def check_unit_interval(value, name, *, closed_left=False):
    lo_ok = value >= 0 if closed_left else value > 0
    if not isinstance(value, numbers.Real) or not (lo_ok and value < 1):
        bounds = "[0, 1)" if closed_left else "(0, 1)"
        raise ValueError(f"{name} must lie in {bounds}, got {value!r}")
    return float(value)


def check_actions(A, *, n_features=None, name="actions"):
    """Return ``A`` as a finite float array of shape (n, d)."""
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A.reshape(-1, 1)
    if A.ndim != 2 or A.shape[1] < 1:
        raise ValueError(f"{name} must be 2-D with at least one column, got shape {A.shape}")
    if A.shape[0] == 0:
        raise ValueError(f"{name} must be nonempty")
    if n_features is not None and A.shape[1] != n_features:
        raise ValueError(
            f"{name} have dimension {A.shape[1]}, expected {n_features}"
        )
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contain non-finite values")
    return A


def check_times(t, *, name="times"):
    """Return time indices as a 1-D float array of finite values >= 1."""
    t = np.asarray(t, dtype=float)
    if t.ndim == 2 and t.shape[1] == 1:
        t = t[:, 0]
    t = np.atleast_1d(t)
    if t.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got shape {t.shape}")
    if t.size == 0:
        raise ValueError(f"{name} must be nonempty")
    if not np.all(np.isfinite(t)):
        raise ValueError(f"{name} contain non-finite values")
    return t


def check_pairs(X, *, n_features=None, name="action-time pairs"):
    """Validate action-time pairs laid out as rows ``[a_1, ..., a_d, t]``.

    ``n_features`` counts all columns, including the trailing time column.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.ndim != 2 or X.shape[1] < 2:
        raise ValueError(
            f"{name} must be 2-D with action columns followed by a time column, "
            f"got shape {X.shape}"
        )
    if X.shape[0] == 0:
        raise ValueError(f"{name} must be nonempty")
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(
            f"{name} have {X.shape[1]} columns, expected {n_features}"
        )
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contain non-finite values")
    return X


def make_pairs(actions, t):
    """Stack an action matrix with a time index (scalar or per-row) into pairs."""
    actions = check_actions(actions)
    times = np.broadcast_to(np.asarray(t, dtype=float), (actions.shape[0],))
    return np.column_stack([actions, times])


def check_symmetric(K, *, atol=1e-12):
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {K.shape}")
    if not np.allclose(K, K.T, rtol=0.0, atol=atol):
        raise ValueError("matrix is not symmetric")
    return K


def jittered_cholesky(M, *, start=1e-10, stop=1e-4):
    """Cholesky factor of ``M``, escalating diagonal jitter on failure.

    Jitter runs from ``start`` to ``stop`` times ``trace(M)/n`` in factors of
    ten. Returns ``(L, jitter)``; raises ``NumericalDegeneracyError`` once the
    ladder is exhausted.
    """
    M = np.asarray(M, dtype=float)
    n = M.shape[0]
    try:
        return np.linalg.cholesky(M), 0.0
    except np.linalg.LinAlgError:
        pass
    scale = np.trace(M) / n if n else 1.0
    if not np.isfinite(scale) or scale <= 0:
        scale = 1.0
    factor = start
    eye = np.eye(n)
    while factor <= stop * (1 + 1e-9):
        jitter = factor * scale
        try:
            return np.linalg.cholesky(M + jitter * eye), jitter
        except np.linalg.LinAlgError:
            factor *= 10.0
    raise NumericalDegeneracyError(
        f"Cholesky factorization failed after jitter up to {stop:g} * trace/n"
    )
