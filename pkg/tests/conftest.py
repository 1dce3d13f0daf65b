import numpy as np
import pytest

from periodic_gp.kernels import (
    ActionOnly,
    DecayTime,
    Matern,
    PeriodicTime,
    Product,
    SquaredExponential,
    SquaredExponentialTime,
)


def dense_posterior(kernel, X, y, Q, noise):
    """Posterior mean/variance by a direct dense solve of (K + noise I)."""
    K = kernel(X) + noise * np.eye(len(X))
    Kq = kernel(X, Q)
    mean = Kq.T @ np.linalg.solve(K, y)
    var = kernel.diag(Q) - np.einsum("ij,ij->j", Kq, np.linalg.solve(K, Kq))
    return mean, var


def dense_info_gain(kernel, X, noise):
    sign, logdet = np.linalg.slogdet(np.eye(len(X)) + kernel(X) / noise)
    assert sign > 0
    return 0.5 * logdet


MIXED_KERNELS = [
    Product(SquaredExponential(1.0), PeriodicTime(10.0, 20)),
    Product(SquaredExponential(0.5), PeriodicTime(1.0, 5)),
    Product(Matern(1.5, 1.0), PeriodicTime(2.0, 7)),
    Product(Matern(0.5, 2.0), DecayTime(0.05)),
    Product(Matern(2.5, 0.7), SquaredExponentialTime(10.0)),
    ActionOnly(SquaredExponential(1.0)),
]


def random_trajectory(rng, kernel, T, d=1, box=5.0):
    A = rng.uniform(-box, box, size=(T, d))
    t = np.arange(1, T + 1, dtype=float)
    X = np.column_stack([A, t])
    y = rng.normal(size=T)
    return X, y


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
