import numpy as np
import pytest

from postselect import linalg

ACCEPTANCE_LINES: list[str] = []


def qubit_pair():
    return np.diag([2 / 3, 1 / 3]).astype(complex), np.eye(2, dtype=complex) / 2


def random_isometry(dim, rank, rng):
    return linalg.random_unitary(dim, rng)[:, :rank]


def random_equal_support_pair(rng, dim=None):
    """Two states with identical support; rank-deficient about a third of the time."""
    dim = int(rng.integers(2, 5)) if dim is None else dim
    rank = dim if dim == 2 or rng.random() > 1 / 3 else int(rng.integers(2, dim))
    v = random_isometry(dim, rank, rng)
    rho = v @ linalg.random_density(rank, rng) @ v.conj().T
    sigma = v @ linalg.random_density(rank, rng) @ v.conj().T
    return linalg.hermitianize(rho), linalg.hermitianize(sigma)


def random_diagonal(dim, rng):
    p = rng.dirichlet(np.ones(dim))
    return p, np.diag(p).astype(complex)


@pytest.fixture
def pair():
    return qubit_pair()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
